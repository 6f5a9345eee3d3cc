//! Shoots the pair (1, c r^-2) in dimension 3 on either side of the Hardy
//! constant 1/4 and prints the zero counts.

use bessel_pairs::potentials::RadialPotential;
use bessel_pairs::sturm::{integral_conditions, prufer_shoot, BesselPairSpec, ShootOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v: RadialPotential = "const:1".parse()?;
    let w: RadialPotential = "pow:2".parse()?;
    let base = BesselPairSpec::new(v, w, 3, 1.0, 0.0)?;
    for warning in integral_conditions(&base).warnings() {
        println!("warning: {warning}");
    }
    for c in [0.1, 0.2, 0.24, 0.26, 0.5, 2.0] {
        let report = prufer_shoot(&base.with_coupling(c)?, &ShootOptions::default())?;
        println!(
            "c = {c:<5} positive = {:<5} zeros = {:<3} first zero = {:?}",
            report.positive_on_interval, report.zero_count, report.first_zero
        );
    }
    Ok(())
}
