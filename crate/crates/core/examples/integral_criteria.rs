//! Limit criteria at the origin and at infinity.

use bessel_pairs::potentials::RadialPotential;
use bessel_pairs::weights::{criterion_at_infinity, criterion_at_zero};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v: RadialPotential = "const:1".parse()?;
    for c in [0.2, 1.0, 2.25, 3.0] {
        let w = RadialPotential::power_weighted(c / 2.0, c / 2.0, 0.0, 1.0, 1.0)?;
        let z = criterion_at_zero(&v, &w, 5, 1.0)?;
        println!("c = {c}: limit at 0 = {:.8} (c/9 = {:.8}) {:?}", z.limit_estimate, c / 9.0, z.classification);
    }

    let (n, c) = (5.0f64, 1.5);
    let inf = criterion_at_infinity(|r| r.powf(n - 1.0), |r| c * r.powf(n - 3.0), 1.0)?;
    println!("limit at infinity = {:.8} (c/(n-2)^2 = {:.8}) oscillating: {}", inf.limit, c / 9.0, inf.oscillation_warning);
    Ok(())
}
