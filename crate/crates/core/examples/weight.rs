//! Bisects the largest admissible coupling for a few weights.

use bessel_pairs::potentials::RadialPotential;
use bessel_pairs::special::j0_first_zero;
use bessel_pairs::weights::{weight_pair, weight_potential};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let unit: RadialPotential = "const:1".parse()?;
    let est = weight_potential(&unit, 1.0, 1e-9)?;
    let z = j0_first_zero();
    println!("beta(1; 1) = {:.10}  (z0^2 = {:.10}, {} bisections)", est.value, z * z, est.iterations);

    for n in [3u32, 4, 6] {
        let est = weight_pair(&unit, &"pow:2".parse()?, n, 1.0, 1e-7)?;
        println!("n = {n}: beta(r^-2) = {:.8} in [{:.8}, {:.8}]", est.value, est.lower, est.upper);
    }

    let ilog: RadialPotential = "ilog:k=1,rho=2.718281828459045".parse()?;
    let est = weight_potential(&ilog, 1.0, 1e-6)?;
    println!("beta(W_1; 1) = {:.6}", est.value);
    Ok(())
}
