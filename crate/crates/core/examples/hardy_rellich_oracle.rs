//! Discrete Hardy-Rellich constants per spherical mode, against the scan.

use bessel_pairs::constants::a_nm;
use bessel_pairs::oracle::{default_mode_cutoff, discrete_hardy_rellich};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [3u32, 4, 5] {
        let cutoff = default_mode_cutoff(n, 0.0)?;
        let est = discrete_hardy_rellich(n, 0.0, cutoff, 1.0, 2048)?;
        let closed = a_nm(n, 0.0)?;
        println!("n = {n}: discrete {:.5} at k = {}, closed form {:.5} at k = {:?}", est.value, est.k_min, closed.value, closed.k_min);
        for (k, q) in &est.modes {
            println!("    k = {k}: {q:.5}");
        }
    }
    Ok(())
}
