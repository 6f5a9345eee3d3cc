//! Higher-order Rellich type constants and their components.

use bessel_pairs::constants::{higher_order_constants, sigma_nm, HigherOrder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 4..=8u32 {
        println!("sigma(n = {n}) = {}", sigma_nm(n, 0.0, 2.0, 0.25));
    }
    for (variant, n, l) in [(HigherOrder::Ho1, 9, 1), (HigherOrder::Ho2, 10, 2), (HigherOrder::Ho3, 12, 1), (HigherOrder::Ho4, 8, 1)] {
        let r = higher_order_constants(variant, n, 0.0, 2, l, 0.25, 2.0)?;
        println!("{variant:?} n = {n} l = {l}: {} via {}", r.value, r.case_taken);
        for (name, value) in &r.components {
            println!("    {name} = {value}");
        }
    }
    Ok(())
}
