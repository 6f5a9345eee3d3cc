//! Prints a_nm and beta_nm over a small grid with the case each one took.

use bessel_pairs::constants::{a_nm, beta_nm};

fn main() {
    println!("{:>3} {:>6} {:>14} {:>14}  case", "n", "m", "a_nm", "beta_nm");
    for n in [3u32, 4, 5, 8] {
        for j in 0..5 {
            let m = -2.0 + 0.5 * j as f64;
            let a = match a_nm(n, m) {
                Ok(r) => r,
                Err(e) => {
                    println!("{n:>3} {m:>6} {e}");
                    continue;
                }
            };
            let b = beta_nm(n, m).map(|r| format!("{:14.6}", r.value)).unwrap_or_else(|_| format!("{:>14}", "-"));
            println!("{n:>3} {m:>6} {:14.6} {b}  {} (k = {:?})", a.value, a.case_taken, a.k_min);
        }
    }
}
