//! Truncated Blaschke factors `B_a(z) = (z - a) / (1 - ā z)` and how far the
//! truncation is from inner.
//!
//! ```text
//! cargo run --example blaschke -- 0.9 24
//! ```

use hardy_beurling::corpus::{blaschke, blaschke_shift_bound, blaschke_tail_bound};
use hardy_beurling::MultiIndex;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let a: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let big_n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(24);
    let a = Complex64::new(a, 0.0);
    let b = blaschke(a, big_n)?;

    let norm_gap = (1.0 - b.norm_sqr()).abs();
    println!("a = {}, N = {big_n}", a.re);
    println!(
        "| 1 - ||B||^2 | = {norm_gap:.3e}  bound {:.3e}",
        blaschke_tail_bound(a, big_n)
    );
    println!("stored tail bound on B: {:.3e}", b.tail());
    for k in 1..=4u32 {
        let shifted = b.mul_monomial(&MultiIndex::new(vec![k]))?.value;
        let ip = b.inner(&shifted)?.norm();
        println!(
            "k = {k}: |<B, z^k B>| = {ip:.3e}  analytic {:.3e}",
            blaschke_shift_bound(a, big_n, k as usize)
        );
    }
    Ok(())
}
