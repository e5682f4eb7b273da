//! Level-by-level synthesis of `r h` from the graded components.
//!
//! On an invariant subspace the partial sums `f_m = g_0 + ... + g_m` converge
//! to `r h`. On the gap example the recursion stops at the level where full
//! projection fails.

use hardy_beurling::beurling::{partial_projection, SynthesisError};
use hardy_beurling::corpus::{example, ExampleParams};
use hardy_beurling::{decompose_subspace, synthesize, MultiIndex, Poly};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = example("ex6.2", &ExampleParams::default())?;
    let d = decompose_subspace(&sc.subspace()?, &sc.tolerances)?;
    let h = &d.components()[1].vectors()[0];
    let r = Poly::monomial(MultiIndex::new(vec![1, 1]));
    let trace = synthesize(&d, &r, h)?;
    println!("ex6.2: r = {r}, h in W_{}", trace.k);
    for (m, (n2, o)) in trace
        .partial_norms_sqr
        .iter()
        .zip(&trace.residual_ord)
        .enumerate()
    {
        println!("  m = {m}: ||f_m||^2 = {n2:.6}  ord(rh - f_m) = {o:?}");
    }
    println!(
        "  ||rh||^2 = {:.6}, final residual {:.2e}",
        trace.product_norm_sqr, trace.final_residual
    );
    for m in 0..trace.g_series.len() {
        partial_projection(&d, &trace, m)?;
    }
    println!("  every f_m equals the projection of rh onto W_0 + ... + W_m");

    let sc = example("ex6.7", &ExampleParams::default())?;
    let d = decompose_subspace(&sc.subspace()?, &sc.tolerances)?;
    let h = d.components()[1]
        .vectors()
        .iter()
        .find(|h| {
            h.coefficient(&MultiIndex::new(vec![0, 1]))
                .is_some_and(|c| c[0].norm() > 0.5)
        })
        .expect("z2 lies in W_1");
    let r = Poly::variable(2, 0);
    match synthesize(&d, &r, h) {
        Err(SynthesisError::FullProjectionViolation { level, residual }) => {
            println!("ex6.7: r = z1, h = z2 stops at level {level}, residual {residual:.6}")
        }
        other => println!("ex6.7: unexpected {other:?}"),
    }
    Ok(())
}
