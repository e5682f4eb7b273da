//! Graded decomposition of the gap example: every monomial of positive degree
//! in two variables except `z1 z2`.
//!
//! ```text
//! cargo run --example decompose -- 5
//! ```

use hardy_beurling::corpus::{example, ExampleParams};
use hardy_beurling::decomposition::{analyze_lw, decompose_element};
use hardy_beurling::{decompose_subspace, Element, Valuation};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let big_n = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(4);
    let params = ExampleParams {
        max_degree: Some(big_n),
        ..ExampleParams::default()
    };
    let sc = example("ex6.7", &params)?;
    let v = sc.subspace()?;
    let d = decompose_subspace(&v, &sc.tolerances)?;

    println!("dim V = {}, N = {big_n}", v.dim());
    println!(
        "series dims   {:?}",
        d.series().iter().map(|s| s.dim()).collect::<Vec<_>>()
    );
    println!("component dims {:?}", d.dims());
    println!(
        "max |<w_j, w_k>| across levels: {:.2e}",
        d.cross_orthogonality()
    );
    for (k, w) in d.components().iter().enumerate() {
        if w.is_empty() {
            continue;
        }
        let ords: Vec<Valuation> = w.vectors().iter().map(Element::ord).collect();
        let lw = analyze_lw(w, k, &sc.tolerances);
        println!(
            "W_{k}: dim {}, ord {:?}, constant ord {}, sigma_min(P_k W_k) = {:.3}",
            w.dim(),
            ords[0],
            lw.constant_ord,
            lw.smallest_singular_value.unwrap_or(0.0)
        );
    }

    // Split an element of V into its graded pieces and put it back together.
    let f = v
        .vectors()
        .iter()
        .enumerate()
        .fold(Element::zero(v.space()), |acc, (i, e)| {
            acc.add(&e.scale(Complex64::new(1.0 / (i + 1) as f64, 0.0)))
                .unwrap()
        });
    let split = decompose_element(&d, &f)?;
    println!("reconstruction error {:.2e}", split.reconstruction_residual);
    Ok(())
}
