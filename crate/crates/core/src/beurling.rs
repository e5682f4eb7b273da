//! The invariant-subspace characterization: a closed subspace is
//! `R_1`-invariant exactly when its near-homogeneous decomposition is near
//! inner and has the full projection property.
//!
//! [`synthesize`] runs the constructive half: given `r` and `h ∈ W_k` it
//! builds `g_m ∈ W_m` level by level so that `Σ g_m = r h`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::Poly;
use crate::decomposition::{
    analyze_lw, decompose_subspace, DecompositionError, GradedDecomposition,
};
use crate::elements::{mul_poly, Element, ElementError, Valuation};
use crate::io::TermsDump;
use crate::linalg;
use crate::properties::{self, CheckOptions, PropertyReport, Verdict};
use crate::subspaces::SubspaceBasis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("r must vanish at the origin (ord(r) = {0})")]
    ROrder(Valuation),
    #[error("h is not a member of any near-homogeneous component")]
    NotInComponent,
    #[error(
        "level {level}: the degree-{level} block is not in P_m(W_m) (residual {residual:.3e})"
    )]
    FullProjectionViolation { level: usize, residual: f64 },
    #[error("level {level}: partial sum differs from the projection of rh by {residual:.3e}")]
    NearInnerMismatch { level: usize, residual: f64 },
    #[error(transparent)]
    Element(#[from] ElementError),
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisTrace {
    pub r: Poly,
    /// Level of the component containing `h`.
    pub k: usize,
    #[serde(skip)]
    pub h: Element,
    #[serde(skip)]
    pub product: Element,
    /// No term of `r h` was cut off at degree `N`.
    pub exact: bool,
    #[serde(skip)]
    pub g_series: Vec<Element>,
    pub g_norms: Vec<f64>,
    /// `ord(r h - f_m)` after each level.
    pub residual_ord: Vec<Valuation>,
    /// `‖f_m‖²` after each level.
    pub partial_norms_sqr: Vec<f64>,
    pub product_norm_sqr: f64,
    pub final_residual: f64,
    pub warnings: Vec<String>,
}

/// Builds `g_0, ..., g_N` with `g_m ∈ W_m` and `P_m(g_m) = P_m(r h - f_{m-1})`.
pub fn synthesize(
    d: &GradedDecomposition,
    r: &Poly,
    h: &Element,
) -> Result<SynthesisTrace, SynthesisError> {
    if r.ord() < Valuation::Finite(1) {
        return Err(SynthesisError::ROrder(r.ord()));
    }
    let tol = d.tolerances();
    let k = d
        .components()
        .iter()
        .position(|w| !w.is_empty() && w.member(h, tol.mem).map(|m| m.0).unwrap_or(false))
        .ok_or(SynthesisError::NotInComponent)?;
    let product = mul_poly(r, h)?;
    let rh = product.value.clone();
    let space = rh.space().clone();
    let scale = rh.norm().max(1.0);
    let mut f = Element::zero(&space);
    let mut g_series = Vec::new();
    let mut residual_ord = Vec::new();
    let mut partial_norms_sqr = Vec::new();
    let mut warnings = Vec::new();
    if !product.exact {
        warnings.push(format!(
            "r h reaches beyond degree {}; synthesis runs in the truncated module",
            space.max_degree()
        ));
    }
    let mut norm_sqr = 0.0;
    for (m, w) in d.components().iter().enumerate() {
        let x = rh.sub(&f)?;
        let block = space.block(m);
        let b = linalg::CVector::from_column_slice(&x.coeffs()[block.clone()]);
        let g = if w.is_empty() {
            let residual = b.norm();
            if residual > tol.mem * scale {
                return Err(SynthesisError::FullProjectionViolation { level: m, residual });
            }
            Element::zero(&space)
        } else {
            let mat = w.matrix(block);
            let lw = analyze_lw(w, m, tol);
            if let Some(sigma) = lw.smallest_singular_value {
                if sigma < 1e-8 {
                    warnings.push(format!(
                        "level {m}: L_W is ill-conditioned (sigma_min = {sigma:.3e})"
                    ));
                }
            }
            let c = linalg::lstsq(&mat, &b, tol.rank);
            let residual = (&b - &mat * &c).norm();
            if residual > tol.mem * scale {
                return Err(SynthesisError::FullProjectionViolation { level: m, residual });
            }
            let mut g = Element::zero(&space);
            for (ci, v) in c.iter().zip(w.vectors()) {
                g.axpy(*ci, v);
            }
            g
        };
        norm_sqr += g.norm_sqr();
        f.axpy(Complex64::new(1.0, 0.0), &g);
        g_series.push(g);
        residual_ord.push(rh.sub(&f)?.ord_with(tol.drop));
        partial_norms_sqr.push(norm_sqr);
    }
    let final_residual = rh.sub(&f)?.norm();
    Ok(SynthesisTrace {
        r: r.clone(),
        k,
        h: h.clone(),
        exact: product.exact,
        product_norm_sqr: rh.norm_sqr(),
        product: rh,
        g_norms: g_series.iter().map(Element::norm).collect(),
        g_series,
        residual_ord,
        partial_norms_sqr,
        final_residual,
        warnings,
    })
}

/// `f_m = g_0 + ... + g_m`, checked against the projection of `r h` onto
/// `W_0 ⊕ ... ⊕ W_m` and against `‖f_m‖² <= ‖r h‖²`.
pub fn partial_projection(
    d: &GradedDecomposition,
    trace: &SynthesisTrace,
    m: usize,
) -> Result<Element, SynthesisError> {
    let space = trace.product.space();
    let mut f = Element::zero(space);
    let mut projected = Element::zero(space);
    let top = m.min(trace.g_series.len().saturating_sub(1));
    for j in 0..=top {
        f.axpy(Complex64::new(1.0, 0.0), &trace.g_series[j]);
        let p = d.components()[j].project(&trace.product)?;
        projected.axpy(Complex64::new(1.0, 0.0), &p);
    }
    let scale = trace.product.norm().max(1.0);
    let residual = f.sub(&projected)?.norm();
    if residual > 1e-9 * scale || f.norm_sqr() > trace.product_norm_sqr + 1e-10 * scale * scale {
        return Err(SynthesisError::NearInnerMismatch { level: m, residual });
    }
    Ok(f)
}

/// Everything needed to replay a biconditional failure.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub n: usize,
    pub d: usize,
    pub max_degree: usize,
    pub basis: Vec<TermsDump>,
    pub tolerances: crate::tolerance::Tolerances,
    pub reports: Vec<PropertyReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremVerdict {
    pub dims: Vec<usize>,
    pub invariant: PropertyReport,
    pub near_inner: PropertyReport,
    pub full_projection: PropertyReport,
    pub weak_near_inner: PropertyReport,
    /// `None` when any of the three deciding verdicts is inconclusive.
    pub biconditional_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl TheoremVerdict {
    pub fn triple(&self) -> (Verdict, Verdict, Verdict) {
        (
            self.invariant.verdict,
            self.near_inner.verdict,
            self.full_projection.verdict,
        )
    }

    pub fn abstained(&self) -> bool {
        self.biconditional_holds.is_none()
    }
}

pub fn biconditional(inv: Verdict, ni: Verdict, fp: Verdict) -> Option<bool> {
    if [inv, ni, fp].contains(&Verdict::Inconclusive) {
        return None;
    }
    let rhs = ni == Verdict::Pass && fp == Verdict::Pass;
    Some((inv == Verdict::Pass) == rhs)
}

/// Decomposes `V` and runs the invariance, near-inner and full projection
/// checkers.
pub fn verify_beurling(
    v: &SubspaceBasis,
    opts: &CheckOptions,
) -> Result<TheoremVerdict, DecompositionError> {
    let d = decompose_subspace(v, &opts.tolerances)?;
    Ok(verify_decomposition(&d, opts))
}

pub fn verify_decomposition(d: &GradedDecomposition, opts: &CheckOptions) -> TheoremVerdict {
    let v = d.subspace();
    let ((invariant, near_inner), (full_projection, weak_near_inner)) = rayon::join(
        || {
            rayon::join(
                || properties::is_r1_invariant(v, opts),
                || properties::is_near_inner_decomposition(d, opts),
            )
        },
        || {
            rayon::join(
                || properties::has_full_projection(d, opts),
                || properties::is_weakly_near_inner(d, opts),
            )
        },
    );
    let biconditional_holds = biconditional(
        invariant.verdict,
        near_inner.verdict,
        full_projection.verdict,
    );
    let counterexample = (biconditional_holds == Some(false)).then(|| {
        let space = v.space();
        Counterexample {
            n: space.nvars(),
            d: space.coeff_dim(),
            max_degree: space.max_degree(),
            basis: v.vectors().iter().map(TermsDump::from_element).collect(),
            tolerances: opts.tolerances,
            reports: vec![
                invariant.clone(),
                near_inner.clone(),
                full_projection.clone(),
            ],
        }
    });
    TheoremVerdict {
        dims: d.dims(),
        invariant,
        near_inner,
        full_projection,
        weak_near_inner,
        biconditional_holds,
        counterexample,
    }
}

/// Invariance decided through the component bases only: `r W_k ⊆ V`.
pub fn generator_criterion(
    v: &SubspaceBasis,
    opts: &CheckOptions,
) -> Result<PropertyReport, DecompositionError> {
    let d = decompose_subspace(v, &opts.tolerances)?;
    Ok(properties::component_invariance(&d, opts))
}

/// Runs [`synthesize`] for every monomial `r` of degree `1..=horizon` and every
/// component basis vector, returning the traces in `(k, h, r)` order.
pub fn synthesize_all(
    d: &GradedDecomposition,
    horizon: usize,
) -> Vec<(usize, usize, Result<SynthesisTrace, SynthesisError>)> {
    use rayon::prelude::*;
    let space = d.subspace().space();
    let rs = properties::monomial_multipliers(space.nvars(), horizon.min(space.max_degree()));
    let pairs: Vec<(usize, usize, &Element)> = d
        .components()
        .iter()
        .enumerate()
        .flat_map(|(k, w)| w.vectors().iter().enumerate().map(move |(i, h)| (k, i, h)))
        .collect();
    pairs
        .into_par_iter()
        .flat_map_iter(|(k, i, h)| {
            rs.iter()
                .map(move |m| (k, i, synthesize(d, &Poly::monomial(m.clone()), h)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Space;
    use crate::grading::MultiIndex;
    use crate::subspaces::{module_closure, orthonormalize, DEFAULT_RANK_TOL};
    use crate::tolerance::Tolerances;
    use std::sync::Arc;

    fn mono(space: &Arc<Space>, e: &[u32]) -> Element {
        Element::monomial(space, &MultiIndex::new(e.to_vec()), 0).unwrap()
    }

    fn ex62() -> GradedDecomposition {
        let s = Space::new(2, 1, 4).unwrap();
        let v = module_closure(
            &s,
            &[mono(&s, &[1, 0]), mono(&s, &[0, 1])],
            DEFAULT_RANK_TOL,
        )
        .unwrap()
        .basis;
        decompose_subspace(&v, &Tolerances::default()).unwrap()
    }

    #[test]
    fn synthesis_on_submodule() {
        let d = ex62();
        let s = d.subspace().space().clone();
        let t = synthesize(&d, &Poly::variable(2, 0), &mono(&s, &[0, 1])).unwrap();
        assert!(t.final_residual <= 1e-12);
        for (m, g) in t.g_series.iter().enumerate() {
            if m == 2 {
                assert!(g.sub(&mono(&s, &[1, 1])).unwrap().norm() < 1e-12);
            } else {
                assert!(g.norm() < 1e-12);
            }
        }
        let f1 = partial_projection(&d, &t, 1).unwrap();
        assert!(f1.norm() < 1e-12);
        let f2 = partial_projection(&d, &t, 2).unwrap();
        assert!((f2.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(t.residual_ord.last(), Some(&Valuation::Infinite));

        let t = synthesize(
            &d,
            &Poly::monomial(MultiIndex::new(vec![2, 0])),
            &mono(&s, &[1, 0]),
        )
        .unwrap();
        assert!(t.g_series[3].sub(&mono(&s, &[3, 0])).unwrap().norm() < 1e-12);
        assert!(t.final_residual <= 1e-12);
    }

    #[test]
    fn synthesis_rejects_constant_r() {
        let d = ex62();
        let s = d.subspace().space().clone();
        assert!(matches!(
            synthesize(&d, &Poly::one(2), &mono(&s, &[1, 0])),
            Err(SynthesisError::ROrder(_))
        ));
        assert!(matches!(
            synthesize(&d, &Poly::variable(2, 0), &mono(&s, &[0, 0])),
            Err(SynthesisError::NotInComponent)
        ));
    }

    #[test]
    fn gap_subspace_synthesis_fails_at_level_two() {
        let s = Space::new(2, 1, 3).unwrap();
        let gens: Vec<Element> = [
            [1, 0],
            [0, 1],
            [2, 0],
            [0, 2],
            [3, 0],
            [2, 1],
            [1, 2],
            [0, 3],
        ]
        .iter()
        .map(|e| mono(&s, e))
        .collect();
        let v = orthonormalize(&s, &gens, DEFAULT_RANK_TOL).unwrap();
        let d = decompose_subspace(&v, &Tolerances::default()).unwrap();
        let err = synthesize(&d, &Poly::variable(2, 0), &mono(&s, &[0, 1])).unwrap_err();
        assert!(matches!(
            err,
            SynthesisError::FullProjectionViolation { level: 2, .. }
        ));
    }

    #[test]
    fn biconditional_table() {
        use Verdict::*;
        assert_eq!(biconditional(Pass, Pass, Pass), Some(true));
        assert_eq!(biconditional(Fail, Pass, Fail), Some(true));
        assert_eq!(biconditional(Fail, Pass, Pass), Some(false));
        assert_eq!(biconditional(Pass, Inconclusive, Pass), None);
    }
}
