//! The valuation subspace series `V_k = {h ∈ V : ord h >= k}` and the
//! near-homogeneous decomposition `V = W_0 ⊕ W_1 ⊕ ...`, `W_k = V_k ⊖ V_{k+1}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::elements::{Element, ElementError, Valuation};
use crate::linalg;
use crate::subspaces::{self, SubspaceBasis, SubspaceError};
use crate::tolerance::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompositionError {
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error("element is not a member of the decomposed subspace (residual {residual:.3e})")]
    NotMember { residual: f64 },
}

impl From<ElementError> for DecompositionError {
    fn from(e: ElementError) -> Self {
        DecompositionError::Subspace(e.into())
    }
}

#[derive(Clone, Debug)]
pub struct GradedDecomposition {
    v: SubspaceBasis,
    series: Vec<SubspaceBasis>,
    components: Vec<SubspaceBasis>,
    tolerances: Tolerances,
    rank_defect: f64,
    cross_orthogonality: f64,
}

impl GradedDecomposition {
    pub fn subspace(&self) -> &SubspaceBasis {
        &self.v
    }

    /// `V_0, ..., V_{N+1}`.
    pub fn series(&self) -> &[SubspaceBasis] {
        &self.series
    }

    /// `V_k`; zero-dimensional beyond `N`.
    pub fn slice(&self, k: usize) -> &SubspaceBasis {
        &self.series[k.min(self.series.len() - 1)]
    }

    /// `W_0, ..., W_N`.
    pub fn components(&self) -> &[SubspaceBasis] {
        &self.components
    }

    pub fn component(&self, k: usize) -> Option<&SubspaceBasis> {
        self.components.get(k)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(SubspaceBasis::dim).collect()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// Root-sum-square of the singular values that rank decisions treated as
    /// zero while building the series and components. The computed
    /// decomposition is exact for a subspace this close to `V`; it sits at
    /// rounding level unless the grading is nearly degenerate.
    pub fn rank_defect(&self) -> f64 {
        self.rank_defect
    }

    /// Largest `|⟨w, w'⟩|` between basis vectors of distinct components.
    pub fn cross_orthogonality(&self) -> f64 {
        self.cross_orthogonality
    }

    /// Relative size below which a projection onto a component cannot be
    /// told apart from zero: the rank defect plus the leakage between
    /// components.
    pub fn noise_floor(&self) -> f64 {
        self.rank_defect + self.cross_orthogonality
    }
}

fn cross_orthogonality(components: &[SubspaceBasis]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in components.iter().enumerate() {
        for b in &components[i + 1..] {
            for x in a.vectors() {
                for y in b.vectors() {
                    worst = worst.max(x.dot(y).norm());
                }
            }
        }
    }
    worst
}

/// Computes the series `V_0 ⊇ V_1 ⊇ ...` level by level and each component as
/// the relative complement of consecutive slices.
pub fn decompose_subspace(
    v: &SubspaceBasis,
    tolerances: &Tolerances,
) -> Result<GradedDecomposition, DecompositionError> {
    let big_n = v.space().max_degree();
    // each slice is cut out of the previous one, so the chain is nested even
    // when singular values sit near the rank tolerance
    let mut series = Vec::with_capacity(big_n + 2);
    let mut defect_sq = 0.0;
    series.push(v.clone());
    for k in 1..=big_n + 1 {
        let (next, defect) = subspaces::graded_slice_with_defect(&series[k - 1], k);
        defect_sq += defect * defect;
        series.push(next);
    }
    let parts = (0..=big_n)
        .into_par_iter()
        .map(|k| subspaces::complement_with_defect(&series[k + 1], &series[k], tolerances.mem))
        .collect::<Result<Vec<_>, _>>()?;
    let mut components = Vec::with_capacity(parts.len());
    for (w, defect) in parts {
        defect_sq += defect * defect;
        components.push(w);
    }
    Ok(GradedDecomposition {
        v: v.clone(),
        series,
        cross_orthogonality: cross_orthogonality(&components),
        components,
        tolerances: *tolerances,
        rank_defect: defect_sq.sqrt(),
    })
}

#[derive(Clone, Debug)]
pub struct ElementDecomposition {
    pub element: Element,
    /// `parts[k]` is the projection of the element onto `W_k`.
    pub parts: Vec<Element>,
    pub reconstruction_residual: f64,
}

/// Splits a member `h` of `V` into its near-homogeneous parts.
pub fn decompose_element(
    d: &GradedDecomposition,
    h: &Element,
) -> Result<ElementDecomposition, DecompositionError> {
    let (ok, residual) = d.v.member(h, d.tolerances.mem)?;
    if !ok {
        return Err(DecompositionError::NotMember { residual });
    }
    let parts = d
        .components
        .iter()
        .map(|w| w.project(h))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sum = Element::zero(h.space());
    for p in &parts {
        sum.axpy(Complex64::new(1.0, 0.0), p);
    }
    let reconstruction_residual = h.sub(&sum)?.norm();
    Ok(ElementDecomposition {
        element: h.clone(),
        parts,
        reconstruction_residual,
    })
}

/// Index of the first near-homogeneous part above `drop * ‖h‖`, or above the
/// decomposition's noise floor when that is larger.
pub fn ord_via_components(
    d: &GradedDecomposition,
    h: &Element,
) -> Result<Valuation, DecompositionError> {
    let e = decompose_element(d, h)?;
    let norm = h.norm();
    if norm == 0.0 {
        return Ok(Valuation::Infinite);
    }
    let cut = d.tolerances.drop.max(d.noise_floor()) * norm;
    Ok(e.parts
        .iter()
        .position(|p| p.norm() > cut)
        .map_or(Valuation::Infinite, Valuation::Finite))
}

/// Behaviour of the degree-`m` block map restricted to a subspace `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LwAnalysis {
    /// Every nonzero element of `W` has `ord = m`.
    pub constant_ord: bool,
    /// The block map is injective on `W`.
    pub injective: bool,
    /// Smallest singular value of the block map; `None` when `W = {0}`.
    pub smallest_singular_value: Option<f64>,
}

/// The map `L_W: w ↦ P_m w` on `W`.
///
/// `ord` is constant on `W ∖ {0}` exactly when every basis vector vanishes
/// below degree `m` and `L_W` is injective, since then no nonzero combination
/// can lose its degree-`m` block.
pub fn analyze_lw(w: &SubspaceBasis, m: usize, tolerances: &Tolerances) -> LwAnalysis {
    if w.is_empty() {
        return LwAnalysis {
            constant_ord: true,
            injective: true,
            smallest_singular_value: None,
        };
    }
    let space = w.space();
    let block = w.matrix(space.block(m));
    let sigma_min = if block.nrows() < block.ncols() {
        0.0
    } else {
        linalg::singular_values(&block)
            .last()
            .copied()
            .unwrap_or(0.0)
    };
    let injective = sigma_min > tolerances.rank;
    let low_ok = w.vectors().iter().all(|v| {
        let low: f64 = v.coeffs()[space.below(m)]
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        low.sqrt() <= tolerances.drop * v.norm()
    });
    LwAnalysis {
        constant_ord: low_ok && injective,
        injective,
        smallest_singular_value: Some(sigma_min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::blaschke_coeffs;
    use crate::elements::Space;
    use crate::grading::MultiIndex;
    use crate::subspaces::{module_closure, orthonormalize, DEFAULT_RANK_TOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mono(space: &Arc<Space>, e: &[u32]) -> Element {
        Element::monomial(space, &MultiIndex::new(e.to_vec()), 0).unwrap()
    }

    fn ex62(n: usize) -> GradedDecomposition {
        let s = Space::new(2, 1, n).unwrap();
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
    fn submodule_dims() {
        let d = ex62(4);
        assert_eq!(d.dims(), vec![0, 2, 3, 4, 5]);
        assert_eq!(d.series()[5].dim(), 0);
        assert!(d.cross_orthogonality() <= 1e-9);
    }

    #[test]
    fn single_non_homogeneous_generator() {
        let s = Space::new(1, 1, 3).unwrap();
        let g = mono(&s, &[0]).add(&mono(&s, &[1])).unwrap();
        let v = orthonormalize(&s, std::slice::from_ref(&g), DEFAULT_RANK_TOL).unwrap();
        let d = decompose_subspace(&v, &Tolerances::default()).unwrap();
        assert_eq!(d.dims(), vec![1, 0, 0, 0]);
        let h = g.scale(c(1.0 / 2f64.sqrt()));
        let w0 = &d.components()[0].vectors()[0];
        assert!((w0.dot(&h).norm() - 1.0).abs() < 1e-14);
        let e = decompose_element(&d, &h).unwrap();
        assert!(e.parts[0].sub(&h).unwrap().norm() < 1e-14);
        assert!(e.parts[1..].iter().all(|p| p.norm() < 1e-14));
    }

    #[test]
    fn gap_subspace_dims() {
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
        assert_eq!(d.dims(), vec![0, 2, 2, 4]);
    }

    #[test]
    fn element_parts() {
        let d = ex62(4);
        let s = d.subspace().space().clone();
        let h = mono(&s, &[1, 0]).add(&mono(&s, &[1, 1])).unwrap();
        let e = decompose_element(&d, &h).unwrap();
        assert!(e.parts[0].norm() < 1e-14);
        assert!(e.parts[1].sub(&mono(&s, &[1, 0])).unwrap().norm() < 1e-12);
        assert!(e.parts[2].sub(&mono(&s, &[1, 1])).unwrap().norm() < 1e-12);
        assert!(e.parts[3].norm() < 1e-12 && e.parts[4].norm() < 1e-12);
        assert!(e.reconstruction_residual <= 1e-10 * h.norm());

        let w = d.components()[2].vectors()[1].clone();
        let e = decompose_element(&d, &w).unwrap();
        for (k, p) in e.parts.iter().enumerate() {
            if k != 2 {
                assert!(p.norm() < 1e-12);
            }
        }
        assert!(matches!(
            decompose_element(&d, &mono(&s, &[0, 0])),
            Err(DecompositionError::NotMember { .. })
        ));
    }

    #[test]
    fn ord_cross_check() {
        let d = ex62(4);
        let s = d.subspace().space().clone();
        assert_eq!(
            ord_via_components(&d, &mono(&s, &[1, 1])).unwrap(),
            Valuation::Finite(2)
        );
        assert_eq!(
            ord_via_components(&d, &Element::zero(&s)).unwrap(),
            Valuation::Infinite
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let mut h = Element::zero(&s);
            for v in d.subspace().vectors() {
                if rng.gen_bool(0.3) {
                    h.axpy(
                        Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                        v,
                    );
                }
            }
            assert_eq!(ord_via_components(&d, &h).unwrap(), h.ord());
        }
    }

    #[test]
    fn lw_examples() {
        let tol = Tolerances::default();
        let s = Space::new(2, 1, 3).unwrap();
        let w = orthonormalize(
            &s,
            &[mono(&s, &[1, 0]), mono(&s, &[0, 1])],
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        let a = analyze_lw(&w, 1, &tol);
        assert!(a.constant_ord && a.injective);
        assert!((a.smallest_singular_value.unwrap() - 1.0).abs() < 1e-14);

        let s1 = Space::new(1, 1, 24).unwrap();
        let z2b = blaschke_coeffs(&s1, c(0.5))
            .unwrap()
            .mul_monomial(&MultiIndex::new(vec![2]))
            .unwrap()
            .value;
        let w = orthonormalize(&s1, &[z2b], DEFAULT_RANK_TOL).unwrap();
        let a = analyze_lw(&w, 2, &tol);
        assert!(a.constant_ord && a.injective);
        // oracle: the degree-2 coefficient of z^2 B is B(0) = a
        assert!((a.smallest_singular_value.unwrap() - 0.5).abs() < 1e-12);

        let mixed =
            orthonormalize(&s1, &[mono(&s1, &[0]), mono(&s1, &[1])], DEFAULT_RANK_TOL).unwrap();
        assert!(!analyze_lw(&mixed, 0, &tol).constant_ord);
    }
}
