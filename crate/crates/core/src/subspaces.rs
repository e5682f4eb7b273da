//! Orthonormal bases of finite-dimensional subspaces, projections, relative
//! complements, graded slices and submodule generation.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::elements::{linear_combine, Element, ElementError, Space};
use crate::grading::MultiIndex;
use crate::linalg::{self, CMatrix};

/// Default relative rank tolerance for Gram–Schmidt.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default membership tolerance, scaled by `max(‖f‖, 1)`.
pub const DEFAULT_MEM_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubspaceError {
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("basis vector {index} of the inner subspace is not contained in the outer one (residual {residual:.3e})")]
    NotContained { index: usize, residual: f64 },
}

/// An orthonormal basis of a subspace of the truncated space.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    space: Arc<Space>,
    vectors: Vec<Element>,
    rank_tol: f64,
    gram_residual: f64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

// One Gram–Schmidt step with re-orthogonalization against `basis`; returns the
// normalized residual when it survives the rank test.
fn reduce(basis: &[Element], v: &Element, rank_tol: f64) -> Option<Element> {
    let original = v.norm();
    let mut w = v.clone();
    for _ in 0..2 {
        for q in basis {
            let c = w.dot(q);
            if c != zero() {
                w.axpy(-c, q);
            }
        }
    }
    let residual = w.norm();
    if original == 0.0 || residual == 0.0 || residual <= rank_tol * original {
        return None;
    }
    Some(w.scale(Complex64::new(1.0 / residual, 0.0)))
}

fn gram_residual(vectors: &[Element]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dot(b) - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl SubspaceBasis {
    pub fn empty(space: &Arc<Space>) -> SubspaceBasis {
        SubspaceBasis {
            space: space.clone(),
            vectors: Vec::new(),
            rank_tol: DEFAULT_RANK_TOL,
            gram_residual: 0.0,
        }
    }

    fn from_orthonormal(space: &Arc<Space>, vectors: Vec<Element>, rank_tol: f64) -> SubspaceBasis {
        let gram_residual = gram_residual(&vectors);
        SubspaceBasis {
            space: space.clone(),
            vectors,
            rank_tol,
            gram_residual,
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn vectors(&self) -> &[Element] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Largest `|⟨v_i, v_j⟩ − δ_ij|` over the basis.
    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    fn check(&self, f: &Element) -> Result<(), ElementError> {
        if self.space.same_as(f.space()) {
            Ok(())
        } else {
            Err(ElementError::SpaceMismatch)
        }
    }

    /// Expansion coefficients `⟨f, v_i⟩`.
    pub fn coordinates(&self, f: &Element) -> Result<Vec<Complex64>, ElementError> {
        self.check(f)?;
        Ok(self.vectors.iter().map(|v| f.dot(v)).collect())
    }

    /// Orthogonal projection `Σ ⟨f, v_i⟩ v_i`.
    pub fn project(&self, f: &Element) -> Result<Element, ElementError> {
        self.check(f)?;
        let mut out = Element::zero(&self.space);
        for v in &self.vectors {
            out.axpy(f.dot(v), v);
        }
        Ok(out)
    }

    /// `(‖f − Pf‖ <= tol * max(‖f‖, 1), ‖f − Pf‖)`.
    pub fn member(&self, f: &Element, tol: f64) -> Result<(bool, f64), ElementError> {
        let residual = f.sub(&self.project(f)?)?.norm();
        Ok((residual <= tol * f.norm().max(1.0), residual))
    }

    /// Coefficient matrix with one column per basis vector, restricted to the
    /// coordinate range `rows`.
    pub(crate) fn matrix(&self, rows: std::ops::Range<usize>) -> CMatrix {
        let mut m = CMatrix::zeros(rows.len(), self.dim());
        for (j, v) in self.vectors.iter().enumerate() {
            for (i, c) in v.coeffs()[rows.clone()].iter().enumerate() {
                m[(i, j)] = *c;
            }
        }
        m
    }

    /// Elements `Σ_i coef[(i, j)] v_i`, one per column of `coef`.
    pub(crate) fn combine(&self, coef: &CMatrix) -> Vec<Element> {
        (0..coef.ncols())
            .map(|j| {
                let pairs: Vec<(Complex64, &Element)> = self
                    .vectors
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (coef[(i, j)], v))
                    .collect();
                linear_combine(&pairs).unwrap_or_else(|_| Element::zero(&self.space))
            })
            .collect()
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Candidates whose
/// residual is `<= rank_tol` times their norm are dropped; input order decides
/// which of several dependent vectors survive.
pub fn orthonormalize(
    space: &Arc<Space>,
    vectors: &[Element],
    rank_tol: f64,
) -> Result<SubspaceBasis, SubspaceError> {
    let mut basis: Vec<Element> = Vec::new();
    for v in vectors {
        if !space.same_as(v.space()) {
            return Err(ElementError::SpaceMismatch.into());
        }
        if basis.len() == space.dim() {
            break;
        }
        if let Some(q) = reduce(&basis, v, rank_tol) {
            basis.push(q);
        }
    }
    Ok(SubspaceBasis::from_orthonormal(space, basis, rank_tol))
}

/// Basis of `B ⊖ A` for `A ⊆ B`.
///
/// The result has dimension exactly `dim B − dim A`: it is spanned by the
/// leading left singular vectors of the residuals `b − P_A b`.
pub fn complement_within(
    a: &SubspaceBasis,
    b: &SubspaceBasis,
) -> Result<SubspaceBasis, SubspaceError> {
    complement_within_tol(a, b, DEFAULT_MEM_TOL)
}

pub fn complement_within_tol(
    a: &SubspaceBasis,
    b: &SubspaceBasis,
    mem_tol: f64,
) -> Result<SubspaceBasis, SubspaceError> {
    complement_with_defect(a, b, mem_tol).map(|c| c.0)
}

/// [`complement_within_tol`] plus the norm of the residual directions beyond
/// `dim B − dim A` that were discarded.
pub(crate) fn complement_with_defect(
    a: &SubspaceBasis,
    b: &SubspaceBasis,
    mem_tol: f64,
) -> Result<(SubspaceBasis, f64), SubspaceError> {
    for (index, v) in a.vectors.iter().enumerate() {
        let (ok, residual) = b.member(v, mem_tol)?;
        if !ok {
            return Err(SubspaceError::NotContained { index, residual });
        }
    }
    let space = &b.space;
    let target = b.dim().saturating_sub(a.dim());
    if target == 0 {
        let empty = SubspaceBasis {
            rank_tol: b.rank_tol,
            ..SubspaceBasis::empty(space)
        };
        return Ok((empty, 0.0));
    }
    // residual of each B-vector against A, then the top singular directions
    let residuals: Vec<Element> = b
        .vectors
        .iter()
        .map(|v| {
            let mut w = v.clone();
            for _ in 0..2 {
                for q in &a.vectors {
                    let c = w.dot(q);
                    w.axpy(-c, q);
                }
            }
            w
        })
        .collect();
    let resid_basis = SubspaceBasis {
        space: space.clone(),
        vectors: residuals,
        rank_tol: b.rank_tol,
        gram_residual: f64::NAN,
    };
    let full = 0..space.dim();
    let m = resid_basis.matrix(full);
    let (_, s, v) = linalg::sorted_svd(&m);
    let defect = linalg::rank_defect(s.as_slice(), target, b.rank_tol);
    let mut coef = CMatrix::zeros(b.dim(), target);
    for (j, &sj) in s.iter().enumerate().take(target) {
        let scale = Complex64::new(1.0 / sj.max(f64::MIN_POSITIVE), 0.0);
        coef.set_column(j, &(v.column(j) * scale));
    }
    let vectors = resid_basis.combine(&coef);
    let mut cleaned = Vec::with_capacity(vectors.len());
    for v in &vectors {
        // a final Gram–Schmidt sweep removes the O(eps / s) drift of the SVD
        match reduce(&cleaned, v, 0.0) {
            Some(q) => cleaned.push(q),
            None => cleaned.push(v.clone()),
        }
    }
    Ok((
        SubspaceBasis::from_orthonormal(space, cleaned, b.rank_tol),
        defect,
    ))
}

/// Basis of `{f ∈ span S : ord(f) >= k}`.
///
/// Computed as the null space of the map taking the coordinates of `f` in `S`
/// to the coefficients of `f` of degree `< k`. The resulting vectors have
/// those low coefficients set exactly to zero.
pub fn graded_slice(s: &SubspaceBasis, k: usize) -> SubspaceBasis {
    graded_slice_with_defect(s, k).0
}

/// [`graded_slice`] plus the norm of the low coefficients that the rank
/// decision set to zero.
pub(crate) fn graded_slice_with_defect(s: &SubspaceBasis, k: usize) -> (SubspaceBasis, f64) {
    let space = &s.space;
    if k == 0 {
        return (s.clone(), 0.0);
    }
    if s.is_empty() {
        return (SubspaceBasis::empty(space), 0.0);
    }
    let low = s.matrix(space.below(k));
    let (kernel, defect) = linalg::null_space_with_defect(&low, s.rank_tol);
    let vectors: Vec<Element> = s
        .combine(&kernel)
        .into_iter()
        .map(|v| v.mask_below(k))
        .collect();
    let mut basis: Vec<Element> = Vec::with_capacity(vectors.len());
    for v in &vectors {
        if let Some(q) = reduce(&basis, v, s.rank_tol) {
            basis.push(q);
        }
    }
    (
        SubspaceBasis::from_orthonormal(space, basis, s.rank_tol),
        defect,
    )
}

/// One multiplier applied to one generator during module closure.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureStep {
    pub generator: usize,
    pub multiplier: MultiIndex,
    /// No nonzero term of the product was cut off at degree `N`.
    pub exact: bool,
    /// The product enlarged the span.
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub basis: SubspaceBasis,
    /// Every generator is a polynomial, so the basis spans exactly the degree
    /// `<= N` part of the generated submodule.
    pub exact: bool,
    pub generator_log: Vec<ClosureStep>,
}

/// Orthonormal basis of the span of `z^α g` over all generators `g` and all
/// `|α| <= N`, products truncated at degree `N`. Multipliers run in graded-lex
/// order, generators in input order within each multiplier.
pub fn module_closure(
    space: &Arc<Space>,
    generators: &[Element],
    rank_tol: f64,
) -> Result<ClosureResult, SubspaceError> {
    for g in generators {
        if !space.same_as(g.space()) {
            return Err(ElementError::SpaceMismatch.into());
        }
    }
    let mut basis: Vec<Element> = Vec::new();
    let mut log = Vec::new();
    for alpha in space.order().iter() {
        for (index, g) in generators.iter().enumerate() {
            let product = g.mul_monomial(alpha)?;
            let accepted = basis.len() < space.dim()
                && !product.value.is_zero()
                && match reduce(&basis, &product.value, rank_tol) {
                    Some(q) => {
                        basis.push(q);
                        true
                    }
                    None => false,
                };
            log.push(ClosureStep {
                generator: index,
                multiplier: alpha.clone(),
                exact: product.exact,
                accepted,
            });
        }
    }
    let exact = generators.iter().all(|g| g.tail() == 0.0);
    Ok(ClosureResult {
        basis: SubspaceBasis::from_orthonormal(space, basis, rank_tol),
        exact,
        generator_log: log,
    })
}

/// Orthonormalized span of the generators themselves.
pub fn linear_closure(
    space: &Arc<Space>,
    generators: &[Element],
    rank_tol: f64,
) -> Result<SubspaceBasis, SubspaceError> {
    orthonormalize(space, generators, rank_tol)
}
