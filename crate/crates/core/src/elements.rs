//! Degree-truncated `E`-valued power series with the ℓ² coefficient inner
//! product.
//!
//! The truncated space is the quotient of `H^2(E, D^n)` by the functions that
//! vanish to order `N + 1` at the origin. Multiplication by a polynomial is the
//! ordinary product followed by discarding every term of degree `> N`; this is
//! a genuine module action on the quotient and `ord` remains a (non-strict)
//! valuation for it.
//!
//! Elements that stand for genuinely infinite series (Blaschke factors and
//! their multiples) also carry a `tail`: an upper bound on the ℓ² mass of the
//! represented function beyond degree `N`. Polynomial data has tail zero and is
//! exact in the quotient.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::Poly;
use crate::grading::{self, GradingError, MonomialOrder, MultiIndex};

/// Relative block magnitude below which a degree block counts as absent.
pub const DEFAULT_DROP: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("elements live in different spaces")]
    SpaceMismatch,
    #[error("invalid space parameters: n = {n}, d = {d}")]
    InvalidSpace { n: usize, d: usize },
    #[error("multi-index {index} has {got} variables, space has {expected}")]
    Arity {
        index: String,
        got: usize,
        expected: usize,
    },
    #[error("term {index} has degree {degree}, above the truncation degree {max_degree}")]
    DegreeExceeded {
        index: String,
        degree: usize,
        max_degree: usize,
    },
    #[error("coefficient vector has length {got}, coefficient space has dimension {expected}")]
    CoefficientLength { got: usize, expected: usize },
    #[error("component {component} out of range for coefficient dimension {d}")]
    Component { component: usize, d: usize },
    #[error("empty linear combination")]
    EmptyCombination,
    #[error(transparent)]
    Grading(#[from] GradingError),
}

/// Value of `ord`: a degree, or infinity for the zero element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinite => None,
        }
    }

    /// Sum with the usual conventions for infinity.
    pub fn plus(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(k) => s.serialize_u64(*k as u64),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

/// The truncated module `H^2(E, D^n)` modulo degree `> N`, with `dim E = d`.
#[derive(Debug)]
pub struct Space {
    d: usize,
    order: MonomialOrder,
    // shifts[var][ordinal] = ordinal of z_var * z^m, if still within degree N
    shifts: Vec<Vec<Option<usize>>>,
}

impl Space {
    pub fn new(n: usize, d: usize, max_degree: usize) -> Result<Arc<Space>, ElementError> {
        if n == 0 || d == 0 {
            return Err(ElementError::InvalidSpace { n, d });
        }
        let order = grading::enumerate(n, max_degree)?;
        let shifts = (0..n)
            .map(|var| {
                let unit = MultiIndex::unit(n, var);
                order
                    .iter()
                    .map(|m| {
                        let shifted = m.checked_add(&unit).expect("same arity");
                        order.index_of(&shifted)
                    })
                    .collect()
            })
            .collect();
        Ok(Arc::new(Space { d, order, shifts }))
    }

    /// Number of variables `n`.
    pub fn nvars(&self) -> usize {
        self.order.nvars()
    }

    /// Dimension of the coefficient space `E`.
    pub fn coeff_dim(&self) -> usize {
        self.d
    }

    /// Truncation degree `N`.
    pub fn max_degree(&self) -> usize {
        self.order.max_degree()
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    /// Complex dimension of the truncated space.
    pub fn dim(&self) -> usize {
        self.d * self.order.len()
    }

    /// Coordinate range of the degree-`k` block `H_k`.
    pub fn block(&self, k: usize) -> std::ops::Range<usize> {
        let r = self.order.degree_range(k);
        r.start * self.d..r.end * self.d
    }

    /// Coordinate range of all degrees `< k`.
    pub fn below(&self, k: usize) -> std::ops::Range<usize> {
        let r = self.order.below(k);
        r.start * self.d..r.end * self.d
    }

    pub fn same_as(&self, other: &Space) -> bool {
        std::ptr::eq(self, other)
            || (self.d == other.d
                && self.nvars() == other.nvars()
                && self.max_degree() == other.max_degree())
    }

    pub(crate) fn shift_ordinal(&self, var: usize, ordinal: usize) -> Option<usize> {
        self.shifts[var][ordinal]
    }
}

/// Result of multiplying an element by a polynomial.
#[derive(Clone, Debug)]
pub struct Product {
    pub value: Element,
    /// True iff no nonzero term was discarded by truncation.
    pub exact: bool,
    /// ℓ² norm of the discarded terms.
    pub discarded: f64,
}

/// A degree-truncated `E`-valued power series, stored densely in graded-lex
/// order with the `d` coefficient components of each monomial adjacent.
#[derive(Clone, Debug)]
pub struct Element {
    space: Arc<Space>,
    coeffs: Vec<Complex64>,
    tail: f64,
}

impl Element {
    pub fn zero(space: &Arc<Space>) -> Element {
        Element {
            space: space.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); space.dim()],
            tail: 0.0,
        }
    }

    /// `e_component * z^m`.
    pub fn monomial(
        space: &Arc<Space>,
        m: &MultiIndex,
        component: usize,
    ) -> Result<Element, ElementError> {
        if component >= space.d {
            return Err(ElementError::Component {
                component,
                d: space.d,
            });
        }
        let mut coeff = vec![Complex64::new(0.0, 0.0); space.d];
        coeff[component] = Complex64::new(1.0, 0.0);
        Element::from_terms(space, [(m.clone(), coeff)])
    }

    /// Builds an element from `(exponent, coefficient vector)` terms; repeated
    /// exponents accumulate.
    pub fn from_terms<I>(space: &Arc<Space>, terms: I) -> Result<Element, ElementError>
    where
        I: IntoIterator<Item = (MultiIndex, Vec<Complex64>)>,
    {
        let mut out = Element::zero(space);
        for (m, coeff) in terms {
            if m.nvars() != space.nvars() {
                return Err(ElementError::Arity {
                    index: m.to_string(),
                    got: m.nvars(),
                    expected: space.nvars(),
                });
            }
            if coeff.len() != space.d {
                return Err(ElementError::CoefficientLength {
                    got: coeff.len(),
                    expected: space.d,
                });
            }
            let ordinal = space
                .order
                .index_of(&m)
                .ok_or_else(|| ElementError::DegreeExceeded {
                    index: m.to_string(),
                    degree: m.degree(),
                    max_degree: space.max_degree(),
                })?;
            for (slot, c) in out.coeffs[ordinal * space.d..(ordinal + 1) * space.d]
                .iter_mut()
                .zip(coeff)
            {
                *slot += c;
            }
        }
        Ok(out)
    }

    /// Scalar-valued convenience constructor (`d = 1`).
    pub fn from_scalar_terms<I>(space: &Arc<Space>, terms: I) -> Result<Element, ElementError>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        Element::from_terms(space, terms.into_iter().map(|(m, c)| (m, vec![c])))
    }

    /// Wraps a dense coordinate vector in the space's layout.
    pub fn from_coeffs(
        space: &Arc<Space>,
        coeffs: Vec<Complex64>,
    ) -> Result<Element, ElementError> {
        if coeffs.len() != space.dim() {
            return Err(ElementError::CoefficientLength {
                got: coeffs.len(),
                expected: space.dim(),
            });
        }
        Ok(Element {
            space: space.clone(),
            coeffs,
            tail: 0.0,
        })
    }

    pub fn with_tail(mut self, tail: f64) -> Element {
        self.tail = tail;
        self
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Upper bound on the ℓ² mass beyond degree `N` of the represented series.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Coefficient vector `a_m` (length `d`), or `None` if `|m| > N`.
    pub fn coefficient(&self, m: &MultiIndex) -> Option<&[Complex64]> {
        let i = self.space.order.index_of(m)?;
        Some(&self.coeffs[i * self.space.d..(i + 1) * self.space.d])
    }

    fn check_space(&self, other: &Element) -> Result<(), ElementError> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(ElementError::SpaceMismatch)
        }
    }

    /// `⟨self, other⟩ = Σ_m ⟨a_m, b_m⟩_E`, linear in the first argument.
    pub fn inner(&self, other: &Element) -> Result<Complex64, ElementError> {
        self.check_space(other)?;
        Ok(self.dot(other))
    }

    pub(crate) fn dot(&self, other: &Element) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// Squared norm of the homogeneous degree-`k` part.
    pub fn block_norm_sqr(&self, k: usize) -> f64 {
        self.coeffs[self.space.block(k)]
            .iter()
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// Degree of the lowest nonvanishing homogeneous part, with blocks below
    /// `DEFAULT_DROP * ‖f‖` treated as absent.
    pub fn ord(&self) -> Valuation {
        self.ord_with(DEFAULT_DROP)
    }

    pub fn ord_with(&self, drop: f64) -> Valuation {
        let norm = self.norm();
        if norm == 0.0 {
            return Valuation::Infinite;
        }
        let cut = drop * norm;
        (0..=self.space.max_degree())
            .find(|&k| self.block_norm_sqr(k).sqrt() > cut)
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    /// Highest degree whose block is above the drop tolerance.
    pub fn support_degree(&self) -> Option<usize> {
        let norm = self.norm();
        if norm == 0.0 {
            return None;
        }
        let cut = DEFAULT_DROP * norm;
        (0..=self.space.max_degree())
            .rev()
            .find(|&k| self.block_norm_sqr(k).sqrt() > cut)
    }

    /// The ambient projection `P_k` onto homogeneous degree `k`.
    pub fn degree_block(&self, k: usize) -> Element {
        let mut out = Element::zero(&self.space);
        let r = self.space.block(k);
        out.coeffs[r.clone()].copy_from_slice(&self.coeffs[r]);
        out
    }

    /// Copy with every coefficient of degree `< k` set to zero.
    pub fn mask_below(&self, k: usize) -> Element {
        let mut out = self.clone();
        for c in &mut out.coeffs[self.space.below(k)] {
            *c = Complex64::new(0.0, 0.0);
        }
        out
    }

    pub fn scale(&self, lambda: Complex64) -> Element {
        Element {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * lambda).collect(),
            tail: self.tail * lambda.norm(),
        }
    }

    /// `self += lambda * other`, tracking the tail bound.
    pub(crate) fn axpy(&mut self, lambda: Complex64, other: &Element) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += lambda * b;
        }
        self.tail += lambda.norm() * other.tail;
    }

    pub fn sub(&self, other: &Element) -> Result<Element, ElementError> {
        self.check_space(other)?;
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other);
        Ok(out)
    }

    pub fn add(&self, other: &Element) -> Result<Element, ElementError> {
        self.check_space(other)?;
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other);
        Ok(out)
    }

    /// Multiplication by the monomial `z^m`, truncated at degree `N`.
    pub fn mul_monomial(&self, m: &MultiIndex) -> Result<Product, ElementError> {
        if m.nvars() != self.space.nvars() {
            return Err(ElementError::Arity {
                index: m.to_string(),
                got: m.nvars(),
                expected: self.space.nvars(),
            });
        }
        let d = self.space.d;
        let order = &self.space.order;
        let mut out = Element::zero(&self.space);
        let mut discarded_sqr = 0.0;
        for (i, src) in order.iter().enumerate() {
            let block = &self.coeffs[i * d..(i + 1) * d];
            let target = src.checked_add(m).ok().and_then(|t| order.index_of(&t));
            match target {
                Some(j) => out.coeffs[j * d..(j + 1) * d].copy_from_slice(block),
                None => discarded_sqr += block.iter().map(|c| c.norm_sqr()).sum::<f64>(),
            }
        }
        Ok(self.finish_product(out, discarded_sqr, 1.0))
    }

    /// Multiplication by the coordinate function `z_{var+1}`.
    pub fn shift(&self, var: usize) -> Product {
        let d = self.space.d;
        let mut out = Element::zero(&self.space);
        let mut discarded_sqr = 0.0;
        for i in 0..self.space.order.len() {
            let block = &self.coeffs[i * d..(i + 1) * d];
            match self.space.shift_ordinal(var, i) {
                Some(j) => out.coeffs[j * d..(j + 1) * d].copy_from_slice(block),
                None => discarded_sqr += block.iter().map(|c| c.norm_sqr()).sum::<f64>(),
            }
        }
        self.finish_product(out, discarded_sqr, 1.0)
    }

    fn finish_product(&self, mut out: Element, discarded_sqr: f64, multiplier_l1: f64) -> Product {
        let discarded = discarded_sqr.sqrt();
        // The discarded terms are zero in the quotient for polynomial data, but
        // are approximation error for elements that stand for infinite series.
        out.tail = if self.tail > 0.0 {
            discarded + multiplier_l1 * self.tail
        } else {
            0.0
        };
        let exact = discarded <= DEFAULT_DROP * self.norm() * multiplier_l1.max(1.0);
        Product {
            value: out,
            exact,
            discarded,
        }
    }

    /// Display helper listing the nonzero terms.
    pub fn terms(&self) -> Vec<(MultiIndex, Vec<Complex64>)> {
        let d = self.space.d;
        self.space
            .order
            .iter()
            .enumerate()
            .filter_map(|(i, m)| {
                let block = &self.coeffs[i * d..(i + 1) * d];
                block
                    .iter()
                    .any(|c| c.norm() > 0.0)
                    .then(|| (m.clone(), block.to_vec()))
            })
            .collect()
    }
}

/// `Σ λ_i f_i` over elements of one space.
pub fn linear_combine(pairs: &[(Complex64, &Element)]) -> Result<Element, ElementError> {
    let (_, first) = pairs.first().ok_or(ElementError::EmptyCombination)?;
    let mut out = Element::zero(first.space());
    for (lambda, f) in pairs {
        out.check_space(f)?;
        out.axpy(*lambda, f);
    }
    Ok(out)
}

/// Convolution product `p * f` with every term of degree `> N` discarded.
pub fn mul_poly(p: &Poly, f: &Element) -> Result<Product, ElementError> {
    let space = f.space();
    if p.nvars() != space.nvars() {
        return Err(ElementError::Arity {
            index: format!("{p}"),
            got: p.nvars(),
            expected: space.nvars(),
        });
    }
    let d = space.d;
    let order = &space.order;
    let mut out = Element::zero(space);
    let mut overflow: std::collections::BTreeMap<(MultiIndex, usize), Complex64> =
        std::collections::BTreeMap::new();
    for (pm, pc) in p.terms() {
        for (i, fm) in order.iter().enumerate() {
            let block = &f.coeffs[i * d..(i + 1) * d];
            if block.iter().all(|c| c.norm_sqr() == 0.0) {
                continue;
            }
            let target = pm.checked_add(fm).expect("arity checked");
            match order.index_of(&target) {
                Some(j) => {
                    for (slot, c) in out.coeffs[j * d..(j + 1) * d].iter_mut().zip(block) {
                        *slot += pc * c;
                    }
                }
                None => {
                    for (e, c) in block.iter().enumerate() {
                        *overflow.entry((target.clone(), e)).or_default() += pc * c;
                    }
                }
            }
        }
    }
    let discarded_sqr: f64 = overflow.values().map(|c| c.norm_sqr()).sum();
    let exact = match (p.max_degree(), f.support_degree()) {
        (Some(dp), Some(df)) => dp + df <= space.max_degree(),
        _ => true,
    };
    let mut product = f.finish_product(out, discarded_sqr, p.l1_norm());
    product.exact = exact;
    Ok(product)
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.len() == 1 {
                write!(f, "({:.6}{:+.6}i)*{m}", c[0].re, c[0].im)?;
            } else {
                let parts: Vec<String> = c
                    .iter()
                    .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                    .collect();
                write!(f, "[{}]*{m}", parts.join(", "))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Poly;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mono(space: &Arc<Space>, e: &[u32]) -> Element {
        Element::monomial(space, &MultiIndex::new(e.to_vec()), 0).unwrap()
    }

    #[test]
    fn inner_examples() {
        let s = Space::new(2, 1, 4).unwrap();
        let z1z2 = mono(&s, &[1, 1]);
        assert_eq!(z1z2.inner(&z1z2).unwrap(), c(1.0));
        assert_eq!(mono(&s, &[1, 0]).inner(&mono(&s, &[0, 1])).unwrap(), c(0.0));
        let f =
            linear_combine(&[(c(2.0), &mono(&s, &[1, 0])), (c(1.0), &mono(&s, &[0, 2]))]).unwrap();
        let g = mono(&s, &[1, 0]).scale(c(3.0));
        assert_eq!(f.inner(&g).unwrap(), c(6.0));
    }

    #[test]
    fn inner_rejects_foreign_space() {
        let a = Space::new(2, 1, 4).unwrap();
        let b = Space::new(2, 1, 5).unwrap();
        assert_eq!(
            Element::zero(&a).inner(&Element::zero(&b)),
            Err(ElementError::SpaceMismatch)
        );
    }

    #[test]
    fn ord_examples() {
        let s = Space::new(2, 1, 5).unwrap();
        let f = mono(&s, &[2, 0]).add(&mono(&s, &[1, 3])).unwrap();
        assert_eq!(f.ord(), Valuation::Finite(2));
        assert_eq!(Element::zero(&s).ord(), Valuation::Infinite);
        assert_eq!(mono(&s, &[0, 0]).scale(c(5.0)).ord(), Valuation::Finite(0));
    }

    #[test]
    fn linear_combine_examples() {
        let s = Space::new(2, 1, 3).unwrap();
        let (z1, z2) = (mono(&s, &[1, 0]), mono(&s, &[0, 1]));
        let sum = linear_combine(&[(c(1.0), &z1), (c(1.0), &z2)]).unwrap();
        assert_eq!(sum.ord(), Valuation::Finite(1));
        let cancel = linear_combine(&[(c(1.0), &z1), (c(-1.0), &z1)]).unwrap();
        assert!(cancel.is_zero());
        assert_eq!(cancel.ord(), Valuation::Infinite);
        let tripled = linear_combine(&[(c(3.0), &mono(&s, &[2, 0]))]).unwrap();
        assert_eq!(tripled.ord(), Valuation::Finite(2));
        assert_eq!(tripled.norm(), 3.0);
        assert!(linear_combine(&[]).is_err());
    }

    #[test]
    fn mul_poly_examples() {
        let s = Space::new(2, 1, 3).unwrap();
        let p = Poly::variable(2, 0);
        let prod = mul_poly(&p, &mono(&s, &[0, 1])).unwrap();
        assert!(prod.exact);
        assert_eq!(
            prod.value
                .coefficient(&MultiIndex::new(vec![1, 1]))
                .unwrap()[0],
            c(1.0)
        );
        assert_eq!(prod.value.ord(), Valuation::Finite(2));

        let edge = mul_poly(&p, &mono(&s, &[3, 0])).unwrap();
        assert!(!edge.exact);
        assert!(edge.value.is_zero());
        assert_eq!(edge.discarded, 1.0);
    }

    #[test]
    fn vector_valued_layout() {
        let s = Space::new(1, 3, 2).unwrap();
        let f = Element::from_terms(
            &s,
            [(MultiIndex::new(vec![1]), vec![c(1.0), c(0.0), c(2.0)])],
        )
        .unwrap();
        assert_eq!(f.norm_sqr(), 5.0);
        assert_eq!(f.ord(), Valuation::Finite(1));
        let shifted = f.shift(0);
        assert_eq!(
            shifted
                .value
                .coefficient(&MultiIndex::new(vec![2]))
                .unwrap(),
            &[c(1.0), c(0.0), c(2.0)]
        );
        assert!(Element::monomial(&s, &MultiIndex::new(vec![0]), 3).is_err());
        assert!(matches!(
            Element::from_terms(&s, [(MultiIndex::new(vec![3]), vec![c(1.0); 3])]),
            Err(ElementError::DegreeExceeded { .. })
        ));
    }

    fn random_element(space: &Arc<Space>, rng: &mut ChaCha8Rng) -> Element {
        let coeffs = (0..space.dim())
            .map(|_| {
                if rng.gen_bool(0.4) {
                    Complex64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Element::from_coeffs(space, coeffs).unwrap()
    }

    proptest! {
        #[test]
        fn valuation_axioms(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Space::new(2, 2, 4).unwrap();
            let f = random_element(&s, &mut rng);
            let g = random_element(&s, &mut rng);
            let sum = f.add(&g).unwrap();
            prop_assert!(sum.ord() >= f.ord().min(g.ord()));
            let lambda = Complex64::new(rng.gen_range(1.0..4.0), rng.gen_range(-2.0..2.0));
            prop_assert_eq!(f.scale(lambda).ord(), f.ord());
            prop_assert_eq!(f.ord().is_infinite(), f.is_zero());
        }

        #[test]
        fn cauchy_schwarz_and_symmetry(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Space::new(3, 1, 3).unwrap();
            let f = random_element(&s, &mut rng);
            let g = random_element(&s, &mut rng);
            let fg = f.inner(&g).unwrap();
            let gf = g.inner(&f).unwrap();
            prop_assert!((fg - gf.conj()).norm() <= 1e-12 * (1.0 + fg.norm()));
            prop_assert!(fg.norm() <= f.norm() * g.norm() * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn parseval_over_degree_blocks(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Space::new(2, 1, 5).unwrap();
            let f = random_element(&s, &mut rng);
            let blocks: f64 = (0..=5).map(|k| f.block_norm_sqr(k)).sum();
            prop_assert!((blocks - f.norm_sqr()).abs() <= 1e-12 * (1.0 + f.norm_sqr()));
        }

        #[test]
        fn strict_on_exact_products(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Space::new(2, 1, 6).unwrap();
            let f = random_element(&s, &mut rng).mask_below(2);
            let p = Poly::variable(2, rng.gen_range(0..2));
            let prod = mul_poly(&p, &f).unwrap();
            if prod.exact && !prod.value.is_zero() {
                prop_assert_eq!(prod.value.ord(), p.ord().plus(f.ord()));
            }
        }
    }
}
