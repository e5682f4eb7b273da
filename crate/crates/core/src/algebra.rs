//! The acting algebra `C[z1, ..., zn]` and a sample-based checker for the
//! valuation-algebra and valuation-module axioms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{self, UscReport};
use crate::elements::{mul_poly, Element, ElementError, Space, Valuation};
use crate::grading::{self, MultiIndex};
use crate::properties::Verdict;

/// A polynomial with complex coefficients and no degree cap.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly {
            nvars,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Poly {
        Poly::from_terms(nvars, [(MultiIndex::zeros(nvars), c)])
    }

    pub fn one(nvars: usize) -> Poly {
        Poly::constant(nvars, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(m: MultiIndex) -> Poly {
        let n = m.nvars();
        Poly::from_terms(n, [(m, Complex64::new(1.0, 0.0))])
    }

    /// The coordinate function `z_{var+1}`.
    pub fn variable(nvars: usize, var: usize) -> Poly {
        Poly::monomial(MultiIndex::unit(nvars, var))
    }

    /// Collects terms, summing repeated exponents and dropping exact zeros.
    ///
    /// Panics if an exponent has the wrong arity.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Poly
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut coeffs: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "exponent arity");
            *coeffs.entry(m).or_default() += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Poly { nvars, coeffs }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, m: &MultiIndex) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    /// Exact order of vanishing: the lowest degree in the support.
    pub fn ord(&self) -> Valuation {
        self.coeffs
            .keys()
            .map(|m| m.degree())
            .min()
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    /// Highest degree in the support, `None` for zero.
    pub fn max_degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|m| m.degree()).max()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars, "arity");
        Poly::from_terms(
            self.nvars,
            self.terms()
                .chain(other.terms())
                .map(|(m, c)| (m.clone(), *c)),
        )
    }

    pub fn scale(&self, lambda: Complex64) -> Poly {
        Poly::from_terms(
            self.nvars,
            self.terms().map(|(m, c)| (m.clone(), c * lambda)),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars, "arity");
        let mut terms = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                terms.push((a.checked_add(b).expect("arity"), ca * cb));
            }
        }
        Poly::from_terms(self.nvars, terms)
    }

    /// Embeds `p * e_component` into a truncated space; terms above `N` are
    /// rejected.
    pub fn to_element(
        &self,
        space: &Arc<Space>,
        component: usize,
    ) -> Result<Element, ElementError> {
        let d = space.coeff_dim();
        if component >= d {
            return Err(ElementError::Component { component, d });
        }
        Element::from_terms(
            space,
            self.terms().map(|(m, c)| {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[component] = *c;
                (m.clone(), v)
            }),
        )
    }

    /// Random polynomial with Gaussian-integer coefficients; each monomial of
    /// degree in `degrees` is present with probability `density`.
    pub fn random<R: Rng>(
        rng: &mut R,
        nvars: usize,
        degrees: std::ops::RangeInclusive<usize>,
        density: f64,
    ) -> Poly {
        let order = grading::enumerate(nvars, *degrees.end()).expect("nvars > 0");
        let mut terms = Vec::new();
        for k in degrees {
            for i in order.degree_range(k) {
                if rng.gen_bool(density) {
                    terms.push((order.get(i).clone(), gaussian_integer(rng)));
                }
            }
        }
        Poly::from_terms(nvars, terms)
    }
}

pub(crate) fn gaussian_integer<R: Rng>(rng: &mut R) -> Complex64 {
    loop {
        let c = Complex64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64);
        if c.norm_sqr() > 0.0 {
            return c;
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // graded order reads better than the map's lexicographic order
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by_key(|(m, _)| (m.degree(), std::cmp::Reverse((*m).clone())));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let body = match (c.re, c.im) {
                (re, 0.0) => fmt_real(re),
                (0.0, im) => format!("{}i", fmt_real(im)),
                (re, im) => format!("({}{:+}i)", fmt_real(re), im),
            };
            let sep = if i == 0 { "" } else { " + " };
            if m.degree() == 0 {
                write!(f, "{sep}{body}")?;
            } else if *c == Complex64::new(1.0, 0.0) {
                write!(f, "{sep}{m}")?;
            } else {
                write!(f, "{sep}{body}*{m}")?;
            }
        }
        Ok(())
    }
}

fn fmt_real(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Splits `p = lambda * 1 + r1` with `lambda` the constant term and
/// `ord(r1) >= 1`.
pub fn unital_split(p: &Poly) -> (Complex64, Poly) {
    let zero = MultiIndex::zeros(p.nvars);
    let lambda = p.coefficient(&zero);
    let r1 = Poly::from_terms(
        p.nvars,
        p.terms()
            .filter(|(m, _)| m.degree() > 0)
            .map(|(m, c)| (m.clone(), *c)),
    );
    (lambda, r1)
}

/// Seeded polynomials and elements on which the axioms are evaluated.
#[derive(Clone, Debug)]
pub struct AxiomSamples {
    pub seed: u64,
    pub polys: Vec<Poly>,
    pub elements: Vec<Element>,
}

impl AxiomSamples {
    /// `count` polynomials and `count` elements. Roughly one in twenty of each
    /// is zero and one in ten polynomials is a nonzero constant, so the unit and
    /// infinity branches are exercised.
    pub fn generate(space: &Arc<Space>, seed: u64, count: usize) -> AxiomSamples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = space.nvars();
        let big_n = space.max_degree();
        let half = (big_n / 2).max(1);
        let polys = (0..count)
            .map(|_| match rng.gen_range(0..20) {
                0 => Poly::zero(n),
                1 | 2 => Poly::constant(n, gaussian_integer(&mut rng)),
                _ => {
                    let lo = rng.gen_range(0..=half);
                    let hi = rng.gen_range(lo..=half);
                    nonzero(Poly::random(&mut rng, n, lo..=hi, 0.5), &mut rng, n, lo)
                }
            })
            .collect();
        let elements = (0..count)
            .map(|_| {
                if rng.gen_range(0..20) == 0 {
                    return Element::zero(space);
                }
                let lo = rng.gen_range(0..=big_n);
                let coeffs = (0..space.dim())
                    .map(|i| {
                        let k = space.order().degree_of(i / space.coeff_dim());
                        if k >= lo && rng.gen_bool(0.4) {
                            gaussian_integer(&mut rng)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect();
                Element::from_coeffs(space, coeffs).expect("dimension")
            })
            .collect();
        AxiomSamples {
            seed,
            polys,
            elements,
        }
    }
}

fn nonzero(p: Poly, rng: &mut ChaCha8Rng, n: usize, lo: usize) -> Poly {
    if !p.is_zero() {
        return p;
    }
    let mut e = vec![0u32; n];
    e[rng.gen_range(0..n)] = lo as u32;
    Poly::from_terms(n, [(MultiIndex::new(e), gaussian_integer(rng))])
}

/// Outcome of one axiom over the sample set.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub samples: usize,
    pub violations: usize,
    /// Largest violation seen: a degree shortfall for order axioms, a norm
    /// residual for algebraic identities.
    pub worst: f64,
    pub witness: Option<String>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub checks: Vec<AxiomCheck>,
    pub usc: UscReport,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass) && self.usc.limsup_violations == 0
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

struct Tally {
    axiom: &'static str,
    samples: usize,
    violations: usize,
    worst: f64,
    witness: Option<String>,
}

impl Tally {
    fn new(axiom: &'static str) -> Tally {
        Tally {
            axiom,
            samples: 0,
            violations: 0,
            worst: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, violation: f64, witness: impl FnOnce() -> String) {
        self.samples += 1;
        if violation > 0.0 {
            self.violations += 1;
            if violation > self.worst || self.witness.is_none() {
                self.worst = self.worst.max(violation);
                self.witness = Some(witness());
            }
        }
    }

    fn finish(self) -> AxiomCheck {
        AxiomCheck {
            axiom: self.axiom,
            samples: self.samples,
            violations: self.violations,
            worst: self.worst,
            witness: self.witness,
            verdict: if self.violations == 0 {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        }
    }
}

// Degree shortfall of `lhs >= rhs`, as a violation magnitude.
fn shortfall(lhs: Valuation, rhs: Valuation) -> f64 {
    match (lhs, rhs) {
        (_, _) if lhs >= rhs => 0.0,
        (Valuation::Finite(a), Valuation::Finite(b)) => (b - a) as f64,
        _ => f64::INFINITY,
    }
}

fn mismatch(lhs: Valuation, rhs: Valuation) -> f64 {
    shortfall(lhs, rhs).max(shortfall(rhs, lhs))
}

/// Runs every axiom over `AxiomSamples::generate(space, seed, count)` and
/// appends the upper-semicontinuity probe.
pub fn check_axioms(space: &Arc<Space>, seed: u64, count: usize) -> AxiomReport {
    let samples = AxiomSamples::generate(space, seed, count);
    check_axioms_on(space, &samples)
}

pub fn check_axioms_on(space: &Arc<Space>, samples: &AxiomSamples) -> AxiomReport {
    let n = space.nvars();
    let polys = &samples.polys;
    let elems = &samples.elements;
    let pair = |i: usize, len: usize| (i, (i * 7 + 3) % len);
    let one = Poly::one(n);
    let mut rng = ChaCha8Rng::seed_from_u64(samples.seed ^ 0x5eed);

    let mut unit = Tally::new("algebra.unit");
    let mut infinity = Tally::new("algebra.infinity");
    let mut strict = Tally::new("algebra.strict");
    let mut scaling = Tally::new("algebra.scaling");
    let mut ultra = Tally::new("algebra.ultrametric");
    let mut divisors = Tally::new("algebra.no_zero_divisors");
    let mut split = Tally::new("algebra.unital_split");
    for i in 0..polys.len() {
        let (p, q) = (&polys[i], &polys[pair(i, polys.len()).1]);
        let lambda = gaussian_integer(&mut rng);
        if p.max_degree() == Some(0) {
            unit.record(mismatch(p.ord(), Valuation::Finite(0)), || format!("{p}"));
        }
        let inf_ok = p.ord().is_infinite() == p.is_zero();
        infinity.record(if inf_ok { 0.0 } else { 1.0 }, || format!("{p}"));
        let pq = p.mul(q);
        strict.record(mismatch(pq.ord(), p.ord().plus(q.ord())), || {
            format!("r = {p}, s = {q}")
        });
        scaling.record(mismatch(p.scale(lambda).ord(), p.ord()), || {
            format!("{lambda} * {p}")
        });
        ultra.record(shortfall(p.add(q).ord(), p.ord().min(q.ord())), || {
            format!("r = {p}, s = {q}")
        });
        let zd = pq.is_zero() && !p.is_zero() && !q.is_zero();
        divisors.record(if zd { 1.0 } else { 0.0 }, || format!("r = {p}, s = {q}"));
        let (c, r1) = unital_split(p);
        let rebuilt = Poly::constant(n, c).add(&r1);
        let diff = rebuilt.add(&p.scale(Complex64::new(-1.0, 0.0))).l1_norm();
        let low = shortfall(r1.ord(), Valuation::Finite(1));
        split.record(diff.max(low), || format!("{p}"));
    }
    unit.record(mismatch(one.ord(), Valuation::Finite(0)), || "1".into());

    let mut m_inf = Tally::new("module.infinity");
    let mut m_scale = Tally::new("module.scaling");
    let mut m_ultra = Tally::new("module.ultrametric");
    let mut m_action = Tally::new("module.action_bound");
    let mut m_strict = Tally::new("module.strict_on_exact");
    let mut m_unit = Tally::new("module.unit_acts");
    let mut m_assoc = Tally::new("module.associative");
    let mut m_distrib = Tally::new("module.distributive");
    for i in 0..elems.len() {
        let (f, g) = (&elems[i], &elems[pair(i, elems.len()).1]);
        let (r, s) = (&polys[i % polys.len()], &polys[(i * 5 + 1) % polys.len()]);
        let lambda = gaussian_integer(&mut rng);
        let inf_ok = f.ord().is_infinite() == f.is_zero();
        m_inf.record(if inf_ok { 0.0 } else { 1.0 }, || format!("{f}"));
        m_scale.record(mismatch(f.scale(lambda).ord(), f.ord()), || {
            format!("{lambda} * {f}")
        });
        let sum = f.add(g).expect("one space");
        m_ultra.record(shortfall(sum.ord(), f.ord().min(g.ord())), || {
            format!("f = {f}, g = {g}")
        });
        let rf = mul_poly(r, f).expect("arity");
        m_action.record(shortfall(rf.value.ord(), r.ord().plus(f.ord())), || {
            format!("r = {r}, f = {f}")
        });
        if rf.exact {
            m_strict.record(mismatch(rf.value.ord(), r.ord().plus(f.ord())), || {
                format!("r = {r}, f = {f}")
            });
        }
        let one_f = mul_poly(&one, f).expect("arity").value;
        m_unit.record(one_f.sub(f).expect("one space").norm(), || format!("{f}"));
        let lhs = mul_poly(&r.mul(s), f).expect("arity").value;
        let rhs = mul_poly(r, &mul_poly(s, f).expect("arity").value)
            .expect("arity")
            .value;
        m_assoc.record(lhs.sub(&rhs).expect("one space").norm(), || {
            format!("r = {r}, s = {s}, f = {f}")
        });
        let lhs = mul_poly(&r.add(s), f).expect("arity").value;
        let rhs = rf
            .value
            .add(&mul_poly(s, f).expect("arity").value)
            .expect("one space");
        m_distrib.record(lhs.sub(&rhs).expect("one space").norm(), || {
            format!("r = {r}, s = {s}, f = {f}")
        });
    }

    let checks = [
        unit, infinity, strict, scaling, ultra, divisors, split, m_inf, m_scale, m_ultra, m_action,
        m_strict, m_unit, m_assoc, m_distrib,
    ]
    .into_iter()
    .map(Tally::finish)
    .collect();
    AxiomReport {
        seed: samples.seed,
        checks,
        usc: corpus::usc_probe(space, samples.seed),
    }
}
