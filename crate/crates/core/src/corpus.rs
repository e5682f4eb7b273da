//! Worked examples, the Blaschke factor, seeded random scenarios and the
//! upper-semicontinuity probe for `ord`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{gaussian_integer, Poly};
use crate::beurling::{self, TheoremVerdict};
use crate::decomposition::{decompose_subspace, DecompositionError};
use crate::elements::{Element, ElementError, Space, Valuation};
use crate::grading::MultiIndex;
use crate::properties::{CheckOptions, Verdict};
use crate::subspaces::{self, SubspaceBasis, SubspaceError};
use crate::tolerance::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("Blaschke parameter must satisfy 0 < |a| < 1, got |a| = {0}")]
    BlaschkeParameter(f64),
    #[error("unknown example `{0}` (expected one of ex6.2, ex6.7, ex7.4, eq3.17)")]
    UnknownExample(String),
    #[error("invalid parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClosureMode {
    /// The subspace spanned by the generators.
    #[default]
    Linear,
    /// The submodule generated by the generators.
    Module,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ActingAlgebra {
    /// `C[z]`, unital.
    #[default]
    #[serde(rename = "full")]
    Full,
    /// Polynomials vanishing at the origin, `R = R_1`.
    #[serde(rename = "vanishing-at-0")]
    VanishingAtZero,
}

/// Verdicts expected from (invariance, near-inner, full projection).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Expected {
    pub invariant: Verdict,
    pub near_inner: Verdict,
    pub full_projection: Verdict,
}

impl Expected {
    pub const fn new(invariant: Verdict, near_inner: Verdict, full_projection: Verdict) -> Self {
        Expected {
            invariant,
            near_inner,
            full_projection,
        }
    }

    pub fn as_triple(&self) -> (Verdict, Verdict, Verdict) {
        (self.invariant, self.near_inner, self.full_projection)
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub space: Arc<Space>,
    pub generators: Vec<Element>,
    pub closure_mode: ClosureMode,
    pub acting_algebra: ActingAlgebra,
    pub expected: Option<Expected>,
    /// Highest level checked; `None` means `N`.
    pub horizon: Option<usize>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub note: String,
    /// Non-fatal findings from parsing, e.g. generators truncated at degree `N`.
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        space: &Arc<Space>,
        generators: Vec<Element>,
        closure_mode: ClosureMode,
    ) -> Scenario {
        Scenario {
            name: name.into(),
            space: space.clone(),
            generators,
            closure_mode,
            acting_algebra: ActingAlgebra::Full,
            expected: None,
            horizon: None,
            tolerances: Tolerances::default(),
            seed: 0,
            note: String::new(),
            warnings: Vec::new(),
        }
    }

    pub fn options(&self) -> CheckOptions {
        CheckOptions {
            tolerances: self.tolerances,
            horizon: self.horizon,
            dense_samples: 0,
            seed: self.seed,
        }
    }

    /// The closed subspace described by the generators.
    pub fn subspace(&self) -> Result<SubspaceBasis, CorpusError> {
        let rank = self.tolerances.rank;
        Ok(match self.closure_mode {
            ClosureMode::Linear => subspaces::linear_closure(&self.space, &self.generators, rank)?,
            ClosureMode::Module => {
                subspaces::module_closure(&self.space, &self.generators, rank)?.basis
            }
        })
    }

    pub fn verify(&self) -> Result<TheoremVerdict, CorpusError> {
        let v = self.subspace()?;
        let d = decompose_subspace(&v, &self.tolerances)?;
        Ok(beurling::verify_decomposition(&d, &self.options()))
    }
}

/// Truncated power series of `B(z) = (a - z) / (1 - ā z)` in a one-variable
/// scalar space: `c_0 = a`, `c_k = -(1 - |a|²) ā^{k-1}`. The tail is the exact
/// norm `sqrt((1 - |a|²) |a|^{2N})` of the discarded terms.
pub fn blaschke_coeffs(space: &Arc<Space>, a: Complex64) -> Result<Element, CorpusError> {
    if space.nvars() != 1 || space.coeff_dim() != 1 {
        return Err(CorpusError::Parameters(
            "the Blaschke factor lives in a scalar one-variable space".into(),
        ));
    }
    let r = a.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(CorpusError::BlaschkeParameter(r));
    }
    let big_n = space.max_degree();
    let w = 1.0 - r * r;
    let mut coeffs = Vec::with_capacity(big_n + 1);
    coeffs.push(a);
    let mut power = Complex64::new(1.0, 0.0);
    for _ in 1..=big_n {
        coeffs.push(-power * w);
        power *= a.conj();
    }
    let tail = (w * r.powi(2 * big_n as i32)).sqrt();
    Ok(Element::from_coeffs(space, coeffs)?.with_tail(tail))
}

/// `B` at truncation degree `max_degree`.
pub fn blaschke(a: Complex64, max_degree: usize) -> Result<Element, CorpusError> {
    blaschke_coeffs(&Space::new(1, 1, max_degree)?, a)
}

/// Analytic bound on `|1 - ‖B_N‖²|`.
pub fn blaschke_tail_bound(a: Complex64, max_degree: usize) -> f64 {
    let r = a.norm();
    (1.0 - r * r) * r.powi(2 * max_degree as i32)
}

/// Exact magnitude `(1 - |a|²) |a|^{2N-k}` of the truncated `⟨B, z^k B⟩`,
/// `1 ≤ k ≤ N`; the untruncated product is zero because `B` is inner.
pub fn blaschke_shift_bound(a: Complex64, max_degree: usize, k: usize) -> f64 {
    let r = a.norm();
    (1.0 - r * r) * r.powi((2 * max_degree - k) as i32)
}

#[derive(Clone, Copy, Debug)]
pub struct ExampleParams {
    /// Blaschke parameter for the one-variable examples.
    pub a: Complex64,
    /// Truncation degree; each example has its own default.
    pub max_degree: Option<usize>,
    pub horizon: Option<usize>,
    /// Use `I = 1` instead of a Blaschke factor in the gap example.
    pub unit_inner: bool,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            a: Complex64::new(0.5, 0.0),
            max_degree: None,
            horizon: None,
            unit_inner: false,
        }
    }
}

pub const EXAMPLES: [&str; 4] = ["ex6.2", "ex6.7", "ex7.4", "eq3.17"];

fn mono(space: &Arc<Space>, e: Vec<u32>) -> Result<Element, CorpusError> {
    Ok(Element::monomial(space, &MultiIndex::new(e), 0)?)
}

/// Builds one of the named examples.
///
/// * `ex6.2`: the submodule of `H²(D²)` generated by `z1, z2`.
/// * `ex6.7`: the span of every monomial of positive degree except `z1 z2`.
/// * `ex7.4`: the span of `1, z, z² B, ..., z^{N-2} B`.
/// * `eq3.17`: the span of `I, z² I, z⁴ I, ...` up to degree `N / 2`.
pub fn example(name: &str, params: &ExampleParams) -> Result<Scenario, CorpusError> {
    use Verdict::{Fail, Pass};
    match name {
        "ex6.2" => {
            let big_n = params.max_degree.unwrap_or(4);
            let s = Space::new(2, 1, big_n)?;
            let gens = vec![mono(&s, vec![1, 0])?, mono(&s, vec![0, 1])?];
            let mut sc = Scenario::new(name, &s, gens, ClosureMode::Module);
            sc.expected = Some(Expected::new(Pass, Pass, Pass));
            sc.horizon = params.horizon;
            sc.note = "submodule generated by the coordinate functions".into();
            Ok(sc)
        }
        "ex6.7" => {
            let big_n = params.max_degree.unwrap_or(4);
            if big_n < 2 {
                return Err(CorpusError::Parameters("ex6.7 needs N >= 2".into()));
            }
            let s = Space::new(2, 1, big_n)?;
            let gens = s
                .order()
                .iter()
                .filter(|m| m.degree() >= 1 && m.exponents() != [1, 1])
                .map(|m| Element::monomial(&s, m, 0))
                .collect::<Result<Vec<_>, _>>()?;
            let mut sc = Scenario::new(name, &s, gens, ClosureMode::Linear);
            sc.expected = Some(Expected::new(Fail, Pass, Fail));
            sc.horizon = params.horizon;
            sc.note = "positive-degree monomials without z1*z2".into();
            Ok(sc)
        }
        "ex7.4" => {
            let big_n = params.max_degree.unwrap_or(24);
            if big_n < 4 {
                return Err(CorpusError::Parameters("ex7.4 needs N >= 4".into()));
            }
            let s = Space::new(1, 1, big_n)?;
            let b = blaschke_coeffs(&s, params.a)?;
            let mut gens = vec![mono(&s, vec![0])?, mono(&s, vec![1])?];
            for j in 2..=big_n - 2 {
                gens.push(b.mul_monomial(&MultiIndex::new(vec![j as u32]))?.value);
            }
            let mut sc = Scenario::new(name, &s, gens, ClosureMode::Linear);
            sc.expected = Some(Expected::new(Fail, Fail, Pass));
            sc.horizon = Some(params.horizon.unwrap_or(big_n - 2));
            sc.note = format!(
                "generators z^j B stop at j = N - 2; levels above the horizon {} are not checked",
                big_n - 2
            );
            Ok(sc)
        }
        "eq3.17" => {
            let big_n = params.max_degree.unwrap_or(24);
            let horizon = params.horizon.unwrap_or(big_n / 2);
            if horizon < 2 || horizon > big_n {
                return Err(CorpusError::Parameters(
                    "eq3.17 needs 2 <= horizon <= N".into(),
                ));
            }
            let s = Space::new(1, 1, big_n)?;
            let inner = if params.unit_inner {
                mono(&s, vec![0])?
            } else {
                blaschke_coeffs(&s, params.a)?
            };
            let gens = (0..=horizon / 2)
                .map(|j| {
                    Ok(inner
                        .mul_monomial(&MultiIndex::new(vec![2 * j as u32]))?
                        .value)
                })
                .collect::<Result<Vec<_>, CorpusError>>()?;
            let mut sc = Scenario::new(name, &s, gens, ClosureMode::Linear);
            sc.expected = Some(Expected::new(Fail, Pass, Fail));
            sc.horizon = Some(horizon);
            sc.note =
                format!("generators z^(2j) I with 2j <= {horizon}, checked up to level {horizon}");
            Ok(sc)
        }
        other => Err(CorpusError::UnknownExample(other.to_string())),
    }
}

/// All four examples with default parameters.
pub fn builtin_corpus() -> Vec<Scenario> {
    EXAMPLES
        .iter()
        .map(|name| example(name, &ExampleParams::default()).expect("builtin"))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct FuzzParams {
    pub n: usize,
    pub d: usize,
    pub max_degree: usize,
    pub max_generators: usize,
    pub invariant: bool,
}

/// Deterministic random scenario.
///
/// Invariant scenarios are module closures of one to `max_generators` random
/// polynomials of degree at most `N - 2` and are expected to pass all three
/// properties. Other scenarios are either the span of random polynomials or a
/// submodule with one near-homogeneous direction deleted; their verdicts are
/// left to the verifier.
pub fn random_scenario(seed: u64, p: &FuzzParams) -> Result<Scenario, CorpusError> {
    if p.max_degree < 2 || p.max_generators == 0 {
        return Err(CorpusError::Parameters(
            "need N >= 2 and at least one generator".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = Space::new(p.n, p.d, p.max_degree)?;
    let top = p.max_degree - 2;
    let random_gen = |rng: &mut ChaCha8Rng, lo: usize| -> Result<Element, CorpusError> {
        loop {
            let hi = rng.gen_range(lo..=top.max(lo));
            let mut g = Element::zero(&s);
            for c in 0..p.d {
                if p.d > 1 && rng.gen_bool(0.3) {
                    continue;
                }
                let poly = Poly::random(rng, p.n, lo..=hi, 0.35);
                g = g.add(&poly.to_element(&s, c)?)?;
            }
            if !g.is_zero() {
                return Ok(g);
            }
        }
    };
    let count = rng.gen_range(1..=p.max_generators);
    let mut sc = if p.invariant {
        let gens = (0..count)
            .map(|_| {
                let lo = rng
                    .gen_range(0..=top.min(2))
                    .max(if rng.gen_bool(0.9) { 1 } else { 0 });
                random_gen(&mut rng, lo)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut sc = Scenario::new(format!("fuzz-{seed}"), &s, gens, ClosureMode::Module);
        sc.expected = Some(Expected::new(Verdict::Pass, Verdict::Pass, Verdict::Pass));
        sc.note = "module closure of random polynomials".into();
        sc
    } else if rng.gen_bool(0.5) {
        let count = rng.gen_range(2..=p.max_generators.max(2) + 2);
        let gens = (0..count)
            .map(|_| {
                let lo = rng.gen_range(0..=top.min(2));
                random_gen(&mut rng, lo)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut sc = Scenario::new(format!("fuzz-{seed}"), &s, gens, ClosureMode::Linear);
        sc.note = "span of random polynomials".into();
        sc
    } else {
        let gens = (0..count)
            .map(|_| random_gen(&mut rng, 1))
            .collect::<Result<Vec<_>, _>>()?;
        let module = subspaces::module_closure(&s, &gens, Tolerances::default().rank)?.basis;
        let d = decompose_subspace(&module, &Tolerances::default())?;
        let levels: Vec<usize> = (1..d.components().len())
            .filter(|&k| !d.components()[k].is_empty())
            .collect();
        let mut kept = Vec::new();
        if let Some(&level) = levels.get(rng.gen_range(0..levels.len().max(1))) {
            let drop = rng.gen_range(0..d.components()[level].dim());
            for (k, w) in d.components().iter().enumerate() {
                for (i, v) in w.vectors().iter().enumerate() {
                    if !(k == level && i == drop) {
                        kept.push(v.clone());
                    }
                }
            }
        }
        let mut sc = Scenario::new(format!("fuzz-{seed}"), &s, kept, ClosureMode::Linear);
        sc.note = "submodule with one near-homogeneous direction deleted".into();
        sc
    };
    sc.seed = seed;
    Ok(sc)
}

/// One sequence `f_j → f` examined by the probe.
#[derive(Clone, Debug, Serialize)]
pub struct UscCase {
    pub kind: &'static str,
    pub ord_limit: Valuation,
    /// Largest `ord(f_j)` over the second half of the sequence.
    pub limsup: Valuation,
    /// `ord(f_j)` for the last term.
    pub last: Valuation,
}

#[derive(Clone, Debug, Serialize)]
pub struct UscReport {
    pub sequences: usize,
    pub limsup_violations: usize,
    /// Sequences along which `ord` drops strictly in the limit.
    pub strict_witnesses: usize,
    pub first_strict: Option<UscCase>,
}

const USC_LENGTH: usize = 40;

fn probe_sequence(kind: &'static str, f: &Element, g: &Element, perturb: bool) -> UscCase {
    let ord_limit = f.ord();
    let terms: Vec<Valuation> = (1..=USC_LENGTH)
        .map(|j| {
            let t = Complex64::new(1.0 / j as f64, 0.0);
            let fj = if perturb {
                f.add(&g.scale(t)).expect("one space")
            } else {
                f.scale(Complex64::new(1.0, 0.0) + t)
            };
            fj.ord()
        })
        .collect();
    let limsup = terms[USC_LENGTH / 2..]
        .iter()
        .copied()
        .max()
        .expect("nonempty");
    UscCase {
        kind,
        ord_limit,
        limsup,
        last: terms[USC_LENGTH - 1],
    }
}

/// Norm-convergent sequences `f + g / j` (with `ord g < ord f`) and
/// `f (1 + 1/j)`; checks `limsup ord(f_j) <= ord(f)` and counts strict drops.
pub fn usc_probe(space: &Arc<Space>, seed: u64) -> UscReport {
    usc_probe_with(space, seed, 100)
}

pub fn usc_probe_with(space: &Arc<Space>, seed: u64, count: usize) -> UscReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05c0);
    let mut cases = Vec::with_capacity(count + 1);
    let big_n = space.max_degree();
    // h_k = h + 1/k with h vanishing at the origin
    if big_n >= 2 {
        let mut e = vec![0u32; space.nvars()];
        e[0] = 2;
        let f = Element::monomial(space, &MultiIndex::new(e), 0).expect("in range");
        let one = Element::monomial(space, &MultiIndex::zeros(space.nvars()), 0).expect("in range");
        cases.push(probe_sequence("perturbation", &f, &one, true));
    }
    let random = |rng: &mut ChaCha8Rng, lo: usize| {
        let coeffs = (0..space.dim())
            .map(|i| {
                let k = space.order().degree_of(i / space.coeff_dim());
                if k >= lo && (k == lo || rng.gen_bool(0.4)) {
                    gaussian_integer(rng)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Element::from_coeffs(space, coeffs).expect("dimension")
    };
    while cases.len() < count {
        if rng.gen_bool(0.5) && big_n >= 1 {
            let lo_f = rng.gen_range(1..=big_n);
            let lo_g = rng.gen_range(0..lo_f);
            let f = random(&mut rng, lo_f);
            let g = random(&mut rng, lo_g);
            cases.push(probe_sequence("perturbation", &f, &g, true));
        } else {
            let lo = rng.gen_range(0..=big_n);
            let f = random(&mut rng, lo);
            cases.push(probe_sequence("scaling", &f, &f, false));
        }
    }
    let limsup_violations = cases.iter().filter(|c| c.limsup > c.ord_limit).count();
    let strict: Vec<&UscCase> = cases.iter().filter(|c| c.limsup < c.ord_limit).collect();
    UscReport {
        sequences: cases.len(),
        limsup_violations,
        strict_witnesses: strict.len(),
        first_strict: strict.first().map(|c| (*c).clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blaschke_examples() {
        let b = blaschke(Complex64::new(0.5, 0.0), 24).unwrap();
        let c = b.coeffs();
        assert_eq!(c[0], Complex64::new(0.5, 0.0));
        assert_eq!(c[1], Complex64::new(-0.75, 0.0));
        assert_eq!(c[2], Complex64::new(-0.375, 0.0));
        let bound = blaschke_tail_bound(Complex64::new(0.5, 0.0), 24);
        assert!((1.0 - b.norm_sqr()).abs() <= bound * (1.0 + 1e-9) + 1e-16);
        assert!((bound - 0.75 * 0.5f64.powi(48)).abs() < 1e-30);
        let mut zb = b.clone();
        for k in 1..=4 {
            zb = zb.shift(0).value;
            let got = b.inner(&zb).unwrap().norm();
            let exact = blaschke_shift_bound(Complex64::new(0.5, 0.0), 24, k);
            assert!(
                (got - exact).abs() <= 1e-12 * exact,
                "k={k}: {got} vs {exact}"
            );
        }
        assert!(blaschke(Complex64::new(1.0, 0.0), 4).is_err());
        assert!(blaschke(Complex64::new(0.0, 0.0), 4).is_err());
    }

    #[test]
    fn blaschke_matches_long_division() {
        // oracle: solve (1 - ā z) B = a - z for the coefficients recursively
        let a = Complex64::new(0.3, -0.4);
        let b = blaschke(a, 12).unwrap();
        let mut expect = vec![a];
        expect.push(Complex64::new(-1.0, 0.0) + a.conj() * expect[0]);
        for k in 2..=12 {
            let prev = expect[k - 1];
            expect.push(a.conj() * prev);
        }
        for (x, y) in b.coeffs().iter().zip(&expect) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn unknown_example() {
        assert!(matches!(
            example("ex9.9", &ExampleParams::default()),
            Err(CorpusError::UnknownExample(_))
        ));
    }

    #[test]
    fn random_scenarios_are_deterministic() {
        let p = FuzzParams {
            n: 2,
            d: 1,
            max_degree: 5,
            max_generators: 3,
            invariant: false,
        };
        for seed in 0..10 {
            let a = random_scenario(seed, &p).unwrap();
            let b = random_scenario(seed, &p).unwrap();
            assert_eq!(a.generators.len(), b.generators.len());
            for (x, y) in a.generators.iter().zip(&b.generators) {
                assert_eq!(x.coeffs(), y.coeffs());
            }
        }
    }

    #[test]
    fn usc_z_squared_plus_vanishing_constant() {
        let s = Space::new(1, 1, 4).unwrap();
        let f = Element::monomial(&s, &MultiIndex::new(vec![2]), 0).unwrap();
        let one = Element::monomial(&s, &MultiIndex::new(vec![0]), 0).unwrap();
        let case = probe_sequence("perturbation", &f, &one, true);
        assert_eq!(case.limsup, Valuation::Finite(0));
        assert_eq!(case.ord_limit, Valuation::Finite(2));

        let g = one.add(&f).unwrap();
        let case = probe_sequence("scaling", &g, &g, false);
        assert_eq!(case.last, Valuation::Finite(0));

        let rep = usc_probe(&s, 1);
        assert_eq!(rep.sequences, 100);
        assert_eq!(rep.limsup_violations, 0);
        assert!(rep.strict_witnesses >= 1);
    }
}
