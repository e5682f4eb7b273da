//! Property checkers: near-inner subspaces and decompositions (weak and full
//! forms), the full projection property, and `R_1`-invariance.
//!
//! The quantifier over `r ∈ R_1` is reduced to the monomials `z^α` with
//! `1 <= |α| <= H` (the polynomial valuation is strict), optionally augmented
//! with random dense polynomials. The quantifier over `g ∈ V` is eliminated
//! exactly: the admissible points `rh + g` form an affine space whose
//! directions are orthogonal to the component under test, so one least-squares
//! representative decides each triple.
//!
//! Every triple yields a violation `v`, an uncertainty `u` (a bound on how far
//! truncation can move `v`) and a scale `s = max(‖rh‖, ‖g‖, 1)`. A triple fails
//! when `v - u > fail * s`, is skipped when `u` is too large to separate the
//! pass and fail thresholds, passes when `v <= tol * s + u`, and otherwise
//! lands in the inconclusive band.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Poly;
use crate::decomposition::GradedDecomposition;
use crate::elements::{mul_poly, Element, Valuation};
use crate::grading::MultiIndex;
use crate::linalg::{self, CMatrix, CVector};
use crate::subspaces::SubspaceBasis;
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyId {
    NearInnerSubspace,
    WeakNearInner,
    NearInner,
    FullProjection,
    StrictFullProjection,
    Invariant,
    GeneratorCriterion,
    UnitalLift,
}

impl PropertyId {
    pub fn name(self) -> &'static str {
        match self {
            PropertyId::NearInnerSubspace => "near-inner-subspace",
            PropertyId::WeakNearInner => "weak-near-inner",
            PropertyId::NearInner => "near-inner",
            PropertyId::FullProjection => "full-projection",
            PropertyId::StrictFullProjection => "strict-full-projection",
            PropertyId::Invariant => "invariant",
            PropertyId::GeneratorCriterion => "generator-criterion",
            PropertyId::UnitalLift => "unital-lift",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            PropertyId::NearInnerSubspace,
            PropertyId::WeakNearInner,
            PropertyId::NearInner,
            PropertyId::FullProjection,
            PropertyId::StrictFullProjection,
            PropertyId::Invariant,
            PropertyId::GeneratorCriterion,
            PropertyId::UnitalLift,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

/// A checked triple whose violation was not below the pass threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    /// The multiplier; `None` for structural checks that involve no `r`.
    pub r: Option<Poly>,
    /// Level of the component containing `h`, when `h` is a component vector.
    pub k: Option<usize>,
    /// Level of the component tested against.
    pub m: Option<usize>,
    /// Index of `h` in the basis of `W_k` (or of `V`).
    pub h_index: usize,
    pub violation: f64,
    pub uncertainty: f64,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    key: (usize, usize, usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: PropertyId,
    pub verdict: Verdict,
    /// Triples with a decisive violation, sorted by `(k, m, r, h)`.
    pub witnesses: Vec<Witness>,
    /// Triples in the band between the pass and fail thresholds.
    pub marginal: Vec<Witness>,
    /// Triples whose truncation uncertainty was too large to decide.
    pub boundary_skips: usize,
    /// Triples with no admissible `g`; these hold vacuously.
    pub vacuous: usize,
    pub triples: usize,
    pub horizon: usize,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Largest decisive violation relative to its scale.
    pub fn worst(&self) -> Option<&Witness> {
        self.witnesses
            .iter()
            .max_by(|a, b| (a.violation / a.scale).total_cmp(&(b.violation / b.scale)))
    }
}

/// Options shared by all checkers.
#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub tolerances: Tolerances,
    /// Highest level and multiplier degree enumerated; `None` means `N`.
    pub horizon: Option<usize>,
    /// Number of random dense multipliers `r ∈ R_1` added to the monomials.
    pub dense_samples: usize,
    pub seed: u64,
}

impl CheckOptions {
    pub fn with_tolerances(tolerances: Tolerances) -> Self {
        CheckOptions {
            tolerances,
            ..CheckOptions::default()
        }
    }

    pub(crate) fn horizon_for(&self, max_degree: usize) -> usize {
        self.horizon.unwrap_or(max_degree).min(max_degree)
    }
}

enum Outcome {
    Pass,
    Band,
    Skip,
    Fail,
}

fn classify(v: f64, u: f64, s: f64, pass_tol: f64, t: &Tolerances) -> Outcome {
    if v - u > t.fail * s {
        Outcome::Fail
    } else if u > 0.5 * (t.fail - pass_tol) * s {
        Outcome::Skip
    } else if v <= pass_tol * s + u {
        Outcome::Pass
    } else {
        Outcome::Band
    }
}

#[derive(Default)]
struct Tally {
    witnesses: Vec<Witness>,
    marginal: Vec<Witness>,
    skips: usize,
    vacuous: usize,
    triples: usize,
}

struct Triple {
    r: Option<(usize, Poly)>,
    k: Option<usize>,
    m: Option<usize>,
    h_index: usize,
}

impl Tally {
    fn record(&mut self, t: &Triple, v: f64, u: f64, s: f64, pass_tol: f64, tol: &Tolerances) {
        self.triples += 1;
        let outcome = classify(v, u, s, pass_tol, tol);
        let slot = match outcome {
            Outcome::Pass => return,
            Outcome::Skip => {
                self.skips += 1;
                return;
            }
            Outcome::Fail => &mut self.witnesses,
            Outcome::Band => &mut self.marginal,
        };
        let (r_key, r) = match &t.r {
            Some((key, p)) => (*key, Some(p.clone())),
            None => (usize::MAX, None),
        };
        slot.push(Witness {
            r,
            k: t.k,
            m: t.m,
            h_index: t.h_index,
            violation: v,
            uncertainty: u,
            scale: s,
            detail: None,
            key: (
                t.k.unwrap_or(usize::MAX),
                t.m.unwrap_or(usize::MAX),
                r_key,
                t.h_index,
            ),
        });
    }

    fn vacuous(&mut self) {
        self.triples += 1;
        self.vacuous += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.witnesses.extend(other.witnesses);
        self.marginal.extend(other.marginal);
        self.skips += other.skips;
        self.vacuous += other.vacuous;
        self.triples += other.triples;
        self
    }

    fn finish(
        mut self,
        property: PropertyId,
        horizon: usize,
        tolerances: &Tolerances,
        notes: Vec<String>,
    ) -> PropertyReport {
        self.witnesses.sort_by_key(|w| w.key);
        self.marginal.sort_by_key(|w| w.key);
        let decided = self.triples.saturating_sub(self.vacuous);
        let skip_fraction = if decided == 0 {
            0.0
        } else {
            self.skips as f64 / decided as f64
        };
        let verdict = if !self.witnesses.is_empty() {
            Verdict::Fail
        } else if !self.marginal.is_empty() || skip_fraction > tolerances.max_skip_fraction {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        PropertyReport {
            property,
            verdict,
            witnesses: self.witnesses,
            marginal: self.marginal,
            boundary_skips: self.skips,
            vacuous: self.vacuous,
            triples: self.triples,
            horizon,
            tolerances: *tolerances,
            notes,
        }
    }
}

/// Above this, rank decisions may have changed the grading itself and
/// first-order error estimates mean nothing.
const MAX_RHO: f64 = 1e-2;

/// First-order effect `δ ‖y‖ κ` of perturbing a matrix by `δ` on a solve
/// with amplification `κ`.
fn perturbation(defect: f64, size: f64, amplification: f64) -> f64 {
    let rho = defect * amplification;
    if rho >= MAX_RHO {
        f64::INFINITY
    } else {
        rho * size
    }
}

fn reduction_note() -> String {
    "r ranges over the monomials z^a with 1 <= |a| <= horizon; the valuation on polynomials is strict, so monomials decide the quantifier".into()
}

/// Multipliers `r ∈ R_1` enumerated by the checkers, keyed by position.
pub(crate) fn multipliers(nvars: usize, horizon: usize, opts: &CheckOptions) -> Vec<(usize, Poly)> {
    let order = crate::grading::enumerate(nvars, horizon).expect("nvars > 0");
    let mut out: Vec<(usize, Poly)> = order
        .iter()
        .filter(|m| m.degree() >= 1)
        .cloned()
        .map(Poly::monomial)
        .enumerate()
        .collect();
    if opts.dense_samples > 0 && horizon >= 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let base = out.len();
        for i in 0..opts.dense_samples {
            let mut p = Poly::random(&mut rng, nvars, 1..=horizon, 0.5);
            if p.is_zero() {
                p = Poly::variable(nvars, i % nvars);
            }
            out.push((base + i, p));
        }
    }
    out
}

fn multiply(r: &Poly, h: &Element) -> Element {
    let mut terms = r.terms();
    if let (Some((m, c)), None) = (terms.next(), terms.next()) {
        if *c == Complex64::new(1.0, 0.0) {
            return h.mul_monomial(m).expect("arity").value;
        }
    }
    mul_poly(r, h).expect("arity").value
}

fn column(x: &Element, rows: Range<usize>) -> CVector {
    CVector::from_column_slice(&x.coeffs()[rows])
}

fn tails_norm(b: &SubspaceBasis) -> f64 {
    b.vectors()
        .iter()
        .map(|w| w.tail().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Least-squares elimination of `g` for the constraint "all coefficients of
/// degree `< t` of `x + g` vanish", with `g` restricted to `W_0 ⊕ ... ⊕
/// W_{t-1}`. That sum is a complement of `V_t` in `V`, so the solution is the
/// unique admissible `g` orthogonal to `V_t`.
struct Reduction {
    low: Range<usize>,
    range: CMatrix,
    pinv: CMatrix,
    e: CMatrix,
    offsets: Vec<usize>,
    e_tails: Vec<f64>,
    // 1 + 1/σ_min of the low block: amplification of a perturbation of E
    amplification: f64,
    // kept singular values too close to the rank cutoff
    defect: f64,
}

impl Reduction {
    fn new(d: &GradedDecomposition, t: usize, rank_tol: f64) -> Reduction {
        let space = d.subspace().space();
        let comps = &d.components()[..t.min(d.components().len())];
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut e_tails = Vec::new();
        for w in comps {
            for v in w.vectors() {
                cols.push(v);
                e_tails.push(v.tail());
            }
            offsets.push(cols.len());
        }
        let mut e = CMatrix::zeros(space.dim(), cols.len());
        for (j, v) in cols.iter().enumerate() {
            e.set_column(j, &CVector::from_column_slice(v.coeffs()));
        }
        let low = space.below(t);
        let a = e.rows(low.start, low.len()).into_owned();
        let (u, s, v) = linalg::sorted_svd(&a);
        let rank = s.iter().take_while(|&&x| x > rank_tol).count();
        let range = u.columns(0, rank).into_owned();
        let mut pinv = CMatrix::zeros(a.ncols(), a.nrows());
        for (j, &sj) in s.iter().enumerate().take(rank) {
            pinv += v.column(j) * u.column(j).adjoint() / Complex64::new(sj, 0.0);
        }
        let amplification = if rank == 0 {
            1.0
        } else {
            1.0 + 1.0 / s[rank - 1]
        };
        let defect = linalg::rank_defect(&s.as_slice()[..rank], rank, rank_tol);
        Reduction {
            defect,
            low,
            range,
            pinv,
            e,
            offsets,
            e_tails,
            amplification,
        }
    }

    /// `(a, infeasibility)` with `g = E a`; `a` is `None` when no correction
    /// is needed.
    fn solve(&self, x: &Element) -> (Option<CVector>, f64) {
        let lx = column(x, self.low.clone());
        if lx.iter().all(|c| c.norm_sqr() == 0.0) {
            return (None, 0.0);
        }
        let proj = &self.range * (self.range.adjoint() * &lx);
        let infeasible = (&lx - proj).norm();
        let a = -(&self.pinv * &lx);
        (Some(a), infeasible)
    }

    fn tail_of(&self, a: &CVector) -> f64 {
        a.iter().zip(&self.e_tails).map(|(c, t)| c.norm() * t).sum()
    }
}

/// Per-level data shared by the decomposition checkers.
struct Levels<'a> {
    d: &'a GradedDecomposition,
    horizon: usize,
    rs: Vec<(usize, Poly)>,
    reductions: Vec<Reduction>,
    // adjoint of the basis matrix of W_m
    w_adj: Vec<CMatrix>,
    w_tails: Vec<f64>,
    // orthonormal basis of the column space of P_m(W_m)
    block_range: Vec<CMatrix>,
    // 1 / σ_min(P_m(W_m))
    block_amplification: Vec<f64>,
    // rank defect of the decomposition
    defect: f64,
    // defect times the worst amplification over all levels
    global_rho: f64,
    any_tail: bool,
}

impl<'a> Levels<'a> {
    fn new(d: &'a GradedDecomposition, opts: &CheckOptions, need_reductions: bool) -> Levels<'a> {
        let space = d.subspace().space();
        let big_n = space.max_degree();
        let horizon = opts.horizon_for(big_n);
        let tol = &opts.tolerances;
        let reductions = if need_reductions {
            (0..=horizon + 1)
                .into_par_iter()
                .map(|t| Reduction::new(d, t, tol.rank))
                .collect()
        } else {
            Vec::new()
        };
        let comps = d.components();
        let w_adj = comps
            .iter()
            .map(|w| w.matrix(0..space.dim()).adjoint())
            .collect();
        let w_tails = comps.iter().map(tails_norm).collect();
        let (block_range, block_stats): (Vec<CMatrix>, Vec<(f64, f64)>) = comps
            .iter()
            .enumerate()
            .map(|(m, w)| {
                let b = w.matrix(space.block(m));
                let (u, s, _) = linalg::sorted_svd(&b);
                let rank = s.iter().take_while(|&&x| x > tol.rank).count();
                let amp = if rank == 0 { 0.0 } else { 1.0 / s[rank - 1] };
                let defect = linalg::rank_defect(&s.as_slice()[..rank], rank, tol.rank);
                (u.columns(0, rank).into_owned(), (amp, defect))
            })
            .unzip();
        let block_amplification: Vec<f64> = block_stats.iter().map(|b| b.0).collect();
        let defect = block_stats
            .iter()
            .map(|b| b.1)
            .chain(reductions.iter().map(|r| r.defect))
            .chain([d.rank_defect()])
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        let any_tail = d.subspace().vectors().iter().any(|v| v.tail() > 0.0);
        let global_rho = defect
            * reductions
                .iter()
                .map(|r| r.amplification)
                .chain(block_amplification.iter().copied())
                .fold(0.0, f64::max);
        Levels {
            d,
            horizon,
            rs: multipliers(space.nvars(), horizon, opts),
            reductions,
            w_adj,
            w_tails,
            block_range,
            global_rho,
            block_amplification,
            defect,
            any_tail,
        }
    }

    /// Every `(k, h_index, h)` with `h` a basis vector of `W_k`.
    fn component_vectors(&self) -> Vec<(usize, usize, &'a Element)> {
        self.d
            .components()
            .iter()
            .enumerate()
            .flat_map(|(k, w)| w.vectors().iter().enumerate().map(move |(i, h)| (k, i, h)))
            .collect()
    }

    /// Products `r h` that are not identically zero.
    fn products(&self, h: &Element) -> Vec<(usize, Element)> {
        self.rs
            .iter()
            .enumerate()
            .filter_map(|(i, (_, r))| {
                let x = multiply(r, h);
                (!x.is_zero() || x.tail() > 0.0).then_some((i, x))
            })
            .collect()
    }

    fn run<F>(&self, per_product: F) -> Tally
    where
        F: Fn(&mut Tally, usize, usize, &(usize, Poly), &Element) + Sync,
    {
        self.component_vectors()
            .into_par_iter()
            .map(|(k, i, h)| {
                let mut tally = Tally::default();
                for (ri, x) in self.products(h) {
                    per_product(&mut tally, k, i, &self.rs[ri], &x);
                }
                tally
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Tally::default(), Tally::merge)
    }

    /// Error from rank decisions on an element of norm `size`; infinite when
    /// the decomposition is too ill-conditioned to trust.
    fn rank_uncertainty(&self, size: f64) -> f64 {
        if self.global_rho >= MAX_RHO {
            f64::INFINITY
        } else {
            self.defect * size
        }
    }

    fn coords(&self, m: usize, x: &Element) -> CVector {
        &self.w_adj[m] * DVector::from_column_slice(x.coeffs())
    }
}

fn triple(r: &(usize, Poly), k: usize, m: usize, h_index: usize) -> Triple {
    Triple {
        r: Some((r.0, r.1.clone())),
        k: Some(k),
        m: Some(m),
        h_index,
    }
}

/// `W ⊥ R_1 W`: for each basis vector `w` and multiplier `r`, the projection
/// of `r w` onto `W` must vanish.
pub fn is_near_inner_subspace(w: &SubspaceBasis, opts: &CheckOptions) -> PropertyReport {
    let space = w.space();
    let horizon = opts.horizon_for(space.max_degree());
    let tol = &opts.tolerances;
    let rs = multipliers(space.nvars(), horizon, opts);
    let adj = w.matrix(0..space.dim()).adjoint();
    let tw = tails_norm(w);
    let tally = w
        .vectors()
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let mut tally = Tally::default();
            for r in &rs {
                let x = multiply(&r.1, h);
                if x.is_zero() && x.tail() == 0.0 {
                    continue;
                }
                let v = (&adj * DVector::from_column_slice(x.coeffs())).norm();
                let t = Triple {
                    r: Some((r.0, r.1.clone())),
                    k: None,
                    m: None,
                    h_index: i,
                };
                tally.record(&t, v, x.tail() * tw, x.norm().max(1.0), tol.orth, tol);
            }
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge);
    tally.finish(
        PropertyId::NearInnerSubspace,
        horizon,
        tol,
        vec![reduction_note()],
    )
}

/// Weak form: whenever `ord(r h) > m`, `r h ⊥ W_m`.
pub fn is_weakly_near_inner(d: &GradedDecomposition, opts: &CheckOptions) -> PropertyReport {
    let lv = Levels::new(d, opts, true);
    let tol = &opts.tolerances;
    let tally = lv.run(|tally, k, i, r, x| {
        let ord = x.ord_with(tol.drop);
        for m in 0..=lv.horizon {
            if d.components()[m].is_empty() || ord <= Valuation::Finite(m) {
                continue;
            }
            let v = lv.coords(m, x).norm();
            let u = x.tail() * lv.w_tails[m] + lv.rank_uncertainty(x.norm());
            tally.record(&triple(r, k, m, i), v, u, x.norm().max(1.0), tol.orth, tol);
        }
    });
    tally.finish(
        PropertyId::WeakNearInner,
        lv.horizon,
        tol,
        vec![reduction_note()],
    )
}

/// Near-inner decomposition: every admissible `r h + g` with
/// `ord(r h + g) > m` is orthogonal to `W_m`.
pub fn is_near_inner_decomposition(d: &GradedDecomposition, opts: &CheckOptions) -> PropertyReport {
    let lv = Levels::new(d, opts, true);
    let tol = &opts.tolerances;
    let mut tally = lv.run(|tally, k, i, r, x| {
        let ord = x.ord_with(tol.drop);
        let xnorm = x.norm();
        for m in 0..=lv.horizon {
            if d.components()[m].is_empty() {
                continue;
            }
            let red = &lv.reductions[m + 1];
            let coords = lv.coords(m, x);
            let (value, u, s) = if ord > Valuation::Finite(m) {
                (
                    coords.norm(),
                    x.tail() * lv.w_tails[m] + lv.rank_uncertainty(xnorm),
                    xnorm.max(1.0),
                )
            } else {
                let (a, infeasible) = red.solve(x);
                let a = a.expect("ord(x) <= m");
                if infeasible > tol.mem * xnorm.max(1.0) {
                    tally.vacuous();
                    continue;
                }
                let off = red.offsets[m];
                let mut total = coords;
                for (j, c) in total.iter_mut().enumerate() {
                    *c += a[off + j];
                }
                let tail_p = if lv.any_tail {
                    x.tail() + red.tail_of(&a)
                } else {
                    0.0
                };
                let rank_u = lv.rank_uncertainty(xnorm)
                    + perturbation(lv.defect, a.norm(), red.amplification);
                (
                    total.norm(),
                    tail_p * lv.w_tails[m] + rank_u,
                    xnorm.max(a.norm()).max(1.0),
                )
            };
            tally.record(&triple(r, k, m, i), value, u, s, tol.orth, tol);
        }
    });
    // directions of the admissible set: V_{m+1} must be orthogonal to W_m
    for m in 0..=lv.horizon {
        let w = &d.components()[m];
        let next = d.slice(m + 1);
        let mut worst: f64 = 0.0;
        for a in w.vectors() {
            for b in next.vectors() {
                worst = worst.max(a.dot(b).norm());
            }
        }
        let t = Triple {
            r: None,
            k: None,
            m: Some(m),
            h_index: 0,
        };
        tally.record(&t, worst, 0.0, 1.0, tol.orth, tol);
    }
    tally.finish(
        PropertyId::NearInner,
        lv.horizon,
        tol,
        vec![reduction_note()],
    )
}

/// Full projection property: whenever `ord(r h + g) >= m`, the degree-`m`
/// block of `r h + g` lies in `P_m(W_m)`.
pub fn has_full_projection(d: &GradedDecomposition, opts: &CheckOptions) -> PropertyReport {
    full_projection(d, opts, false)
}

/// Variant with the strict hypothesis `ord(r h + g) > m`, which always holds.
pub fn has_full_projection_strict(d: &GradedDecomposition, opts: &CheckOptions) -> PropertyReport {
    full_projection(d, opts, true)
}

fn full_projection(d: &GradedDecomposition, opts: &CheckOptions, strict: bool) -> PropertyReport {
    let lv = Levels::new(d, opts, true);
    let tol = &opts.tolerances;
    let space = d.subspace().space();
    let tally = lv.run(|tally, k, i, r, x| {
        let ord = x.ord_with(tol.drop).finite().unwrap_or(usize::MAX);
        let xnorm = x.norm();
        for m in 0..=lv.horizon {
            // with ord(x) > m the zero correction is admissible and the block is empty
            if ord > m {
                continue;
            }
            let t = if strict { m + 1 } else { m };
            let red = &lv.reductions[t];
            let block = space.block(m);
            let mut b = column(x, block.clone());
            let (a, infeasible) = red.solve(x);
            let mut s = xnorm.max(1.0);
            let mut u = lv.rank_uncertainty(xnorm);
            if let Some(a) = a {
                if infeasible > tol.mem * s {
                    tally.vacuous();
                    continue;
                }
                b += red.e.rows(block.start, block.len()) * &a;
                s = s.max(a.norm());
                u += perturbation(lv.defect, a.norm(), red.amplification);
            }
            let range = &lv.block_range[m];
            let v = (&b - range * (range.adjoint() * &b)).norm();
            u += perturbation(lv.defect, b.norm(), lv.block_amplification[m]);
            tally.record(&triple(r, k, m, i), v, u, s, tol.mem, tol);
        }
    });
    let property = if strict {
        PropertyId::StrictFullProjection
    } else {
        PropertyId::FullProjection
    };
    let mut notes = vec![reduction_note()];
    notes.push("hypothesis ord(rh + g) >= m".replace(">=", if strict { ">" } else { ">=" }));
    tally.finish(property, lv.horizon, tol, notes)
}

/// Membership of `x` in `V`: residual, uncertainty and scale.
pub(crate) fn membership(v: &SubspaceBasis, x: &Element) -> (f64, f64, f64) {
    let coords = v.coordinates(x).expect("one space");
    let mut proj = Element::zero(x.space());
    let mut u = x.tail();
    for (c, q) in coords.iter().zip(v.vectors()) {
        proj.axpy(*c, q);
        u += c.norm() * q.tail();
    }
    let residual = x.sub(&proj).expect("one space").norm();
    // the projection itself carries the tails of the basis
    (residual, u, x.norm().max(1.0))
}

/// `z_j V ⊆ V` for every coordinate function; degree-one multipliers generate
/// `R_1` as an algebra, so they decide invariance.
pub fn is_r1_invariant(v: &SubspaceBasis, opts: &CheckOptions) -> PropertyReport {
    let space = v.space();
    let n = space.nvars();
    let tol = &opts.tolerances;
    let tally = v
        .vectors()
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let mut tally = Tally::default();
            for j in 0..n {
                let x = h.shift(j).value;
                if x.is_zero() && x.tail() == 0.0 {
                    continue;
                }
                let (res, u, s) = membership(v, &x);
                let t = Triple {
                    r: Some((j, Poly::variable(n, j))),
                    k: None,
                    m: None,
                    h_index: i,
                };
                tally.record(&t, res, u, s, tol.mem, tol);
            }
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge);
    tally.finish(
        PropertyId::Invariant,
        space.max_degree(),
        tol,
        vec!["multipliers z_1..z_n generate R_1, so coordinate shifts decide invariance".into()],
    )
}

/// Cross-check of invariance through the components: `r W_k ⊆ V` for every
/// multiplier `r` and every `k`.
pub fn component_invariance(d: &GradedDecomposition, opts: &CheckOptions) -> PropertyReport {
    let lv = Levels::new(d, opts, false);
    let tol = &opts.tolerances;
    let v = d.subspace();
    let tally = lv.run(|tally, k, i, r, x| {
        let (res, u, s) = membership(v, x);
        let t = Triple {
            r: Some((r.0, r.1.clone())),
            k: Some(k),
            m: None,
            h_index: i,
        };
        tally.record(&t, res, u, s, tol.mem, tol);
    });
    tally.finish(
        PropertyId::GeneratorCriterion,
        lv.horizon,
        tol,
        vec![reduction_note()],
    )
}

/// `p V ⊆ V` for random full polynomials `p = λ + r_1`.
pub fn unital_lift(v: &SubspaceBasis, samples: usize, opts: &CheckOptions) -> PropertyReport {
    let space = v.space();
    let n = space.nvars();
    let horizon = opts.horizon_for(space.max_degree());
    let tol = &opts.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x0a11);
    let polys: Vec<Poly> = (0..samples)
        .map(|_| {
            let r1 = Poly::random(&mut rng, n, 1..=horizon.max(1), 0.4);
            let lambda = crate::algebra::gaussian_integer(&mut rng);
            Poly::constant(n, lambda).add(&r1)
        })
        .collect();
    let mut tally = Tally::default();
    for (pi, p) in polys.iter().enumerate() {
        for (i, h) in v.vectors().iter().enumerate() {
            let x = mul_poly(p, h).expect("arity").value;
            let (res, u, s) = membership(v, &x);
            let t = Triple {
                r: Some((pi, p.clone())),
                k: None,
                m: None,
                h_index: i,
            };
            tally.record(&t, res, u, s, tol.mem, tol);
        }
    }
    tally.finish(PropertyId::UnitalLift, horizon, tol, Vec::new())
}

/// Independent re-evaluation of a near-inner or full-projection witness from
/// raw coefficients: rebuilds `r h`, solves for the admissible `g` over the
/// whole of `V`, and measures the violation again.
pub fn reevaluate(d: &GradedDecomposition, property: PropertyId, w: &Witness) -> Option<f64> {
    let (r, k, m) = (w.r.as_ref()?, w.k?, w.m?);
    let h = d.components().get(k)?.vectors().get(w.h_index)?;
    let space = h.space();
    let x = mul_poly(r, h).ok()?.value;
    let v = d.subspace();
    let (t, comp) = match property {
        PropertyId::NearInner | PropertyId::WeakNearInner => (m + 1, true),
        PropertyId::FullProjection => (m, false),
        _ => return None,
    };
    let low = space.below(t);
    let q = v.matrix(low.clone());
    let lx = column(&x, low);
    let c = linalg::lstsq(&q, &(-lx), 1e-12);
    let mut p = x.clone();
    for (ci, vi) in c.iter().zip(v.vectors()) {
        p.axpy(*ci, vi);
    }
    let wm = d.components().get(m)?;
    if comp {
        Some(wm.project(&p).ok()?.norm())
    } else {
        let b = column(&p, space.block(m));
        let mat = wm.matrix(space.block(m));
        let y = linalg::lstsq(&mat, &b, 1e-12);
        Some((&b - mat * y).norm())
    }
}

/// Builds the component-vector multiplier pairs the synthesis layer iterates.
pub(crate) fn monomial_multipliers(nvars: usize, horizon: usize) -> Vec<MultiIndex> {
    crate::grading::enumerate(nvars, horizon)
        .expect("nvars > 0")
        .iter()
        .filter(|m| m.degree() >= 1)
        .cloned()
        .collect()
}
