//! Scenario files, reports and the command dispatcher behind the binary.
//!
//! Scenario files are JSON:
//!
//! ```json
//! {
//!   "version": 1,
//!   "space": { "n": 2, "d": 1, "N": 4 },
//!   "generators": [
//!     [ { "exponents": [1, 0], "coeffs": [[1, 0]] } ],
//!     [ { "exponents": [0, 1], "coeffs": [[1, 0]] } ]
//!   ],
//!   "closure_mode": "module",
//!   "acting_algebra": "full",
//!   "tolerances": { "mem": 1e-8 },
//!   "seed": 7
//! }
//! ```
//!
//! A generator is a list of terms, or `{ "terms": [...], "tail": t }` when it
//! stands for an infinite series whose discarded part has norm at most `t`.
//! Instead of `space` and `generators` a file may name a builtin example:
//! `"builtin": { "name": "ex7.4", "params": { "a": [0.5, 0], "N": 24 } }`.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{check_axioms, Poly};
use crate::beurling::{self, SynthesisError};
use crate::corpus::{
    self, ActingAlgebra, ClosureMode, CorpusError, ExampleParams, Expected, FuzzParams, Scenario,
};
use crate::decomposition::{analyze_lw, decompose_subspace, GradedDecomposition};
use crate::elements::{Element, Space};
use crate::grading::MultiIndex;
use crate::properties::{self, PropertyId, Verdict};
use crate::tolerance::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("schema violation at `{path}` (line {line}, column {column}): {message}")]
    Schema {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("generator {index}: {message}")]
    Generator { index: usize, message: String },
    #[error("unsupported scenario version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub exponents: Vec<u32>,
    pub coeffs: Vec<[f64; 2]>,
}

/// Serialized element: nonzero terms plus the truncation tail bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermsDump {
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub tail: f64,
}

impl TermsDump {
    pub fn from_element(e: &Element) -> TermsDump {
        TermsDump {
            terms: e
                .terms()
                .into_iter()
                .map(|(m, c)| TermSpec {
                    exponents: m.exponents().to_vec(),
                    coeffs: c.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
            tail: e.tail(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum GeneratorSpec {
    Terms(Vec<TermSpec>),
    Dump(TermsDump),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub max_degree: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[f64; 2]>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unit_inner: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    pub name: String,
    #[serde(default)]
    pub params: BuiltinParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSpec {
    pub invariant: Verdict,
    pub near_inner: Verdict,
    pub full_projection: Verdict,
}

/// The on-disk scenario document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_mode: Option<ClosureMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acting_algebra: Option<ActingAlgebra>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn schema_error(e: serde_path_to_error::Error<serde_json::Error>) -> InputError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    InputError::Schema {
        path,
        line: inner.line(),
        column: inner.column(),
        message: inner.to_string(),
    }
}

fn complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

/// Parses and validates a scenario document; defaults are filled in from
/// [`Tolerances::default`].
pub fn parse_scenario(document: &str) -> Result<Scenario, InputError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(schema_error)?;
    scenario_from_file(file)
}

pub fn scenario_from_file(file: ScenarioFile) -> Result<Scenario, InputError> {
    if file.version != SCHEMA_VERSION {
        return Err(InputError::Version(file.version));
    }
    let mut scenario = match (&file.builtin, &file.space, &file.generators) {
        (Some(b), None, None) => {
            let p = &b.params;
            let mut params = ExampleParams {
                max_degree: p.max_degree,
                horizon: p.horizon,
                unit_inner: p.unit_inner,
                ..ExampleParams::default()
            };
            if let Some(a) = p.a {
                params.a = complex(a);
            }
            corpus::example(&b.name, &params)?
        }
        (None, Some(space), Some(gens)) => {
            let s = Space::new(space.n, space.d, space.max_degree)
                .map_err(|e| InputError::Invalid(format!("space: {e}")))?;
            let generators = gens
                .iter()
                .enumerate()
                .map(|(index, raw)| parse_generator(&s, index, raw))
                .collect::<Result<Vec<_>, _>>()?;
            let mode = file.closure_mode.unwrap_or_default();
            let name = file.name.clone().unwrap_or_else(|| "scenario".into());
            let mut sc = Scenario::new(name, &s, generators, mode);
            for (index, g) in sc.generators.iter().enumerate() {
                if g.is_zero() {
                    return Err(InputError::Generator {
                        index,
                        message: "generator is zero".into(),
                    });
                }
                if mode == ClosureMode::Module && g.support_degree() == Some(space.max_degree) {
                    sc.warnings.push(format!(
                        "generator {index} reaches degree N = {}; its multiples are truncated",
                        space.max_degree
                    ));
                }
            }
            sc
        }
        (Some(_), _, _) => {
            return Err(InputError::Invalid(
                "`builtin` cannot be combined with `space` or `generators`".into(),
            ))
        }
        _ => {
            return Err(InputError::Invalid(
                "a scenario needs either `builtin` or both `space` and `generators`".into(),
            ))
        }
    };
    if let Some(name) = file.name {
        scenario.name = name;
    }
    if let Some(mode) = file.closure_mode {
        scenario.closure_mode = mode;
    }
    if let Some(acting) = file.acting_algebra {
        scenario.acting_algebra = acting;
    }
    if let Some(t) = file.tolerances {
        scenario.tolerances = t;
    }
    if let Some(seed) = file.seed {
        scenario.seed = seed;
    }
    if let Some(h) = file.horizon {
        if h > scenario.space.max_degree() {
            return Err(InputError::Invalid(format!(
                "horizon {h} exceeds N = {}",
                scenario.space.max_degree()
            )));
        }
        scenario.horizon = Some(h);
    }
    if let Some(e) = file.expected {
        scenario.expected = Some(Expected::new(e.invariant, e.near_inner, e.full_projection));
    }
    if let Some(note) = file.note {
        scenario.note = note;
    }
    Ok(scenario)
}

fn parse_generator(
    space: &std::sync::Arc<Space>,
    index: usize,
    raw: &Value,
) -> Result<Element, InputError> {
    let err = |message: String| InputError::Generator { index, message };
    let spec: GeneratorSpec = serde_json::from_value(raw.clone())
        .map_err(|_| err("expected a list of {exponents, coeffs} terms or {terms, tail}".into()))?;
    let (terms, tail) = match spec {
        GeneratorSpec::Terms(t) => (t, 0.0),
        GeneratorSpec::Dump(d) => (d.terms, d.tail),
    };
    if !(tail >= 0.0 && tail.is_finite()) {
        return Err(err(format!(
            "tail must be a finite nonnegative number, got {tail}"
        )));
    }
    let mut parsed = Vec::with_capacity(terms.len());
    for (ti, t) in terms.into_iter().enumerate() {
        if t.exponents.len() != space.nvars() {
            return Err(err(format!(
                "term {ti}: exponent arity {} does not match n = {}",
                t.exponents.len(),
                space.nvars()
            )));
        }
        if t.coeffs.len() != space.coeff_dim() {
            return Err(err(format!(
                "term {ti}: coefficient vector has length {}, expected d = {}",
                t.coeffs.len(),
                space.coeff_dim()
            )));
        }
        parsed.push((
            MultiIndex::new(t.exponents),
            t.coeffs.into_iter().map(complex).collect(),
        ));
    }
    Element::from_terms(space, parsed)
        .map(|e| e.with_tail(tail))
        .map_err(|e| err(e.to_string()))
}

/// Writes a scenario with explicit generators; parsing the result yields an
/// equivalent scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    let file = ScenarioFile {
        version: SCHEMA_VERSION,
        name: Some(s.name.clone()),
        space: Some(SpaceSpec {
            n: s.space.nvars(),
            d: s.space.coeff_dim(),
            max_degree: s.space.max_degree(),
        }),
        generators: Some(
            s.generators
                .iter()
                .map(|g| {
                    let dump = TermsDump::from_element(g);
                    if dump.tail == 0.0 {
                        serde_json::to_value(dump.terms)
                    } else {
                        serde_json::to_value(dump)
                    }
                    .expect("plain data")
                })
                .collect(),
        ),
        builtin: None,
        closure_mode: Some(s.closure_mode),
        acting_algebra: Some(s.acting_algebra),
        tolerances: Some(s.tolerances),
        seed: Some(s.seed),
        horizon: s.horizon,
        expected: s.expected.map(|e| ExpectedSpec {
            invariant: e.invariant,
            near_inner: e.near_inner,
            full_projection: e.full_projection,
        }),
        note: (!s.note.is_empty()).then(|| s.note.clone()),
    };
    serde_json::to_string_pretty(&file).expect("plain data")
}

#[derive(Debug, Error, PartialEq)]
#[error("cannot parse polynomial `{input}` at offset {offset}: {message}")]
pub struct PolyParseError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

/// Parses literals such as `z1*z2^2 + 3*z1 - (1+2i)*z2` or `z^3` (one variable).
pub fn parse_poly(input: &str, nvars: usize) -> Result<Poly, PolyParseError> {
    let mut p = PolyParser {
        input,
        chars: input
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect(),
        pos: 0,
        nvars,
    };
    let poly = p.sum()?;
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(poly)
}

struct PolyParser<'a> {
    input: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    nvars: usize,
}

impl PolyParser<'_> {
    fn error(&self, message: &str) -> PolyParseError {
        PolyParseError {
            input: self.input.to_string(),
            offset: self.chars.get(self.pos).map_or(self.input.len(), |c| c.0),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn sum(&mut self) -> Result<Poly, PolyParseError> {
        let mut acc = Poly::zero(self.nvars);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    1.0
                }
                Some('-') => {
                    self.pos += 1;
                    -1.0
                }
                _ if first => 1.0,
                _ => return Ok(acc),
            };
            first = false;
            let t = self.product()?;
            acc = acc.add(&t.scale(Complex64::new(sign, 0.0)));
        }
    }

    fn product(&mut self) -> Result<Poly, PolyParseError> {
        let mut acc = self.power()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Poly, PolyParseError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        let e: u32 = digits
            .parse()
            .map_err(|_| self.error("expected an exponent"))?;
        let mut out = Poly::one(self.nvars);
        for _ in 0..e {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Poly, PolyParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('z') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let var = if digits.is_empty() {
                    if self.nvars != 1 {
                        return Err(self.error("bare `z` is only allowed with one variable"));
                    }
                    0
                } else {
                    let k: usize = digits
                        .parse()
                        .map_err(|_| self.error("bad variable index"))?;
                    if k == 0 || k > self.nvars {
                        return Err(self.error("variable index out of range"));
                    }
                    k - 1
                };
                Ok(Poly::variable(self.nvars, var))
            }
            Some('i') => {
                self.pos += 1;
                Ok(Poly::constant(self.nvars, Complex64::new(0.0, 1.0)))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.' || c == 'e') {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let x: f64 = text.parse().map_err(|_| self.error("bad number"))?;
                let c = if self.peek() == Some('i') {
                    self.pos += 1;
                    Complex64::new(0.0, x)
                } else {
                    Complex64::new(x, 0.0)
                };
                Ok(Poly::constant(self.nvars, c))
            }
            _ => Err(self.error("expected a number, a variable or `(`")),
        }
    }
}

/// Parses `--h k,i`: basis vector `i` of component `W_k`.
pub fn parse_component_index(s: &str) -> Result<(usize, usize), InputError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [k, i] => match (k.parse(), i.parse()) {
            (Ok(k), Ok(i)) => Ok((k, i)),
            _ => Err(InputError::Invalid(format!("--h expects `k,i`, got `{s}`"))),
        },
        _ => Err(InputError::Invalid(format!("--h expects `k,i`, got `{s}`"))),
    }
}

/// Where the scenario comes from.
#[derive(Clone, Debug)]
pub enum Source {
    File(PathBuf),
    Builtin(String),
}

/// Command-line overrides applied on top of a scenario.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub degree: Option<usize>,
    pub a: Option<Complex64>,
    pub horizon: Option<usize>,
    pub tol_mem: Option<f64>,
    pub tol_orth: Option<f64>,
    pub seed: Option<u64>,
}

/// Seed sweep for `fuzz`.
#[derive(Clone, Debug)]
pub struct FuzzPlan {
    pub seeds: std::ops::Range<u64>,
    pub nvars: Vec<usize>,
    pub degrees: std::ops::RangeInclusive<usize>,
    pub dims: Vec<usize>,
    pub max_generators: usize,
}

impl Default for FuzzPlan {
    fn default() -> Self {
        FuzzPlan {
            seeds: 1..201,
            nvars: vec![1, 2, 3],
            degrees: 4..=8,
            dims: vec![1],
            max_generators: 3,
        }
    }
}

impl FuzzPlan {
    /// Parameters for one seed; even seeds are invariant.
    pub fn params(&self, seed: u64) -> FuzzParams {
        let mix = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
        let n = self.nvars[(mix % self.nvars.len() as u64) as usize];
        let span = (self.degrees.end() - self.degrees.start() + 1) as u64;
        let max_degree = self.degrees.start() + ((mix / 7) % span) as usize;
        let d = self.dims[((mix / 31) % self.dims.len() as u64) as usize];
        FuzzParams {
            n,
            d,
            max_degree,
            max_generators: self.max_generators,
            invariant: seed.is_multiple_of(2),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Command {
    Decompose,
    Check(PropertyId),
    Verify,
    Synthesize { r: String, h: (usize, usize) },
    Axioms { samples: usize },
    Fuzz(FuzzPlan),
    Corpus,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Check(_) => "check",
            Command::Verify => "verify",
            Command::Synthesize { .. } => "synthesize",
            Command::Axioms { .. } => "axioms",
            Command::Fuzz(_) => "fuzz",
            Command::Corpus => "corpus",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub source: Option<Source>,
    pub overrides: Overrides,
    pub timing: bool,
}

/// The result of one command: a JSON document plus a short human summary.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub summary: Vec<String>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub exit_code: i32,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

fn load(source: &Source, o: &Overrides) -> Result<Scenario, InputError> {
    let mut sc = match source {
        Source::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| InputError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            parse_scenario(&text)?
        }
        Source::Builtin(name) => {
            let mut params = ExampleParams {
                max_degree: o.degree,
                horizon: o.horizon,
                ..ExampleParams::default()
            };
            if let Some(a) = o.a {
                params.a = a;
            }
            corpus::example(name, &params)?
        }
    };
    sc.tolerances = sc.tolerances.with_env();
    if let Some(m) = o.tol_mem {
        sc.tolerances.mem = m;
    }
    if let Some(t) = o.tol_orth {
        sc.tolerances.orth = t;
    }
    if let Some(s) = o.seed {
        sc.seed = s;
    }
    if let (Source::File(_), Some(h)) = (source, o.horizon) {
        sc.horizon = Some(h.min(sc.space.max_degree()));
    }
    Ok(sc)
}

fn echo(sc: &Scenario) -> Value {
    json!({
        "name": sc.name,
        "n": sc.space.nvars(),
        "d": sc.space.coeff_dim(),
        "N": sc.space.max_degree(),
        "generators": sc.generators.len(),
        "closure_mode": sc.closure_mode,
        "acting_algebra": sc.acting_algebra,
        "horizon": sc.horizon,
        "tolerances": sc.tolerances,
        "expected": sc.expected,
        "note": sc.note,
        "warnings": sc.warnings,
    })
}

fn triple_string(t: (Verdict, Verdict, Verdict)) -> String {
    format!("({}, {}, {})", t.0, t.1, t.2)
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Decomposition(e) => Failure::Internal(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

struct Body {
    scenario: Option<Value>,
    seed: Option<u64>,
    summary: Vec<String>,
    result: Value,
    exit_code: i32,
}

/// Executes one command. Failures are reported in the document with exit
/// code 2 (bad input) or 3 (internal assertion).
pub fn run(inv: &Invocation) -> Report {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(|| dispatch(inv));
    let body = match outcome {
        Ok(Ok(b)) => b,
        Ok(Err(Failure::Input(m))) => error_body(EXIT_INPUT, m),
        Ok(Err(Failure::Internal(m))) => error_body(EXIT_INTERNAL, m),
        Err(p) => {
            let m = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "internal assertion".into());
            error_body(EXIT_INTERNAL, m)
        }
    };
    Report {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: inv.command.name(),
        scenario: body.scenario,
        seed: body.seed,
        summary: body.summary,
        result: body.result,
        timing_ms: inv.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        exit_code: body.exit_code,
    }
}

fn error_body(code: i32, message: String) -> Body {
    Body {
        scenario: None,
        seed: None,
        summary: vec![format!("error: {message}")],
        result: json!({ "error": message }),
        exit_code: code,
    }
}

fn need_scenario(inv: &Invocation) -> Result<Scenario, Failure> {
    match &inv.source {
        Some(s) => Ok(load(s, &inv.overrides)?),
        None => Err(Failure::Input(
            "this command needs --scenario or --builtin".into(),
        )),
    }
}

fn decomposition_of(sc: &Scenario) -> Result<GradedDecomposition, Failure> {
    let v = sc.subspace()?;
    decompose_subspace(&v, &sc.tolerances).map_err(|e| Failure::Internal(e.to_string()))
}

fn dispatch(inv: &Invocation) -> Result<Body, Failure> {
    match &inv.command {
        Command::Decompose => {
            let sc = need_scenario(inv)?;
            let d = decomposition_of(&sc)?;
            let levels: Vec<Value> = d
                .components()
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let lw = analyze_lw(w, k, &sc.tolerances);
                    json!({
                        "level": k,
                        "dim": w.dim(),
                        "gram_residual": w.gram_residual(),
                        "constant_ord": lw.constant_ord,
                        "injective": lw.injective,
                        "smallest_singular_value": lw.smallest_singular_value,
                        "basis": w.vectors().iter().map(TermsDump::from_element).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let dims = d.dims();
            Ok(Body {
                summary: vec![
                    format!("{}: dim V = {}", sc.name, d.subspace().dim()),
                    format!("component dims {dims:?}"),
                ],
                result: json!({
                    "dim": d.subspace().dim(),
                    "dims": dims,
                    "series_dims": d.series().iter().map(|s| s.dim()).collect::<Vec<_>>(),
                    "cross_orthogonality": d.cross_orthogonality(),
                    "levels": levels,
                }),
                scenario: Some(echo(&sc)),
                seed: Some(sc.seed),
                exit_code: EXIT_OK,
            })
        }
        Command::Check(property) => {
            let sc = need_scenario(inv)?;
            let d = decomposition_of(&sc)?;
            let opts = sc.options();
            let report = match property {
                PropertyId::NearInnerSubspace => {
                    properties::is_near_inner_subspace(d.subspace(), &opts)
                }
                PropertyId::WeakNearInner => properties::is_weakly_near_inner(&d, &opts),
                PropertyId::NearInner => properties::is_near_inner_decomposition(&d, &opts),
                PropertyId::FullProjection => properties::has_full_projection(&d, &opts),
                PropertyId::StrictFullProjection => {
                    properties::has_full_projection_strict(&d, &opts)
                }
                PropertyId::Invariant => properties::is_r1_invariant(d.subspace(), &opts),
                PropertyId::GeneratorCriterion => properties::component_invariance(&d, &opts),
                PropertyId::UnitalLift => properties::unital_lift(d.subspace(), 8, &opts),
            };
            Ok(Body {
                summary: vec![format!(
                    "{}: {} {} ({} witnesses, {} skipped of {} triples)",
                    sc.name,
                    property,
                    report.verdict,
                    report.witnesses.len(),
                    report.boundary_skips,
                    report.triples
                )],
                result: serde_json::to_value(&report).expect("plain data"),
                scenario: Some(echo(&sc)),
                seed: Some(sc.seed),
                exit_code: EXIT_OK,
            })
        }
        Command::Verify => {
            let sc = need_scenario(inv)?;
            let verdict = sc.verify()?;
            let got = verdict.triple();
            let mut summary = vec![format!(
                "{}: (invariant, near-inner, full-projection) = {}",
                sc.name,
                triple_string(got)
            )];
            let mut exit_code = EXIT_OK;
            if let Some(e) = sc.expected {
                if e.as_triple() != got {
                    summary.push(format!("expected {}", triple_string(e.as_triple())));
                    exit_code = EXIT_MISMATCH;
                }
            }
            match verdict.biconditional_holds {
                Some(true) => summary.push("biconditional holds".into()),
                Some(false) => {
                    summary.push("biconditional FAILS".into());
                    exit_code = EXIT_MISMATCH;
                }
                None => summary.push("abstained (inconclusive verdict)".into()),
            }
            Ok(Body {
                summary,
                result: serde_json::to_value(&verdict).expect("plain data"),
                scenario: Some(echo(&sc)),
                seed: Some(sc.seed),
                exit_code,
            })
        }
        Command::Synthesize { r, h } => {
            let sc = need_scenario(inv)?;
            let d = decomposition_of(&sc)?;
            let r = parse_poly(r, sc.space.nvars()).map_err(|e| Failure::Input(e.to_string()))?;
            let (k, i) = *h;
            let hv = d
                .component(k)
                .and_then(|w| w.vectors().get(i))
                .ok_or_else(|| Failure::Input(format!("W_{k} has no basis vector {i}")))?;
            let (summary, result) = match beurling::synthesize(&d, &r, hv) {
                Ok(trace) => (
                    vec![format!(
                        "{}: r = {r}, h = W_{k}[{i}], final residual {:.3e}",
                        sc.name, trace.final_residual
                    )],
                    json!({
                        "status": "ok",
                        "trace": trace,
                        "g_series": trace.g_series.iter().map(TermsDump::from_element).collect::<Vec<_>>(),
                    }),
                ),
                Err(SynthesisError::FullProjectionViolation { level, residual }) => (
                    vec![format!(
                        "{}: r = {r}, h = W_{k}[{i}], full projection violated at level {level}",
                        sc.name
                    )],
                    json!({ "status": "full-projection-violation", "level": level, "residual": residual }),
                ),
                Err(e) => return Err(Failure::Input(e.to_string())),
            };
            Ok(Body {
                summary,
                result,
                scenario: Some(echo(&sc)),
                seed: Some(sc.seed),
                exit_code: EXIT_OK,
            })
        }
        Command::Axioms { samples } => {
            let (space, seed, scenario) = match &inv.source {
                Some(s) => {
                    let sc = load(s, &inv.overrides)?;
                    (sc.space.clone(), sc.seed, Some(echo(&sc)))
                }
                None => {
                    let n = inv.overrides.degree.unwrap_or(6);
                    let space = Space::new(2, 1, n).map_err(|e| Failure::Input(e.to_string()))?;
                    (space, inv.overrides.seed.unwrap_or(0), None)
                }
            };
            let report = check_axioms(&space, seed, *samples);
            let failed: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| c.verdict != Verdict::Pass)
                .map(|c| c.axiom)
                .collect();
            let mut summary = vec![format!(
                "{} axioms over {} samples: {}",
                report.checks.len(),
                samples,
                if failed.is_empty() {
                    "all pass".to_string()
                } else {
                    format!("failing {failed:?}")
                }
            )];
            summary.push(format!(
                "usc probe: {} sequences, {} limsup violations, {} strict drops",
                report.usc.sequences, report.usc.limsup_violations, report.usc.strict_witnesses
            ));
            Ok(Body {
                exit_code: if report.passed() {
                    EXIT_OK
                } else {
                    EXIT_MISMATCH
                },
                summary,
                result: serde_json::to_value(&report).expect("plain data"),
                scenario,
                seed: Some(seed),
            })
        }
        Command::Fuzz(plan) => {
            let summary = fuzz(plan);
            let exit_code = if summary.counterexamples.is_empty()
                && summary.expectation_mismatches.is_empty()
            {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            };
            Ok(Body {
                summary: vec![format!(
                    "{} scenarios: {} decided, {} abstained, {} counterexamples, {} expectation mismatches",
                    summary.scenarios,
                    summary.decided,
                    summary.abstained,
                    summary.counterexamples.len(),
                    summary.expectation_mismatches.len()
                )],
                result: serde_json::to_value(&summary).expect("plain data"),
                scenario: None,
                seed: Some(plan.seeds.start),
                exit_code,
            })
        }
        Command::Corpus => {
            let rows = run_corpus()?;
            let mismatches = rows.iter().filter(|r| !r.matches).count();
            let mut summary: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "{:<7} {} expected {} {}",
                        r.name,
                        triple_string(r.got),
                        triple_string(r.expected),
                        if r.matches { "ok" } else { "MISMATCH" }
                    )
                })
                .collect();
            summary.push(format!(
                "{} of {} entries match",
                rows.len() - mismatches,
                rows.len()
            ));
            Ok(Body {
                exit_code: if mismatches == 0 {
                    EXIT_OK
                } else {
                    EXIT_MISMATCH
                },
                summary,
                result: serde_json::to_value(&rows).expect("plain data"),
                scenario: None,
                seed: None,
            })
        }
    }
}

/// One row of the corpus table.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub name: String,
    pub got: (Verdict, Verdict, Verdict),
    pub expected: (Verdict, Verdict, Verdict),
    pub matches: bool,
    pub biconditional_holds: Option<bool>,
    pub dims: Vec<usize>,
}

fn run_corpus() -> Result<Vec<CorpusRow>, Failure> {
    corpus::builtin_corpus()
        .into_iter()
        .map(|sc| {
            let v = sc.verify()?;
            let expected = sc
                .expected
                .expect("builtins carry expectations")
                .as_triple();
            Ok(CorpusRow {
                name: sc.name.clone(),
                got: v.triple(),
                expected,
                matches: v.triple() == expected,
                biconditional_holds: v.biconditional_holds,
                dims: v.dims.clone(),
            })
        })
        .collect()
}

/// Outcome of a seed sweep.
#[derive(Clone, Debug, Serialize)]
pub struct FuzzSummary {
    pub scenarios: usize,
    pub decided: usize,
    pub abstained: usize,
    pub abstained_seeds: Vec<u64>,
    pub counterexamples: Vec<Value>,
    pub expectation_mismatches: Vec<u64>,
    /// Instances where invariance passed but one of the other two failed.
    pub one_way_violations: Vec<u64>,
}

// seed, verdict, expectation, and the scenario itself when it is a counterexample
type FuzzRow = (
    u64,
    Result<beurling::TheoremVerdict, String>,
    Option<Expected>,
    Option<Scenario>,
);

/// Verifies one random scenario per seed.
pub fn fuzz(plan: &FuzzPlan) -> FuzzSummary {
    let rows: Vec<FuzzRow> = plan
        .seeds
        .clone()
        .into_par_iter()
        .map(
            |seed| match corpus::random_scenario(seed, &plan.params(seed)) {
                Ok(sc) => {
                    let v = sc.verify().map_err(|e| e.to_string());
                    let keep = matches!(&v, Ok(t) if t.biconditional_holds == Some(false));
                    (seed, v, sc.expected, keep.then_some(sc))
                }
                Err(e) => (seed, Err(e.to_string()), None, None),
            },
        )
        .collect();
    let mut s = FuzzSummary {
        scenarios: rows.len(),
        decided: 0,
        abstained: 0,
        abstained_seeds: Vec::new(),
        counterexamples: Vec::new(),
        expectation_mismatches: Vec::new(),
        one_way_violations: Vec::new(),
    };
    for (seed, v, expected, scenario) in rows {
        match v {
            Err(e) => s.counterexamples.push(json!({ "seed": seed, "error": e })),
            Ok(t) => {
                match t.biconditional_holds {
                    None => {
                        s.abstained += 1;
                        s.abstained_seeds.push(seed);
                    }
                    Some(true) => s.decided += 1,
                    Some(false) => {
                        s.decided += 1;
                        let sc = scenario.expect("kept for dumps");
                        s.counterexamples.push(json!({
                            "seed": seed,
                            "scenario": serde_json::from_str::<Value>(&serialize_scenario(&sc)).expect("json"),
                            "verdict": t,
                        }));
                    }
                }
                if t.invariant.verdict == Verdict::Pass
                    && (t.near_inner.verdict == Verdict::Fail
                        || t.full_projection.verdict == Verdict::Fail)
                {
                    s.one_way_violations.push(seed);
                }
                if let Some(e) = expected {
                    if e.as_triple() != t.triple() && !t.abstained() {
                        s.expectation_mismatches.push(seed);
                    }
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_literals() {
        let p = parse_poly("z1*z2^2 + 3*z1 - (1+2i)*z2", 2).unwrap();
        assert_eq!(
            p.coefficient(&MultiIndex::new(vec![1, 2])),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            p.coefficient(&MultiIndex::new(vec![1, 0])),
            Complex64::new(3.0, 0.0)
        );
        assert_eq!(
            p.coefficient(&MultiIndex::new(vec![0, 1])),
            Complex64::new(-1.0, -2.0)
        );
        assert_eq!(
            parse_poly("z^3", 1).unwrap(),
            Poly::monomial(MultiIndex::new(vec![3]))
        );
        assert!(parse_poly("z", 2).is_err());
        assert!(parse_poly("z3", 2).is_err());
        assert!(parse_poly("z1 +", 2).is_err());
        let p = Poly::from_terms(
            2,
            [(MultiIndex::new(vec![2, 1]), Complex64::new(0.0, -3.0))],
        );
        assert_eq!(parse_poly(&p.to_string(), 2).unwrap(), p);
    }

    #[test]
    fn component_index() {
        assert_eq!(parse_component_index("2,0").unwrap(), (2, 0));
        assert!(parse_component_index("2").is_err());
    }

    #[test]
    fn fuzz_plan_respects_ranges() {
        let plan = FuzzPlan::default();
        for seed in plan.seeds.clone() {
            let p = plan.params(seed);
            assert!(plan.nvars.contains(&p.n));
            assert!(plan.degrees.contains(&p.max_degree));
        }
    }
}
