use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use hardy_beurling::io::{self, Command, FuzzPlan, Invocation, Overrides, Source};
use hardy_beurling::PropertyId;

#[derive(Parser)]
#[command(
    name = "hardy-beurling",
    version,
    about = "Invariant-subspace verification on truncated Hardy spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Clone)]
struct Input {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "builtin")]
    scenario: Option<PathBuf>,
    /// Builtin example: ex6.2, ex6.7, ex7.4, eq3.17.
    #[arg(long)]
    builtin: Option<String>,
    /// Truncation degree N for builtins.
    #[arg(long)]
    degree: Option<usize>,
    /// Blaschke parameter, `re` or `re,im`.
    #[arg(long, value_parser = parse_complex)]
    a: Option<Complex64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    tol_mem: Option<f64>,
    #[arg(long)]
    tol_orth: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Graded decomposition V = W_0 + W_1 + ...
    Decompose(Input),
    /// One property check.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        property: PropertyId,
    },
    /// Invariance, near-inner and full projection together.
    Verify(Input),
    /// Reconstruct r*h from the components.
    Synthesize {
        #[command(flatten)]
        input: Input,
        /// Polynomial literal, e.g. `z1*z2 - 2*z1^2`.
        #[arg(long)]
        r: String,
        /// Basis vector `k,i` of W_k.
        #[arg(long)]
        h: String,
    },
    /// Valuation-algebra and module axioms on random samples.
    Axioms {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Random scenarios over a seed range.
    Fuzz {
        /// `start..end`
        #[arg(long, default_value = "1..201")]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        nvars: Vec<usize>,
        /// `lo..=hi`
        #[arg(long, default_value = "4..=8")]
        degrees: String,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        dims: Vec<usize>,
    },
    /// The builtin example table.
    Corpus,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_range(s: &str) -> Result<(u64, u64, bool), String> {
    let (lo, hi, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(format!("expected a range like 1..201, got `{s}`"));
    };
    let lo = lo.parse().map_err(|_| format!("bad range `{s}`"))?;
    let hi = hi.parse().map_err(|_| format!("bad range `{s}`"))?;
    Ok((lo, hi, inclusive))
}

fn split(input: Input) -> (Option<Source>, Overrides) {
    let source = match (input.scenario, input.builtin) {
        (Some(p), _) => Some(Source::File(p)),
        (None, Some(b)) => Some(Source::Builtin(b)),
        (None, None) => None,
    };
    let overrides = Overrides {
        degree: input.degree,
        a: input.a,
        horizon: input.horizon,
        tol_mem: input.tol_mem,
        tol_orth: input.tol_orth,
        seed: input.seed,
    };
    (source, overrides)
}

fn invocation(cli: Cli) -> Result<Invocation, String> {
    let timing = cli.timing;
    let (command, input) = match cli.command {
        Cmd::Decompose(i) => (Command::Decompose, Some(i)),
        Cmd::Check { input, property } => (Command::Check(property), Some(input)),
        Cmd::Verify(i) => (Command::Verify, Some(i)),
        Cmd::Synthesize { input, r, h } => {
            let h = io::parse_component_index(&h).map_err(|e| e.to_string())?;
            (Command::Synthesize { r, h }, Some(input))
        }
        Cmd::Axioms { input, samples } => (Command::Axioms { samples }, Some(input)),
        Cmd::Fuzz {
            seeds,
            nvars,
            degrees,
            dims,
        } => {
            let (s0, s1, inc) = parse_range(&seeds)?;
            let (d0, d1, dinc) = parse_range(&degrees)?;
            let d1 = if dinc { d1 } else { d1.saturating_sub(1) };
            if nvars.is_empty()
                || nvars.contains(&0)
                || dims.is_empty()
                || dims.contains(&0)
                || d0 > d1
            {
                return Err("fuzz ranges must be nonempty and positive".into());
            }
            let plan = FuzzPlan {
                seeds: s0..if inc { s1 + 1 } else { s1 },
                nvars,
                degrees: d0 as usize..=d1 as usize,
                dims,
                ..FuzzPlan::default()
            };
            (Command::Fuzz(plan), None)
        }
        Cmd::Corpus => (Command::Corpus, None),
    };
    let (source, overrides) = input.map(split).unwrap_or((None, Overrides::default()));
    Ok(Invocation {
        command,
        source,
        overrides,
        timing,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(io::EXIT_INTERNAL as u8);
        }
    }
    let inv = match invocation(cli) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(io::EXIT_INPUT as u8);
        }
    };
    let report = io::run(&inv);
    for line in &report.summary {
        eprintln!("{line}");
    }
    println!("{}", report.to_json());
    ExitCode::from(report.exit_code as u8)
}
