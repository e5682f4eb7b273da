//! Valuation axioms for `ord` on random samples, plus the upper
//! semicontinuity probe.

use hardy_beurling::algebra::check_axioms;
use hardy_beurling::corpus::usc_probe;
use hardy_beurling::Space;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = Space::new(2, 2, 6)?;
    let report = check_axioms(&space, 7, 500);
    for c in &report.checks {
        println!(
            "{:<24} {:>4} samples  {:>3} violations  worst {:.2e}  {:?}",
            c.axiom, c.samples, c.violations, c.worst, c.verdict
        );
    }
    let usc = usc_probe(&space, 7);
    println!(
        "usc: {} sequences, {} limsup violations, {} strict drops",
        usc.sequences, usc.limsup_violations, usc.strict_witnesses
    );
    if let Some(case) = &usc.first_strict {
        println!(
            "  e.g. {}: ord f = {:?}, ord f_j -> {:?}",
            case.kind, case.ord_limit, case.limsup
        );
    }
    Ok(())
}
