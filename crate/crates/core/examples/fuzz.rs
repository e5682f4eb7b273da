//! Seeded sweep over random instances, checking the biconditional on each.
//!
//! ```text
//! cargo run --release --example fuzz -- 1 101
//! ```

use hardy_beurling::io::{fuzz, FuzzPlan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let start: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let end: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(41);
    let plan = FuzzPlan {
        seeds: start..end,
        ..FuzzPlan::default()
    };
    let t = std::time::Instant::now();
    let s = fuzz(&plan);
    println!(
        "{} scenarios in {:.1?}: {} decided, {} abstained {:?}",
        s.scenarios,
        t.elapsed(),
        s.decided,
        s.abstained,
        s.abstained_seeds
    );
    println!(
        "counterexamples {}, expectation mismatches {:?}, one-way violations {:?}",
        s.counterexamples.len(),
        s.expectation_mismatches,
        s.one_way_violations
    );
    for c in &s.counterexamples {
        println!("{}", serde_json::to_string_pretty(c)?);
    }
    Ok(())
}
