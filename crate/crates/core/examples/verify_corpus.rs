//! Runs the built-in examples and prints the verdict table next to the
//! expected verdicts.

use hardy_beurling::corpus::builtin_corpus;
use hardy_beurling::Verdict;

fn short(v: Verdict) -> char {
    match v {
        Verdict::Pass => 'P',
        Verdict::Fail => 'F',
        Verdict::Inconclusive => '?',
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:<8} {:>4} {:>4} {:>4}   expected  dims",
        "name", "inv", "NI", "FP"
    );
    for sc in builtin_corpus() {
        let v = sc.verify()?;
        let (i, n, f) = v.triple();
        let (ei, en, ef) = sc
            .expected
            .expect("built-ins carry expectations")
            .as_triple();
        println!(
            "{:<8} {:>4} {:>4} {:>4}   {}{}{}       {:?}",
            sc.name,
            short(i),
            short(n),
            short(f),
            short(ei),
            short(en),
            short(ef),
            v.dims
        );
        for (label, rep) in [("NI", &v.near_inner), ("FP", &v.full_projection)] {
            // witnesses come sorted by (k, m, r)
            if let Some(w) = rep.witnesses.first() {
                let r = w.r.as_ref().map(|r| r.to_string()).unwrap_or_default();
                println!(
                    "         {label}: {} witnesses, first r = {r}, k = {:?}, m = {:?}, violation {:.6}",
                    rep.witnesses.len(),
                    w.k,
                    w.m,
                    w.violation
                );
            }
        }
    }
    Ok(())
}
