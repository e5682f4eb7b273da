//! Reads a scenario document, verifies it and writes it back out.

use hardy_beurling::io::{parse_scenario, serialize_scenario};

const DOC: &str = r#"{
  "version": 1,
  "name": "z1 + z2 in two variables",
  "space": { "n": 2, "d": 1, "N": 5 },
  "generators": [
    [
      { "exponents": [1, 0], "coeffs": [[1.0, 0.0]] },
      { "exponents": [0, 1], "coeffs": [[1.0, 0.0]] }
    ]
  ],
  "closure_mode": "module",
  "expected": { "invariant": "pass", "near_inner": "pass", "full_projection": "pass" }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DOC.to_string(),
    };
    let sc = parse_scenario(&doc)?;
    for w in &sc.warnings {
        eprintln!("warning: {w}");
    }
    let v = sc.verify()?;
    println!("{}: {:?}, dims {:?}", sc.name, v.triple(), v.dims);
    if let Some(e) = sc.expected {
        println!("expected {:?}", e.as_triple());
    }
    println!("{}", serialize_scenario(&sc));
    Ok(())
}
