//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run all criteria with `cargo test -p skatinfer-cli --test acceptance`, or
//! a selection with `... --test acceptance -- 2 5`. Tolerances and sample
//! sizes are pinned in each criterion's module.

#[path = "../../../core/tests/common/mod.rs"]
mod common;

mod counts;
mod determinism;
mod posterior;
mod rules;
mod solver;
mod tournament;
mod tssr;

use std::process::ExitCode;
use std::time::Instant;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (u8, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    (1, "rules conformance", rules::conformance),
    (2, "double-dummy exactness", solver::exactness),
    (3, "posterior oracle", posterior::oracle_equivalence),
    (4, "TSSR fixed points", tssr::fixed_points),
    (5, "estimator consistency", tssr::estimator_consistency),
    (6, "information-set sizes", counts::cardinalities),
    (7, "TSSR ordering", tssr::ordering),
    (8, "tournament direction", tournament::direction),
    (9, "determinism", determinism::byte_identical_reruns),
];

/// Criteria that fail for a documented reason and must keep failing until
/// the documentation is updated.
const KNOWN_FAILURES: &[u8] = &[5];

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    let mut passed = 0;
    let mut failed = Vec::new();
    for (n, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let secs = t.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&n);
        let verdict = match (o.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as a known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {n} {name:<24} {verdict}: {} [{secs:.1} s]", o.detail);
        if o.pass {
            passed += 1;
        } else {
            failed.push(n);
        }
        if o.pass == known {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed} passed, {} failed {failed:?}, {unexpected} unexpected", failed.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
