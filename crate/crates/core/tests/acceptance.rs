//! End-to-end acceptance suite: one PASS/FAIL line per criterion, each backed
//! by a shipped configuration under `configs/`.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use randmag::experiments::{run_experiment, ExperimentConfig, ExperimentReport};

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Outcome {
    pass: bool,
    elapsed: Duration,
    detail: String,
}

fn evaluate(report: &ExperimentReport, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    let mut detail: Vec<String> = report
        .failed()
        .map(|c| format!("{} (value {:?}, bound {:?})", c.name, c.value, c.bound))
        .collect();
    if report.criteria.is_empty() {
        detail.push("no criteria evaluated".into());
    }
    if let Some(b) = budget {
        if elapsed > b {
            detail.push(format!("runtime {elapsed:.1?} over budget {b:?}"));
        }
    }
    Outcome { pass: detail.is_empty(), elapsed, detail: detail.join("; ") }
}

const SUITE: [(&str, &str, Option<u64>); 14] = [
    ("1", "landau", Some(120)),
    ("2", "pauli_floor", Some(600)),
    ("3", "hellmann_feynman", None),
    ("4", "gauge_invariance", None),
    ("5", "current_conservation", None),
    ("6", "wegner", Some(7200)),
    ("7", "combes_thomas", None),
    ("8", "disk_gauge", None),
    ("9", "error_mass", None),
    ("10", "initial_scale", None),
    ("11", "lemma", None),
    ("12", "ground_energy", None),
    ("13", "gauge_covariance", None),
    ("14", "weyl", None),
];

#[test]
fn acceptance_suite() {
    let mut failures = Vec::new();
    writeln!(std::io::stdout().lock()).unwrap();
    for (id, name, budget) in SUITE {
        let cfg = config(name);
        let start = Instant::now();
        let out = match run_experiment(&cfg) {
            Ok(rep) => evaluate(&rep, start.elapsed(), budget.map(Duration::from_secs)),
            Err(e) => Outcome { pass: false, elapsed: start.elapsed(), detail: format!("error: {e}") },
        };
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        // Written past the test harness capture so the table shows in plain `cargo test`.
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{verdict} {id:>2} {name:<22} {:>8.1?} {}", out.elapsed, out.detail).unwrap();
        if !out.pass {
            failures.push(format!("{id} {name}: {}", out.detail));
        }
    }
    assert!(failures.is_empty(), "failed criteria:\n{}", failures.join("\n"));
}

/// The prescribed Wegner windows hold too few eigenvalues for the ratio test
/// to engage, so the same model is also checked with windows wide enough.
#[test]
fn wegner_ratios_engage_at_wider_windows() {
    let mut cfg = config("wegner");
    cfg.window.energies = vec![5.5];
    cfg.window.etas = vec![2.0, 1.0];
    cfg.realizations = 40;
    let rep = run_experiment(&cfg).unwrap();
    let ratios = rep.criterion_named("wegner ratio");
    assert!(!ratios.is_empty(), "no ratio reached the count threshold");
    for c in rep.criteria.iter() {
        assert!(c.pass, "{} value {:?}", c.name, c.value);
    }
}
