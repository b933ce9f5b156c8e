//! `randmag run | report | validate`.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use randmag::experiments::{parse_csv, run_experiment, ExperimentConfig, ExperimentReport};

use manifest::{write_atomic, RunManifest, RunState, RESULTS, SUMMARY};

#[derive(Parser)]
#[command(name = "randmag", version, about = "Random magnetic operator experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config and write results.csv, summary.json, manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Print the criteria of a finished run and regenerate its summary.json.
    Report {
        /// Path to manifest.json (or the run directory).
        manifest: PathBuf,
    },
    /// Parse and validate a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit 0: all criteria pass; 2: some criterion failed; 1: error.
fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(config: &Path, seed: Option<u64>, out: &Path, workers: usize) -> ExitCode {
    let cfg = match load_config(config, seed) {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    if workers == 0 {
        return error("workers: must be at least 1");
    }
    if let Err(e) = fs::create_dir_all(out) {
        return error(format!("{}: {e}", out.display()));
    }
    let mut man = RunManifest::start(config, &cfg, out, workers);
    if let Err(e) = man.write(out) {
        return error(e);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => return error(e),
    };
    let report = match pool.install(|| run_experiment(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            man.fail(e.to_string());
            let _ = man.write(out);
            return error(e);
        }
    };
    let summary = match serde_json::to_string_pretty(&report.summary(&cfg)) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let written = write_atomic(&out.join(RESULTS), report.to_csv().as_bytes())
        .and_then(|_| write_atomic(&out.join(SUMMARY), summary.as_bytes()))
        .and_then(|_| {
            man.finish(&report);
            man.write(out)
        });
    if let Err(e) = written {
        return error(e);
    }
    print!("{}", ExperimentReport::criteria_table(&report.criteria));
    verdict(report.all_pass())
}

fn report(path: &Path) -> ExitCode {
    let path = if path.is_dir() { path.join(manifest::MANIFEST) } else { path.to_path_buf() };
    let man = match RunManifest::read(&path) {
        Ok(m) => m,
        Err(e) => return error(e),
    };
    if man.state != RunState::Complete {
        let why = man.error.clone().unwrap_or_else(|| "run did not finish".into());
        return error(format!("{}: {why}", path.display()));
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    let cells = match fs::read_to_string(dir.join(RESULTS)).map_err(|e| e.to_string()).and_then(|t| parse_csv(&t).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => return error(format!("{}: {e}", dir.join(RESULTS).display())),
    };
    let consistent = cells.len() == man.cells.len()
        && cells.iter().zip(&man.cells).all(|(c, m)| c.cell_id == m.cell_id && c.label == m.label && c.status == m.status);
    if !consistent {
        return error("results.csv does not match the cells recorded in the manifest");
    }
    let rep = ExperimentReport { config_hash: man.config_hash.clone(), seed: man.seed, cells, criteria: man.criteria.clone() };
    let summary = match serde_json::to_string_pretty(&rep.summary(&man.config)) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    if let Err(e) = write_atomic(&dir.join(SUMMARY), summary.as_bytes()) {
        return error(e);
    }
    print!("{}", ExperimentReport::criteria_table(&rep.criteria));
    verdict(rep.all_pass())
}

fn validate(config: &Path) -> ExitCode {
    match load_config(config, None) {
        Ok(c) => {
            println!("ok {:?} {}", c.experiment, c.hash());
            ExitCode::SUCCESS
        }
        Err(e) => error(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Run { config, seed, out, workers } => run(&config, seed, &out, workers),
        Command::Report { manifest } => report(&manifest),
        Command::Validate { config } => validate(&config),
    }
}
