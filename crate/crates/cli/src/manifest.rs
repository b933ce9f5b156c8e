use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use randmag::experiments::{CellStatus, Criterion, ExperimentConfig, ExperimentReport};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";
pub const RESULTS: &str = "results.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    Complete,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell_id: usize,
    pub label: String,
    pub status: CellStatus,
}

/// Written before any numerics and rewritten (tmp + rename) when the run ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    /// How realization seeds follow from `seed`.
    pub seed_scheme: String,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub started_at: f64,
    pub finished_at: Option<f64>,
    pub state: RunState,
    pub error: Option<String>,
    pub cells: Vec<CellRecord>,
    pub criteria: Vec<Criterion>,
}

pub fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(config_path: &Path, config: &ExperimentConfig, out_dir: &Path, workers: usize) -> Self {
        RunManifest {
            config_path: config_path.to_path_buf(),
            config_hash: config.hash(),
            config: config.clone(),
            seed: config.seed,
            seed_scheme: "realization r of stream s uses splitmix64 counter seed derive_seed(seed, s, r)".into(),
            out_dir: out_dir.to_path_buf(),
            workers,
            started_at: now(),
            finished_at: None,
            state: RunState::Running,
            error: None,
            cells: vec![],
            criteria: vec![],
        }
    }

    pub fn finish(&mut self, report: &ExperimentReport) {
        self.finished_at = Some(now());
        self.state = RunState::Complete;
        self.cells = report
            .cells
            .iter()
            .map(|c| CellRecord { cell_id: c.cell_id, label: c.label.clone(), status: c.status })
            .collect();
        self.criteria = report.criteria.clone();
    }

    pub fn fail(&mut self, msg: String) {
        self.finished_at = Some(now());
        self.state = RunState::Error;
        self.error = Some(msg);
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: corrupt manifest: {e}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        write_atomic(&dir.join(MANIFEST), text.as_bytes())
    }
}

/// Write to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
