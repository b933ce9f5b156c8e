use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::randfield::DisorderSpec;

/// Experiment selected by a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    WegnerScan,
    InitialLengthScale,
    CombesThomas,
    SpectrumLocation,
    GroundEnergy,
    GaugeCovariance,
    GoodBox,
    LemmaTrick,
    HellmannFeynman,
    GaugeInvariance,
    CurrentConservation,
    DiskGauge,
    ErrorMass,
    WeylScaling,
}

/// Grid spacing rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Fixed(f64),
    /// `2^-k_max / 4`, the coarsest spacing that resolves every level.
    Required,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Box side lengths `L`.
    pub sides: Vec<f64>,
    pub spacing: Spacing,
    #[serde(default)]
    pub allow_coarse: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowParams {
    #[serde(default)]
    pub energies: Vec<f64>,
    /// Window widths, descending.
    #[serde(default)]
    pub etas: Vec<f64>,
}

/// Per-experiment parameters; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Extras {
    pub shift: [i64; 2],
    /// Box lengths `l` for resolvent and initial-scale experiments.
    pub lengths: Vec<f64>,
    pub gamma: Option<f64>,
    pub xi: f64,
    /// Tail exponent; defaults to `density.power + 1`.
    pub tau: Option<f64>,
    pub theta_msa: Option<f64>,
    pub q: f64,
    /// Threshold `h` of the initial-scale event; defaults to `l^(beta - 1)`.
    pub h_prob: Option<f64>,
    pub kappa: f64,
    pub eigen_count: usize,
    /// Energies `K` for counting below.
    pub levels: Vec<f64>,
    /// Sample count for (realization, site) pairs.
    pub samples: usize,
    pub fd_steps: Vec<f64>,
    pub tolerances: Vec<f64>,
    pub radius: f64,
    pub deltas: Vec<f64>,
    /// Coefficient per level of a periodic configuration.
    pub periodic_values: Vec<f64>,
    /// Relative half-width of Landau cluster windows.
    pub cluster_tolerance: f64,
    pub landau_levels: u32,
    /// Slack below `min (B + V)` for the spectral floor.
    pub floor_tolerance: f64,
}

impl Default for Extras {
    fn default() -> Self {
        Extras {
            shift: [1, 0],
            lengths: vec![8.0],
            gamma: None,
            xi: 0.5,
            tau: None,
            theta_msa: None,
            q: 2.5,
            h_prob: None,
            kappa: 1.0,
            eigen_count: 10,
            levels: vec![],
            samples: 20,
            fd_steps: vec![1e-2, 1e-3, 1e-4],
            tolerances: vec![1e-6, 1e-8, 1e-10],
            radius: 2.0,
            deltas: vec![0.1],
            periodic_values: vec![],
            cluster_tolerance: 0.05,
            landau_levels: 1,
            floor_tolerance: 0.05,
        }
    }
}

/// A complete, serializable experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub disorder: DisorderSpec,
    pub grid: GridParams,
    #[serde(default)]
    pub window: WindowParams,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub extras: Extras,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the compact JSON encoding, hex.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(s.as_bytes()))
    }

    pub fn spacing(&self) -> f64 {
        match self.grid.spacing {
            Spacing::Fixed(h) => h,
            Spacing::Required => self.disorder.required_spacing(),
        }
    }

    /// Grid of side `side` centered at `center`.
    pub fn grid_at(&self, center: [f64; 2], side: f64) -> Result<Grid> {
        let g = Grid::new(center, side, self.spacing())?;
        if !self.grid.allow_coarse {
            g.check_resolution(self.disorder.required_spacing())?;
        }
        Ok(g)
    }

    /// `tau` of the polynomial tail.
    pub fn tau(&self) -> f64 {
        self.extras.tau.unwrap_or(self.disorder.density.power as f64 + 1.0)
    }

    /// `beta = (1 - (xi + 2) / tau) / 2`.
    pub fn beta(&self) -> f64 {
        0.5 * (1.0 - (self.extras.xi + 2.0) / self.tau())
    }

    pub fn validate(&self) -> Result<()> {
        self.disorder.validate()?;
        if self.realizations < 1 {
            return Err(Error::param("realizations", "must be at least 1"));
        }
        if self.grid.sides.is_empty() {
            return Err(Error::param("grid.sides", "must not be empty"));
        }
        if self.grid.sides.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::param("grid.sides", "entries must be positive"));
        }
        if let Spacing::Fixed(h) = self.grid.spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::param("grid.spacing", "must be positive"));
            }
        }
        if self.window.etas.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::param("window.etas", "entries must be positive"));
        }
        if self.window.etas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("window.etas", "must be strictly descending"));
        }
        if self.window.energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::param("window.energies", "entries must be finite"));
        }
        let x = &self.extras;
        if !(x.xi > 0.0) {
            return Err(Error::param("extras.xi", "must be positive"));
        }
        if x.fd_steps.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::param("extras.fd_steps", "entries must be positive"));
        }
        if x.tolerances.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::param("extras.tolerances", "entries must be positive"));
        }
        if x.lengths.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::param("extras.lengths", "entries must be positive"));
        }
        use ExperimentKind as K;
        let need = |ok: bool, field: &str, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::param(field, what.to_string()))
            }
        };
        match self.experiment {
            K::WegnerScan => {
                need(!self.window.energies.is_empty(), "window.energies", "must not be empty")?;
                need(!self.window.etas.is_empty(), "window.etas", "must not be empty")?;
            }
            K::CombesThomas => {
                need(!x.lengths.is_empty(), "extras.lengths", "must not be empty")?;
                need(!self.window.etas.is_empty(), "window.etas", "must not be empty")?;
            }
            K::InitialLengthScale | K::GoodBox => {
                need(!x.lengths.is_empty(), "extras.lengths", "must not be empty")?;
                need(self.tau() > 2.0, "extras.tau", "must exceed 2")?;
                need(x.xi < self.tau() - 2.0, "extras.xi", "must be below tau - 2")?;
            }
            K::LemmaTrick => {
                need(!self.window.energies.is_empty(), "window.energies", "must not be empty")?;
                need(!self.window.etas.is_empty(), "window.etas", "must not be empty")?;
                need(self.window.etas.iter().all(|&e| e <= 1.0), "window.etas", "cutoff windows need eta <= 1")?;
            }
            K::GroundEnergy => {
                need(self.grid.sides.len() >= 3, "grid.sides", "needs at least three box sizes")?;
                need(
                    self.grid.sides.windows(2).all(|w| w[1] > w[0]),
                    "grid.sides",
                    "must be increasing",
                )?;
            }
            K::HellmannFeynman => {
                need(x.fd_steps.len() >= 2, "extras.fd_steps", "needs at least two steps")?;
            }
            K::WeylScaling => {
                need(!x.levels.is_empty(), "extras.levels", "must not be empty")?;
            }
            K::DiskGauge => need(x.radius > 0.0, "extras.radius", "must be positive")?,
            K::ErrorMass => need(!x.deltas.is_empty(), "extras.deltas", "must not be empty")?,
            K::CurrentConservation => {
                need(!x.tolerances.is_empty(), "extras.tolerances", "must not be empty")?
            }
            K::SpectrumLocation | K::GaugeCovariance | K::GaugeInvariance => {}
        }
        if !x.periodic_values.is_empty() && x.periodic_values.len() != self.disorder.k_max as usize + 1 {
            return Err(Error::param("extras.periodic_values", "needs one value per level"));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) fn sample_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        experiment: kind,
        disorder: DisorderSpec::example(),
        grid: GridParams { sides: vec![2.0], spacing: Spacing::Required, allow_coarse: false },
        window: WindowParams { energies: vec![5.0], etas: vec![1.0, 0.5] },
        realizations: 3,
        seed: 1,
        extras: Extras::default(),
    }
}
