use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("point ({x}, {y}) lies outside the realized region")]
    OutOfRegion { x: f64, y: f64 },
    #[error("grid has {nodes} interior nodes, above the cap of {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("grid spacing {h} is too coarse for the finest field scale (need h <= {required})")]
    Resolution { h: f64, required: f64 },
    #[error("solver did not converge after {iterations} iterations (best residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("eigenvalue is not simple: spectral gap {gap:e} below {threshold:e}")]
    NearDegenerate { gap: f64, threshold: f64 },
    #[error("energy {energy} lies within {distance:e} of the spectrum")]
    OnSpectrum { energy: f64, distance: f64 },
    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
