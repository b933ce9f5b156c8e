//! Multiscale random magnetic fields.

mod background;
mod density;
mod envelope;
mod field;
mod profile;
mod realization;
mod spec;

pub use background::{BackgroundField, TrigTerm};
pub use density::DensitySpec;
pub use envelope::{envelope_constants, EnvelopeConstants};
pub use field::{grid_extrema, MagneticFieldView};
pub use profile::{
    mollifier_grad_sup, smoothstep, ProfileFunction, ProfileKind, PLATEAU_DELTA0,
    RELAXED_DELTA_MAX,
};
pub use realization::{read_binary, DisorderRealization, SiteRecord};
pub use spec::DisorderSpec;
