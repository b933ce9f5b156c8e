use serde::{Deserialize, Serialize};

use super::background::{BackgroundField, TrigTerm};
use super::density::DensitySpec;
use super::profile::{ProfileFunction, ProfileKind};
use crate::error::{Error, Result};

/// Parameters of the multiscale random magnetic field
/// `B = B_det + mu sum_{k <= k_max} sum_z omega_z^(k) u(2^k (x - z))`
/// together with the scalar potential `V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub b0: f64,
    pub k0: f64,
    pub k1: f64,
    pub mu: f64,
    pub rho: f64,
    pub k_max: u32,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default = "default_true")]
    pub iid: bool,
    pub profile: ProfileFunction,
    /// Allow `delta` up to 1/4 instead of the strict analytic bound.
    #[serde(default)]
    pub relaxed: bool,
    pub b_det: BackgroundField,
    #[serde(default)]
    pub potential: BackgroundField,
}

fn default_true() -> bool {
    true
}

impl DisorderSpec {
    /// A small admissible configuration with a non-constant background.
    pub fn example() -> Self {
        DisorderSpec {
            b0: 2.0,
            k0: 4.0,
            k1: 3.0,
            mu: 1.0,
            rho: 1.0,
            k_max: 1,
            density: DensitySpec::default(),
            iid: true,
            profile: ProfileFunction {
                kind: ProfileKind::Plateau,
                delta: 0.1,
            },
            relaxed: true,
            b_det: BackgroundField {
                mean: 5.0,
                terms: vec![
                    TrigTerm { m: 1, n: 0, cos: 0.5, sin: 0.0 },
                    TrigTerm { m: 0, n: 1, cos: 0.0, sin: 0.25 },
                ],
            },
            potential: BackgroundField {
                mean: 0.0,
                terms: vec![TrigTerm { m: 1, n: 1, cos: 0.3, sin: 0.0 }],
            },
        }
    }

    /// Constant field `b` with no potential and the given coupling.
    pub fn constant_field(b: f64, mu: f64) -> Self {
        DisorderSpec {
            b0: b / 2.0,
            k0: 4.0,
            k1: 3.0,
            mu,
            rho: 1.0,
            k_max: 1,
            density: DensitySpec::default(),
            iid: true,
            profile: ProfileFunction {
                kind: ProfileKind::Plateau,
                delta: 0.1,
            },
            relaxed: true,
            b_det: BackgroundField::constant(b),
            potential: BackgroundField::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = |f: &str| format!("disorder.{f}");
        if !(self.b0 > 0.0 && self.b0.is_finite()) {
            return Err(Error::param(p("b0"), "must be positive"));
        }
        if !(self.k0 > 3.0) {
            return Err(Error::param(p("k0"), format!("must exceed 3, got {}", self.k0)));
        }
        if !(self.k1 > 0.0) {
            return Err(Error::param(p("k1"), "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::param(p("mu"), "must lie in [0, 1]"));
        }
        if !(self.rho > std::f64::consts::LN_2) {
            return Err(Error::param(
                p("rho"),
                format!("must exceed ln 2 for a differentiable field, got {}", self.rho),
            ));
        }
        if (1.0 - (-self.rho).exp()) * self.b0 < 1.0 {
            return Err(Error::param(p("b0"), "needs (1 - exp(-rho)) b0 >= 1"));
        }
        if self.k_max > 24 {
            return Err(Error::param(p("k_max"), "at most 24 levels are supported"));
        }
        if self.density.power < 1 {
            return Err(Error::param(p("density.power"), "must be at least 1"));
        }
        let (lo, hi) = self.b_det.range_on_grid(256);
        if lo < 2.0 * self.b0 * (1.0 - 1e-12) || hi > (self.k0 - 1.0) * self.b0 * (1.0 + 1e-12) {
            return Err(Error::param(
                p("b_det"),
                format!(
                    "range [{lo}, {hi}] must lie in [2 b0, (K0 - 1) b0] = [{}, {}]",
                    2.0 * self.b0,
                    (self.k0 - 1.0) * self.b0
                ),
            ));
        }
        let (vlo, vhi) = self.potential.range_on_grid(256);
        if vlo.abs().max(vhi.abs()) > 0.25 * self.b0 * (1.0 + 1e-12) {
            return Err(Error::param(p("potential"), "sup |V| must not exceed b0 / 4"));
        }
        self.profile
            .check(self.relaxed)
            .map_err(|e| match e {
                Error::InvalidParameter { field, reason } => Error::param(p(&field), reason),
                other => other,
            })
    }

    /// Envelope width `sigma^(k) = exp(-rho k)`.
    pub fn sigma(&self, k: u32) -> f64 {
        (-self.rho * k as f64).exp()
    }

    /// Sup-norm bound on the omitted levels `k > k_max`.
    pub fn truncation_tail(&self) -> f64 {
        (-self.rho * (self.k_max + 1) as f64).exp() / (1.0 - (-self.rho).exp())
    }

    /// Finest spacing allowed by the field: a quarter of the smallest site pitch.
    pub fn required_spacing(&self) -> f64 {
        0.25 * 2f64.powi(-(self.k_max as i32))
    }

    pub fn m_minus(&self, k: u32) -> f64 {
        -self.sigma(k)
    }

    pub fn m_plus(&self, k: u32) -> f64 {
        self.sigma(k)
    }

    /// `M_- = sum_{k <= k_max} m_-^(k)`.
    pub fn m_minus_total(&self) -> f64 {
        (0..=self.k_max).map(|k| self.m_minus(k)).sum()
    }

    pub fn m_plus_total(&self) -> f64 {
        (0..=self.k_max).map(|k| self.m_plus(k)).sum()
    }

    /// Lower-tail mass of a level-0 coefficient: `P(omega <= m_- + h)`.
    pub fn nu0(&self, h: f64) -> f64 {
        self.density.nu(h)
    }

    /// Width of the coefficient law at site `(i, j)` of level `k`.
    pub fn site_width(&self, seed: u64, k: u32, i: i64, j: i64) -> f64 {
        let s = self.sigma(k);
        if self.iid {
            s
        } else {
            s * (0.5 + 0.5 * crate::rng::site_hash_unit(seed, k, i, j))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_is_valid_and_round_trips() {
        let s = DisorderSpec::example();
        s.validate().unwrap();
        let back = DisorderSpec::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_bad_parameters_with_field_names() {
        let mut s = DisorderSpec::example();
        s.rho = std::f64::consts::LN_2;
        match s.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "disorder.rho"),
            other => panic!("{other:?}"),
        }
        let mut s = DisorderSpec::example();
        s.k0 = 3.0;
        match s.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "disorder.k0"),
            other => panic!("{other:?}"),
        }
        let mut s = DisorderSpec::example();
        s.b_det.mean = 7.0;
        assert!(s.validate().is_err());
        let mut s = DisorderSpec::example();
        s.potential.mean = 0.6;
        assert!(s.validate().is_err());
        let mut s = DisorderSpec::example();
        s.relaxed = false;
        match s.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "disorder.profile.delta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tail_and_resolution() {
        let s = DisorderSpec::example();
        let direct: f64 = (2..200).map(|k| s.sigma(k)).sum();
        assert!((s.truncation_tail() - direct).abs() < 1e-14);
        assert_eq!(s.required_spacing(), 0.125);
    }
}
