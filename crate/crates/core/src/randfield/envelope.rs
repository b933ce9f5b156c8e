use serde::{Deserialize, Serialize};

use super::field::grid_extrema;
use super::spec::DisorderSpec;
use crate::error::Result;
use crate::geometry::Square;

/// Deterministic bounds on the bottom of the almost-sure spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    /// `inf (B_{omega_-} + V)`.
    pub e_inf: f64,
    /// `sup (B_{omega_+} + V)`.
    pub e_sup: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    /// `inf U` of the profile sum.
    pub c_u: f64,
    pub u_sup: f64,
    pub k2: f64,
    /// `f64::INFINITY` when `4 exp(-rho) >= 1`.
    pub k3: f64,
}

impl EnvelopeConstants {
    /// Upper bound on the bottom of the deterministic spectrum.
    pub fn sigma_inf_upper(&self, b0: f64) -> f64 {
        let a = self.k2 / b0.sqrt();
        let b = self.k3 / b0;
        self.e_inf + 4.0 * self.k2 * self.k2 / (b0 * b0) + a.min(b)
    }

    /// Lower bound on `E_sup - E_inf` from the coefficient spread.
    pub fn spread_lower(&self, mu: f64) -> f64 {
        mu * self.c_u * (self.m_plus - self.m_minus)
    }
}

/// `U(x) = sum_z u(x - z)`, and its derivatives, at unit scale.
struct ProfileSum<'a>(&'a DisorderSpec);

impl ProfileSum<'_> {
    fn value(&self, x: [f64; 2]) -> f64 {
        let p = &self.0.profile;
        p.periodic_sum(x[0]) * p.periodic_sum(x[1])
    }

    fn d1(&self, x: [f64; 2], axis: usize) -> f64 {
        let p = &self.0.profile;
        let (a, b) = if axis == 0 { (x[0], x[1]) } else { (x[1], x[0]) };
        p.periodic_sum_d1(a) * p.periodic_sum(b)
    }

    fn d2(&self, x: [f64; 2], which: usize) -> f64 {
        let p = &self.0.profile;
        match which {
            0 => p.periodic_sum_d2(x[0]) * p.periodic_sum(x[1]),
            1 => p.periodic_sum_d1(x[0]) * p.periodic_sum_d1(x[1]),
            _ => p.periodic_sum(x[0]) * p.periodic_sum_d2(x[1]),
        }
    }
}

/// Envelope constants over one period cell (everything is `Z^2`-periodic).
pub fn envelope_constants(spec: &DisorderSpec) -> Result<EnvelopeConstants> {
    let cell = Square::new([0.5, 0.5], 1.0);
    let tol = 1e-6;
    let u = ProfileSum(spec);
    let levels: Vec<(f64, f64, f64)> = (0..=spec.k_max)
        .map(|k| ((1u64 << k) as f64, spec.m_minus(k), spec.m_plus(k)))
        .collect();
    let u = &u;
    let levels = &levels;
    let extreme = |sign: f64| {
        move |x: [f64; 2]| -> Result<f64> {
            let r: f64 = levels
                .iter()
                .map(|&(s, mm, mp)| (if sign < 0.0 { mm } else { mp }) * u.value([s * x[0], s * x[1]]))
                .sum();
            Ok(spec.b_det.eval(x) + spec.mu * r + spec.potential.eval(x))
        }
    };
    let (e_inf, _) = grid_extrema(cell, tol, extreme(-1.0))?;
    let (_, e_sup) = grid_extrema(cell, tol, extreme(1.0))?;
    let (c_u, u_sup) = grid_extrema(cell, tol, |x| Ok(u.value(x)))?;

    let abs_sup = |f: &dyn Fn([f64; 2]) -> f64| -> Result<f64> {
        let (a, b) = grid_extrema(cell, tol, |x| Ok(f(x)))?;
        Ok(a.abs().max(b.abs()))
    };
    let q = (-spec.rho).exp();
    let mut k2: f64 = 0.0;
    for axis in 0..2 {
        let du = abs_sup(&|x| u.d1(x, axis))?;
        let db = abs_sup(&|x| spec.b_det.gradient(x)[axis])?;
        let dv = abs_sup(&|x| spec.potential.gradient(x)[axis])?;
        k2 = k2.max(du / (1.0 - 2.0 * q) + db + dv);
    }
    let k3 = if 4.0 * q < 1.0 {
        let mut m: f64 = 0.0;
        for which in 0..3 {
            let du = abs_sup(&|x| u.d2(x, which))?;
            let db = abs_sup(&|x| spec.b_det.hessian(x)[which])?;
            let dv = abs_sup(&|x| spec.potential.hessian(x)[which])?;
            m = m.max(db + du / (1.0 - 4.0 * q) + dv);
        }
        2.0 * m
    } else {
        f64::INFINITY
    };
    Ok(EnvelopeConstants {
        e_inf,
        e_sup,
        m_minus: spec.m_minus_total(),
        m_plus: spec.m_plus_total(),
        c_u,
        u_sup,
        k2,
        k3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randfield::{BackgroundField, ProfileFunction, ProfileKind};

    #[test]
    fn constant_background_plateau() {
        let mut spec = DisorderSpec::constant_field(5.0, 0.5);
        spec.rho = 2.0;
        let c = envelope_constants(&spec).unwrap();
        let s: f64 = (0..=spec.k_max).map(|k| spec.sigma(k)).sum();
        assert!((c.e_inf - (5.0 - 0.5 * s)).abs() < 1e-12);
        assert!((c.e_sup - (5.0 + 0.5 * s)).abs() < 1e-12);
        assert!((c.c_u - 1.0).abs() < 1e-12 && (c.u_sup - 1.0).abs() < 1e-12);
        assert!(c.k2 < 1e-9);
        assert!(c.k3.is_finite() && c.k3 < 1e-6);
        assert!(c.e_inf + c.spread_lower(spec.mu) <= c.e_sup + 1e-12);
    }

    #[test]
    fn k3_infinite_for_slow_decay() {
        let spec = DisorderSpec::example();
        let c = envelope_constants(&spec).unwrap();
        assert!(c.k3.is_infinite());
        assert!(c.k2 > 0.0);
        assert!(c.e_inf <= c.e_sup);
    }

    #[test]
    fn mollifier_profile_sum_is_near_one() {
        let mut spec = DisorderSpec::example();
        spec.profile = ProfileFunction { kind: ProfileKind::Mollifier, delta: 0.2 };
        spec.b_det = BackgroundField::constant(5.0);
        spec.potential = BackgroundField::default();
        let c = envelope_constants(&spec).unwrap();
        assert!(c.c_u > 0.9 && c.c_u <= 1.0 + 1e-9, "{}", c.c_u);
        assert!(c.u_sup >= 1.0 - 1e-9 && c.u_sup < 1.1);
        assert!(c.e_inf + c.spread_lower(spec.mu) <= c.e_sup + 1e-9);
    }
}
