//! Probability currents of eigenfunctions on grid edges.

use std::io::Write;

use num_complex::Complex64;

use crate::discretize::{Axis, DiscreteHamiltonian, Edge, Grid};
use crate::error::{Error, Result};
use crate::gauges::{AlphaColumn, VectorPotential};
use crate::randfield::ProfileFunction;

/// One current value per interior edge, in [`Grid::edges`] order.
#[derive(Clone, Debug)]
pub struct EdgeCurrents {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Largest eigen-residual, relative to `max(1, ||H||)`, accepted by [`eigen_current`].
pub const CURRENT_RESIDUAL_GATE: f64 = 1e-10;

/// Current of an eigenpair; refuses pairs whose residual exceeds
/// `CURRENT_RESIDUAL_GATE * max(1, ||H||)` since conservation would fail silently.
pub fn eigen_current(h: &DiscreteHamiltonian, lambda: f64, psi: &[Complex64]) -> Result<EdgeCurrents> {
    let r = crate::eigensolve::residual(h, lambda, psi);
    let gate = CURRENT_RESIDUAL_GATE * h.norm_bound().max(1.0);
    if !(r <= gate) {
        return Err(Error::NotConverged { iterations: 0, residual: r });
    }
    edge_current(h, psi)
}

/// `j_{x -> y} = (2/h) Im(conj(psi_x) e^{-i theta_{x -> y}} psi_y) / h^2` for a
/// vector with `sum |psi|^2 = 1` (the continuum-normalised `psi / h`).
pub fn edge_current(h: &DiscreteHamiltonian, psi: &[Complex64]) -> Result<EdgeCurrents> {
    let grid = h.grid;
    if psi.len() != grid.dim() {
        return Err(Error::Invalid(format!("vector length {} != {}", psi.len(), grid.dim())));
    }
    let nrm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let c = 2.0 / (grid.h * grid.h * grid.h * nrm2);
    let values = grid
        .edges()
        .map(|e| {
            let (a, b) = grid.endpoints(e);
            c * (psi[a].conj() * Complex64::cis(-h.phases.edge(e)) * psi[b]).im
        })
        .collect();
    Ok(EdgeCurrents { grid, values })
}

impl EdgeCurrents {
    pub fn get(&self, e: Edge) -> f64 {
        self.values[self.position(e)]
    }

    fn position(&self, e: Edge) -> usize {
        let n = self.grid.n;
        match e.axis {
            Axis::X => e.j * (n - 1) + e.i,
            Axis::Y => n * (n - 1) + e.j * n + e.i,
        }
    }

    /// Net outflow at every node.
    pub fn divergence(&self) -> Vec<f64> {
        let mut div = vec![0.0; self.grid.dim()];
        for (e, &j) in self.grid.edges().zip(&self.values) {
            let (a, b) = self.grid.endpoints(e);
            div[a] += j;
            div[b] -= j;
        }
        div
    }

    /// `max |div j| / max |j|`; zero for an exact eigenvector.
    pub fn conservation_residual(&self) -> f64 {
        let jmax = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if jmax == 0.0 {
            return 0.0;
        }
        self.divergence().iter().fold(0.0f64, |m, v| m.max(v.abs())) / jmax
    }

    /// `sum_e j_e^2 h^2` and the same-orientation difference quotient norm.
    pub fn norms(&self) -> CurrentNorms {
        let g = &self.grid;
        let n = g.n;
        let l2_sq = self.values.iter().map(|j| j * j).sum::<f64>() * g.h * g.h;
        let mut grad = 0.0;
        for e in g.edges() {
            let j = self.get(e);
            if e.i + 1 < n - usize::from(e.axis == Axis::X) {
                let d = self.get(Edge { i: e.i + 1, ..e }) - j;
                grad += d * d;
            }
            if e.j + 1 < n - usize::from(e.axis == Axis::Y) {
                let d = self.get(Edge { j: e.j + 1, ..e }) - j;
                grad += d * d;
            }
        }
        CurrentNorms { l2_sq, grad_sq: grad }
    }

    /// `sum_e a_e j_e h` with `a_e` the edge integral of one site column.
    pub fn pairing(&self, alpha: &AlphaColumn) -> Result<f64> {
        let mut s = 0.0;
        for (e, &j) in self.grid.edges().zip(&self.values) {
            if j == 0.0 {
                continue;
            }
            let (a, b) = self.grid.edge_points(e);
            s += alpha.edge_integral(a, b)? * j;
        }
        Ok(s * self.grid.h)
    }

    /// `x_from,y_from,x_to,y_to,current` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x_from,y_from,x_to,y_to,current")?;
        for (e, j) in self.grid.edges().zip(&self.values) {
            let (a, b) = self.grid.edge_points(e);
            writeln!(w, "{},{},{},{},{:.17e}", a[0], a[1], b[0], b[1], j)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurrentNorms {
    pub l2_sq: f64,
    pub grad_sq: f64,
}

/// `d lambda / d omega_z = -mu sum_e a_e j_e h` for the site `(k, z)`.
pub fn hellmann_feynman(
    currents: &EdgeCurrents,
    profile: ProfileFunction,
    mu: f64,
    k: u32,
    site: [i64; 2],
    tau: u8,
) -> Result<f64> {
    Ok(-mu * currents.pairing(&AlphaColumn::new(profile, k, site, tau)?)?)
}

/// Refuses eigenvalue `index` when a neighbour lies within `threshold`.
pub fn check_simple(values: &[f64], index: usize, threshold: f64) -> Result<()> {
    let mut gap = f64::INFINITY;
    if index > 0 {
        gap = gap.min(values[index] - values[index - 1]);
    }
    if index + 1 < values.len() {
        gap = gap.min(values[index + 1] - values[index]);
    }
    if gap < threshold {
        return Err(Error::NearDegenerate { gap, threshold });
    }
    Ok(())
}

/// `sum_z (Y_z lambda)^2` over level-`k` sites, with both single-gauge routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientSum {
    pub total: f64,
    /// `sum_z (alpha^(1)_z, j)^2`.
    pub route1: f64,
    /// `sum_z (alpha^(2)_z, j)^2`.
    pub route2: f64,
    pub sites: usize,
}

impl GradientSum {
    /// `|mu^-2 total - (route1 + route2) / 2|` relative to `total`.
    pub fn identity_defect(&self, mu: f64) -> f64 {
        let lhs = self.total / (mu * mu);
        let rhs = 0.5 * (self.route1 + self.route2);
        (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE)
    }
}

/// Sums over every level-`k` site of `omega` whose profile meets the grid box.
pub fn gradient_sum_squares(
    currents: &EdgeCurrents,
    omega: &crate::randfield::DisorderRealization,
    profile: ProfileFunction,
    mu: f64,
    k: u32,
) -> Result<GradientSum> {
    let sq = currents.grid.square();
    let r = omega.support_radius();
    let s = (1u64 << k) as f64;
    let (lo, hi) = (sq.lo(), sq.hi());
    let mut sites = Vec::new();
    for (kk, i, j, _) in omega.sites() {
        if kk != k {
            continue;
        }
        let c = [i as f64 / s, j as f64 / s];
        if c[0] + r / s > lo[0] && c[0] - r / s < hi[0] && c[1] + r / s > lo[1] && c[1] - r / s < hi[1] {
            sites.push([i, j]);
        }
    }
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = sites
        .par_iter()
        .map(|&z| -> Result<(f64, f64)> {
            let a = currents.pairing(&AlphaColumn::new(profile, k, z, 1)?)?;
            let b = currents.pairing(&AlphaColumn::new(profile, k, z, 2)?)?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let mut out = GradientSum { total: 0.0, route1: 0.0, route2: 0.0, sites: pairs.len() };
    for (a, b) in pairs {
        out.total += mu * mu * a * a;
        out.route1 += a * a;
        out.route2 += b * b;
    }
    Ok(out)
}

/// Mass of the averaging-box remainder for a level-`k` box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorMass {
    /// `int |E_z|^2`.
    pub mass: f64,
    /// `Theta delta`.
    pub bound: f64,
    /// Largest `|E_z|` sampled outside the enlarged box (must be exactly 0).
    pub outside_max: f64,
    pub n: u64,
}

/// `int |E_z^(tau)|^2` for the remainder of writing the normalised box
/// indicator `M_z` as a difference sum of site potentials, by composite
/// Gauss-Legendre quadrature with 8 nodes per lattice spacing on the
/// enlarged box `|x - z|_inf <= (N + 1/delta) eps`, `N = floor(delta^-2) + 1`.
///
/// The remainder is scale invariant, so it is evaluated in units of `eps`;
/// by symmetry it is the same for both orientations.
pub fn mollifier_error_mass(profile: ProfileFunction, k: u32) -> Result<ErrorMass> {
    let delta = profile.delta;
    if !(delta > 0.0 && delta <= crate::randfield::RELAXED_DELTA_MAX) {
        return Err(Error::param("profile.delta", "must lie in (0, 1/4]"));
    }
    let n = (1.0 / (delta * delta) * (1.0 + 1e-12)).floor() as i64 + 1;
    let reach = n as f64 + 1.0 / delta;
    let nf = n as f64;
    let rad = profile.support_radius();
    let along = |v: f64| -> f64 {
        let k0 = ((v - rad).ceil() as i64).max(-n);
        let k1 = ((v + rad).floor() as i64).min(n);
        (k0..=k1).map(|kk| profile.factor(v - kk as f64)).sum()
    };
    let across = |v: f64| profile.factor_int(v + nf) - profile.factor_int(v - nf);
    let inside = |v: f64| if v.abs() <= nf { 1.0 } else { 0.0 };
    let value = |v: [f64; 2]| (inside(v[0]) * inside(v[1]) - along(v[0]) * across(v[1])) / (2.0 * nf);
    let panels = (2.0 * reach.ceil() * 2.0) as usize;
    let half = reach.ceil();
    let rule = crate::quad::composite_gl(-half, half, panels, 4);
    if rule.len() > 50_000 {
        return Err(Error::TooLarge { nodes: rule.len(), cap: 50_000 });
    }
    let cols: Vec<(f64, f64, f64)> = rule.iter().map(|&(x, w)| (along(x), inside(x), w)).collect();
    let rows: Vec<(f64, f64, f64)> = rule.iter().map(|&(y, w)| (across(y), inside(y), w)).collect();
    let mut mass = 0.0;
    for &(a0, a1, wa) in &cols {
        let a = (a0, a1);
        let mut acc = 0.0;
        for &(b0, b1, wb) in &rows {
            let b = (b0, b1);
            let e = (a.1 * b.1 - a.0 * b.0) / (2.0 * nf);
            acc += wb * e * e;
        }
        mass += wa * acc;
    }
    let mut outside_max: f64 = 0.0;
    let mut rng = crate::rng::seeded(0xE77 ^ k as u64);
    use rand::RngExt;
    for _ in 0..4096 {
        let t = reach * (1.0 + 1e-9) + rng.random::<f64>() * 3.0 / delta;
        let u = (rng.random::<f64>() * 2.0 - 1.0) * (reach + 3.0 / delta);
        let side: u8 = rng.random::<u8>() % 4;
        let sgn = if side % 2 == 0 { 1.0 } else { -1.0 };
        let v = if side < 2 { [sgn * t, u] } else { [u, sgn * t] };
        outside_max = outside_max.max(value(v).abs());
    }
    let theta = match profile.kind {
        crate::randfield::ProfileKind::Plateau => 100.0,
        crate::randfield::ProfileKind::Mollifier => {
            let g = crate::randfield::mollifier_grad_sup();
            20.0 + g * g
        }
    };
    Ok(ErrorMass { mass, bound: theta * delta, outside_max, n: n as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_hamiltonian, build_hamiltonian_with, BuildOptions};
    use crate::eigensolve::{lowest_eigenpairs, EigenMethod, EigenOptions};
    use crate::gauges::GaugeKind;
    use crate::randfield::{DisorderRealization, DisorderSpec, MagneticFieldView};

    fn setup(seed: u64) -> (DisorderSpec, Grid, DisorderRealization) {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.0, 0.0], 2.0, 0.125).unwrap();
        let omega = DisorderRealization::generate(&spec, seed, grid.square()).unwrap();
        (spec, grid, omega)
    }

    fn ground(spec: &DisorderSpec, grid: &Grid, omega: &DisorderRealization) -> (DiscreteHamiltonian, f64, Vec<Complex64>) {
        let view = MagneticFieldView::new(spec, omega);
        let h = build_hamiltonian_with(&view, grid, GaugeKind::Alpha1, BuildOptions::default()).unwrap();
        let opts = EigenOptions::default().with_method(EigenMethod::Dense);
        let mut p = lowest_eigenpairs(&h, 1, &opts).unwrap();
        (h, p.values[0], p.vectors.remove(0))
    }

    #[test]
    fn eigen_current_is_conserved_and_gauge_invariant() {
        let (spec, grid, omega) = setup(3);
        let view = MagneticFieldView::new(&spec, &omega);
        let mut reference: Option<Vec<f64>> = None;
        for g in GaugeKind::ALL {
            let h = build_hamiltonian(&view, &grid, g).unwrap();
            let p = lowest_eigenpairs(&h, 1, &EigenOptions::default()).unwrap();
            let j = eigen_current(&h, p.values[0], &p.vectors[0]).unwrap();
            assert!(j.conservation_residual() < 1e-8, "{g:?}");
            match &reference {
                None => reference = Some(j.values.clone()),
                Some(r) => {
                    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    for (a, b) in r.iter().zip(&j.values) {
                        assert!((a - b).abs() < 1e-7 * scale, "{g:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn hellmann_feynman_matches_finite_difference() {
        let (spec, grid, omega) = setup(11);
        let (h, l, psi) = ground(&spec, &grid, &omega);
        let j = eigen_current(&h, l, &psi).unwrap();
        let step = 1e-4;
        for (k, site) in [(0u32, [0i64, 0i64]), (1, [1, -1]), (1, [0, 1])] {
            let w = omega.get(k, site[0], site[1]).unwrap();
            let up = omega.with_value(k, site[0], site[1], w + step).unwrap();
            let dn = omega.with_value(k, site[0], site[1], w - step).unwrap();
            let fd = (ground(&spec, &grid, &up).1 - ground(&spec, &grid, &dn).1) / (2.0 * step);
            for tau in [1, 2] {
                let hf = hellmann_feynman(&j, spec.profile, spec.mu, k, site, tau).unwrap();
                assert!((hf - fd).abs() <= 1e-5 * fd.abs().max(1e-3), "{k} {site:?} {tau}: {hf} {fd}");
            }
        }
    }

    #[test]
    fn gradient_routes_agree() {
        let (spec, grid, omega) = setup(5);
        let (h, l, psi) = ground(&spec, &grid, &omega);
        let j = eigen_current(&h, l, &psi).unwrap();
        for k in 0..=1 {
            let g = gradient_sum_squares(&j, &omega, spec.profile, spec.mu, k).unwrap();
            assert!(g.sites > 0 && g.total > 0.0);
            assert!(g.identity_defect(spec.mu) < 1e-10, "{g:?}");
        }
    }

    #[test]
    fn error_mass_bounds_and_support() {
        use crate::randfield::ProfileKind;
        for kind in [ProfileKind::Plateau, ProfileKind::Mollifier] {
            let p = ProfileFunction { kind, delta: 0.1 };
            let m = mollifier_error_mass(p, 0).unwrap();
            assert_eq!(m.n, 101);
            assert_eq!(m.outside_max, 0.0);
            assert!(m.mass <= m.bound, "{kind:?} {m:?}");
            assert!(m.mass > 0.0);
        }
    }

    #[test]
    fn residual_gate() {
        let (spec, grid, omega) = setup(1);
        let (h, l, mut psi) = ground(&spec, &grid, &omega);
        psi[10] += Complex64::new(1e-3, 0.0);
        assert!(eigen_current(&h, l, &psi).is_err());
    }

    #[test]
    fn csv_has_one_row_per_edge() {
        let (spec, grid, omega) = setup(1);
        let (h, l, psi) = ground(&spec, &grid, &omega);
        let j = eigen_current(&h, l, &psi).unwrap();
        let mut buf = Vec::new();
        j.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), grid.edge_count() + 1);
        assert!(s.starts_with("x_from,y_from,x_to,y_to,current\n"));
        let n = j.norms();
        assert!(n.l2_sq > 0.0 && n.grad_sq > 0.0);
    }
}
