//! Lowest eigenpairs, eigenvalue counts in windows and resolvent block norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretize::DiscreteHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{dense_eigen, dense_eigenvalues, norm, BandLdl, Lanczos};

/// Solver selection for eigenpairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    /// Dense up to `dense_threshold`, shift-invert Lanczos above.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub method: EigenMethod,
    pub dense_threshold: usize,
    /// Required `||H v - lambda v||` for unit `v`.
    pub tol: f64,
    pub max_krylov: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            method: EigenMethod::Auto,
            dense_threshold: 4096,
            tol: 1e-9,
            max_krylov: 400,
            seed: 0x5EED,
        }
    }
}

impl EigenOptions {
    pub fn with_method(mut self, method: EigenMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Eigenpairs sorted by eigenvalue with verified residuals.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

impl EigenPairs {
    /// `index,value,residual` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value,residual\n");
        for (i, (v, r)) in self.values.iter().zip(&self.residuals).enumerate() {
            s.push_str(&format!("{i},{v:.17e},{r:.3e}\n"));
        }
        s
    }
}

pub fn residual(h: &DiscreteHamiltonian, lambda: f64, v: &[Complex64]) -> f64 {
    let mut w = vec![Complex64::new(0.0, 0.0); v.len()];
    h.matvec(v, &mut w);
    for (wi, vi) in w.iter_mut().zip(v) {
        *wi -= lambda * vi;
    }
    norm(&w) / norm(v)
}

/// The `m` lowest eigenpairs of `h`.
pub fn lowest_eigenpairs(h: &DiscreteHamiltonian, m: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let dim = h.dim();
    if m == 0 || m > dim {
        return Err(Error::param("m", format!("must lie in 1..={dim}")));
    }
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert => false,
        EigenMethod::Auto => dim <= opts.dense_threshold,
    };
    if dense || dim <= 2 * m + 20 {
        let e = dense_eigen(&h.matrix);
        let mut out = EigenPairs { values: vec![], vectors: vec![], residuals: vec![] };
        for k in 0..m {
            let v = e.vector(k);
            out.residuals.push(residual(h, e.values[k], &v));
            out.values.push(e.values[k]);
            out.vectors.push(v);
        }
        return Ok(out);
    }
    shift_invert(h, m, opts)
}

/// Shift-invert Lanczos from below the Gershgorin bound. A clustered bottom
/// of the spectrum converges slowly from there, so a failed attempt is
/// retried once with the shift moved just under the lowest Ritz estimate
/// (verified by inertia).
fn shift_invert(h: &DiscreteHamiltonian, m: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    let (glo, _) = h.matrix.gershgorin();
    let (first, ritz) = match shift_invert_at(h, m, opts, glo - 1.0) {
        Ok(out) => return Ok(out),
        Err(e) => e,
    };
    let Some(&low) = ritz.first() else { return Err(first) };
    let spread = ritz.get(m).map_or(1.0, |&x| x - low).max(1e-6 * low.abs().max(1.0));
    let mut delta = 0.5 * spread;
    let mut sigma = low - delta;
    for _ in 0..40 {
        if sigma <= glo - 1.0 {
            return Err(first);
        }
        if count_below(h, sigma, false)?.0 == 0 {
            break;
        }
        delta *= 2.0;
        sigma = low - delta;
    }
    shift_invert_at(h, m, opts, sigma).map_err(|(e, _)| e)
}

type Attempt = std::result::Result<EigenPairs, (Error, Vec<f64>)>;

fn shift_invert_at(h: &DiscreteHamiltonian, m: usize, opts: &EigenOptions, sigma: f64) -> Attempt {
    let dim = h.dim();
    let ldl = BandLdl::factor(&h.band(), sigma).map_err(|e| (e, vec![]))?;
    let mut lz = Lanczos::new(dim, opts.seed);
    let mut op = |x: &[Complex64], y: &mut [Complex64]| {
        y.copy_from_slice(x);
        ldl.solve(y);
    };
    let cap = opts.max_krylov.max(3 * m + 40).min(dim);
    let mut best = f64::INFINITY;
    let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        let more = lz.step(&mut op);
        let k = lz.len();
        let check = !more || k >= cap || (k >= m + 5 && k % 5 == 0);
        if !check {
            continue;
        }
        let (theta, s) = lz.ritz();
        let top = m.min(theta.len());
        // H-space residual of a Ritz pair: |beta s_k| ||(H - sigma) v_next|| / theta
        let g = match lz.pending() {
            Some(v) => {
                h.matvec(v, &mut tmp);
                tmp.iter().zip(v).map(|(a, b)| (a - sigma * b).norm_sqr()).sum::<f64>().sqrt()
            }
            None => 0.0,
        };
        let est = (0..top)
            .map(|c| lz.residual_estimate(&s, c) * g / theta[c])
            .fold(0.0, f64::max);
        if top == m && (est <= 0.5 * opts.tol || !more || k >= cap) {
            let mut out = EigenPairs { values: vec![], vectors: vec![], residuals: vec![] };
            for c in 0..m {
                let v = lz.ritz_vector(&s, c);
                let lambda = sigma + 1.0 / theta[c];
                let mut hv = vec![Complex64::new(0.0, 0.0); dim];
                h.matvec(&v, &mut hv);
                let rq = crate::linalg::dot(&v, &hv).re;
                out.residuals.push(residual(h, rq, &v));
                out.values.push(if (rq - lambda).abs() < 1e-6 * lambda.abs().max(1.0) { rq } else { lambda });
                out.vectors.push(v);
            }
            let worst = out.residuals.iter().fold(0.0f64, |a, &b| a.max(b));
            best = best.min(worst);
            if worst <= opts.tol {
                return Ok(out);
            }
            if !more || k >= cap {
                let ritz = theta.iter().take(m + 1).map(|t| sigma + 1.0 / t).collect();
                return Err((Error::NotConverged { iterations: k, residual: best }, ritz));
            }
        }
    }
}

/// Result of counting eigenvalues in a closed window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCount {
    pub count: usize,
    /// Window edges that had to be nudged by `1e-10` off a pivot collision.
    pub perturbed_edges: u32,
}

/// Collision threshold on pivots and the nudge applied to a colliding shift.
pub const COLLISION_TOL: f64 = 1e-12;
pub const COLLISION_SHIFT: f64 = 1e-10;

/// Number of eigenvalues strictly below `shift` (with collision handling).
pub fn count_below(h: &DiscreteHamiltonian, shift: f64, nudge_up: bool) -> Result<(usize, bool)> {
    let band = h.band();
    let f = BandLdl::factor(&band, shift)?;
    let (neg, zero, _) = f.inertia(COLLISION_TOL);
    if zero == 0 {
        return Ok((neg, false));
    }
    let s2 = if nudge_up { shift + COLLISION_SHIFT } else { shift - COLLISION_SHIFT };
    let f = BandLdl::factor(&band, s2)?;
    let (neg, zero, _) = f.inertia(0.0);
    if zero != 0 {
        return Err(Error::Invalid(format!("persistent pivot collision at shift {s2}")));
    }
    Ok((neg, true))
}

/// Counting method for [`count_in_window`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Inertia,
    Dense,
}

/// `#{lambda in [E - eta/2, E + eta/2]}`.
pub fn count_in_window(h: &DiscreteHamiltonian, e: f64, eta: f64, method: CountMethod) -> Result<WindowCount> {
    if !(eta >= 0.0) {
        return Err(Error::param("eta", "window width must be non-negative"));
    }
    let (a, b) = (e - 0.5 * eta, e + 0.5 * eta);
    match method {
        CountMethod::Dense => {
            let ev = dense_eigenvalues(&h.matrix);
            Ok(WindowCount {
                count: ev.iter().filter(|&&x| x >= a && x <= b).count(),
                perturbed_edges: 0,
            })
        }
        CountMethod::Inertia => {
            let (below_b, pb) = count_below(h, b, true)?;
            let (below_a, pa) = count_below(h, a, false)?;
            Ok(WindowCount {
                count: below_b.saturating_sub(below_a),
                perturbed_edges: pa as u32 + pb as u32,
            })
        }
    }
}

/// `|| chi_out (H - E)^{-1} chi_in ||` for node index sets, by Lanczos on `X^* X`.
pub fn resolvent_block_norm(
    h: &DiscreteHamiltonian,
    e: f64,
    inner: &[usize],
    outer: &[usize],
) -> Result<f64> {
    let near = count_in_window(h, e, 2e-10, CountMethod::Inertia)?;
    if near.count > 0 {
        return Err(Error::OnSpectrum { energy: e, distance: 1e-10 });
    }
    let dim = h.dim();
    let ldl = BandLdl::factor(&h.band(), e)?;
    let mut in_mask = vec![false; dim];
    let mut out_mask = vec![false; dim];
    for &i in inner {
        in_mask[i] = true;
    }
    for &o in outer {
        out_mask[o] = true;
    }
    if inner.is_empty() || outer.is_empty() {
        return Ok(0.0);
    }
    let mut op = |x: &[Complex64], y: &mut [Complex64]| {
        for i in 0..dim {
            y[i] = if in_mask[i] { x[i] } else { Complex64::new(0.0, 0.0) };
        }
        ldl.solve(y);
        for i in 0..dim {
            if !out_mask[i] {
                y[i] = Complex64::new(0.0, 0.0);
            }
        }
        ldl.solve(y);
        for i in 0..dim {
            if !in_mask[i] {
                y[i] = Complex64::new(0.0, 0.0);
            }
        }
    };
    // start inside the inner block
    let mut lz = Lanczos::new(dim, 0xB10C);
    let mut last = 0.0;
    for k in 1..=200.min(dim) {
        let more = lz.step(&mut op);
        if k >= 4 && (k % 4 == 0 || !more) {
            let (theta, s) = lz.ritz();
            let est = lz.residual_estimate(&s, 0);
            if est <= 1e-10 * theta[0] || !more || (theta[0] - last).abs() <= 1e-12 * theta[0] {
                return Ok(theta[0].max(0.0).sqrt());
            }
            last = theta[0];
        }
        if !more {
            break;
        }
    }
    let (theta, _) = lz.ritz();
    Ok(theta[0].max(0.0).sqrt())
}

/// `t(u) = u s^3 / (s + u)^3` with `s = 10 K1 b0`: increasing on `[0, s/2]`,
/// `t(0) = 0`, `t' <= 1`, and `t(s) = s / 8`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothCutoff {
    pub s: f64,
}

impl SmoothCutoff {
    pub fn new(k1: f64, b0: f64) -> Self {
        SmoothCutoff { s: 10.0 * k1 * b0 }
    }

    pub fn t(&self, u: f64) -> f64 {
        let s = self.s;
        u * s * s * s / (s + u).powi(3)
    }

    pub fn dt(&self, u: f64) -> f64 {
        let s = self.s;
        s * s * s * (s - 2.0 * u) / (s + u).powi(4)
    }
}

/// Piecewise-linear antiderivative `F` of the window indicator on `[c - eta/2, c + eta/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowAntiderivative {
    pub center: f64,
    pub eta: f64,
}

impl WindowAntiderivative {
    pub fn f(&self, v: f64) -> f64 {
        let a = self.center - 0.5 * self.eta;
        (v - a).clamp(0.0, self.eta)
    }

    /// Second antiderivative `G` with `G' = F`, `G = 0` below the window.
    pub fn g(&self, v: f64) -> f64 {
        let a = self.center - 0.5 * self.eta;
        let b = a + self.eta;
        if v <= a {
            0.0
        } else if v <= b {
            0.5 * (v - a) * (v - a)
        } else {
            0.5 * self.eta * self.eta + self.eta * (v - b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_hamiltonian, Grid, LinkPhases};
    use crate::gauges::GaugeKind;
    use crate::randfield::{DisorderRealization, DisorderSpec, MagneticFieldView};
    use std::f64::consts::PI;

    fn random_h(side: f64, h: f64, seed: u64) -> DiscreteHamiltonian {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.0, 0.0], side, h).unwrap();
        let omega = DisorderRealization::generate(&spec, seed, grid.square()).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        build_hamiltonian(&view, &grid, GaugeKind::Column).unwrap()
    }

    #[test]
    fn shift_invert_agrees_with_dense() {
        let h = random_h(4.0, 0.125, 9);
        let d = lowest_eigenpairs(&h, 6, &EigenOptions::default().with_method(EigenMethod::Dense)).unwrap();
        let s = lowest_eigenpairs(&h, 6, &EigenOptions::default().with_method(EigenMethod::ShiftInvert)).unwrap();
        for k in 0..6 {
            assert!((d.values[k] - s.values[k]).abs() < 1e-9, "{k}: {} {}", d.values[k], s.values[k]);
            assert!(s.residuals[k] <= 1e-9);
        }
    }

    #[test]
    fn free_laplacian_lowest() {
        let grid = Grid::new([0.0, 0.0], 4.0, 0.1).unwrap();
        let h = DiscreteHamiltonian::from_phases(grid, LinkPhases::zeros(grid.n), vec![0.0; grid.dim()]);
        let p = lowest_eigenpairs(&h, 1, &EigenOptions::default().with_method(EigenMethod::ShiftInvert)).unwrap();
        let c = (PI * grid.h / grid.side).cos();
        let exact = 2.0 / (grid.h * grid.h) * (2.0 - 2.0 * c);
        assert!((p.values[0] - exact).abs() < 1e-10);
    }

    #[test]
    fn inertia_and_dense_counts_agree() {
        let h = random_h(3.0, 0.125, 2);
        let ev = dense_eigenvalues(&h.matrix);
        for (k, e) in [3.0, 5.5, 8.0, 12.0, 40.0, 100.0].into_iter().enumerate() {
            for eta in [0.1, 1.0, 4.0] {
                let a = count_in_window(&h, e, eta, CountMethod::Inertia).unwrap();
                let b = count_in_window(&h, e, eta, CountMethod::Dense).unwrap();
                assert_eq!(a.count, b.count, "case {k} eta {eta}");
            }
        }
        // window edge placed exactly on an eigenvalue
        let c = count_in_window(&h, ev[3] + 0.05, 0.1, CountMethod::Inertia).unwrap();
        assert_eq!(c.count, ev.iter().filter(|&&x| x >= ev[3] && x <= ev[3] + 0.1).count());
    }

    #[test]
    fn resolvent_norm_matches_dense() {
        let h = random_h(3.0, 0.125, 4);
        let grid = h.grid;
        let e = lowest_eigenpairs(&h, 1, &EigenOptions::default()).unwrap().values[0] - 0.5;
        let inner = grid.nodes_within(0.5);
        let outer = grid.nodes_in_annulus(1.0, 1.5);
        let v = resolvent_block_norm(&h, e, &inner, &outer).unwrap();
        // dense reference
        let eig = crate::linalg::dense_eigen(&h.matrix);
        let n = h.dim();
        let r = faer::Mat::<faer::c64>::from_fn(n, n, |a, b| {
            let mut z = faer::c64::new(0.0, 0.0);
            for k in 0..n {
                z += eig.vectors[(a, k)] * eig.vectors[(b, k)].conj() * (1.0 / (eig.values[k] - e));
            }
            z
        });
        let blk = faer::Mat::<faer::c64>::from_fn(outer.len(), inner.len(), |a, b| r[(outer[a], inner[b])]);
        let sv = blk.singular_values().unwrap();
        assert!((v - sv[0]).abs() < 1e-8 * sv[0], "{v} {}", sv[0]);
        let ev = eig.values[2];
        assert!(matches!(resolvent_block_norm(&h, ev, &inner, &outer), Err(Error::OnSpectrum { .. })));
    }

    #[test]
    fn cutoff_properties() {
        let t = SmoothCutoff::new(3.0, 2.0);
        assert!((t.t(t.s) - t.s / 8.0).abs() < 1e-12);
        assert!((t.dt(0.0) - 1.0).abs() < 1e-15);
        for i in 0..1000 {
            let u = i as f64 * 0.1;
            assert!(t.dt(u) <= 1.0 + 1e-15);
            let fd = (t.t(u + 1e-6) - t.t((u - 1e-6).max(0.0))) / (u + 1e-6 - (u - 1e-6).max(0.0));
            assert!((fd - t.dt(u)).abs() < 1e-5);
        }
        let w = WindowAntiderivative { center: 1.0, eta: 0.5 };
        assert_eq!(w.f(0.0), 0.0);
        assert_eq!(w.f(2.0), 0.5);
        assert!((w.g(1.1) - 0.5 * 0.35 * 0.35).abs() < 1e-15);
        let e = 1e-6;
        for v in [0.5, 0.9, 1.2, 1.4] {
            assert!(((w.g(v + e) - w.g(v - e)) / (2.0 * e) - w.f(v)).abs() < 1e-8);
        }
    }
}
