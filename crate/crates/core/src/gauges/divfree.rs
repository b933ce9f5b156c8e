use std::f64::consts::PI;

use crate::discretize::LinkPhases;

/// Net outflow `sum_y theta_{x -> y}` at every interior node (linear index `j n + i`).
pub fn discrete_divergence(ph: &LinkPhases) -> Vec<f64> {
    let n = ph.n;
    let mut d = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let (ii, jj) = (i as i64, j as i64);
            d[j * n + i] = ph.x_edge(ii, j) - ph.x_edge(ii - 1, j) + ph.y_edge(i, jj) - ph.y_edge(i, jj - 1);
        }
    }
    d
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let out = &mut c[i * n..(i + 1) * n];
            for (o, r) in out.iter_mut().zip(row) {
                *o += aik * r;
            }
        }
    }
    c
}

/// Solve `sum_y (phi_y - phi_x) = rhs_x` with `phi = 0` on the ring, by sine transform.
pub fn dirichlet_poisson(rhs: &[f64], n: usize) -> Vec<f64> {
    let m = (n + 1) as f64;
    let s: Vec<f64> = (0..n * n)
        .map(|k| (PI * ((k / n + 1) * (k % n + 1)) as f64 / m).sin())
        .collect();
    let lam: Vec<f64> = (0..n)
        .map(|p| -4.0 * (0.5 * PI * (p + 1) as f64 / m).sin().powi(2))
        .collect();
    let mut hat = matmul(&matmul(&s, rhs, n), &s, n);
    let scale = (2.0 / m) * (2.0 / m);
    for q in 0..n {
        for p in 0..n {
            hat[q * n + p] *= scale / (lam[p] + lam[q]);
        }
    }
    matmul(&matmul(&s, &hat, n), &s, n)
}

/// Gauge-transform link phases to zero discrete divergence at every interior node.
///
/// `theta'_{x -> y} = theta_{x -> y} - (phi_y - phi_x)` with `phi` vanishing on the
/// Dirichlet ring, so plaquette fluxes and the spectrum are unchanged.
pub fn divergence_free(ph: &LinkPhases) -> LinkPhases {
    let n = ph.n;
    let phi = dirichlet_poisson(&discrete_divergence(ph), n);
    let at = |i: i64, j: i64| -> f64 {
        if i < 0 || j < 0 || i >= n as i64 || j >= n as i64 {
            0.0
        } else {
            phi[j as usize * n + i as usize]
        }
    };
    let mut out = ph.clone();
    for j in 0..n {
        for i in -1..n as i64 {
            let v = ph.x_edge(i, j) - (at(i + 1, j as i64) - at(i, j as i64));
            out.set_x(i, j, v);
        }
    }
    for i in 0..n {
        for j in -1..n as i64 {
            let v = ph.y_edge(i, j) - (at(i as i64, j + 1) - at(i as i64, j));
            out.set_y(i, j, v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{link_phases, Grid};
    use crate::gauges::GaugeKind;
    use crate::randfield::{DisorderRealization, DisorderSpec, MagneticFieldView};

    #[test]
    fn poisson_solution_satisfies_stencil() {
        let n = 9;
        let rhs: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let phi = dirichlet_poisson(&rhs, n);
        let at = |i: i64, j: i64| if i < 0 || j < 0 || i >= n as i64 || j >= n as i64 { 0.0 } else { phi[j as usize * n + i as usize] };
        for j in 0..n as i64 {
            for i in 0..n as i64 {
                let l = at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j);
                assert!((l - rhs[j as usize * n + i as usize]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn divergence_vanishes_and_projection_is_idempotent() {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.0, 0.0], 3.0, 0.125).unwrap();
        let omega = DisorderRealization::generate(&spec, 3, grid.square()).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        let p = link_phases(&view, &grid, GaugeKind::Poincare).unwrap();
        let d0 = discrete_divergence(&p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(d0 > 1e-6);
        let q = divergence_free(&p);
        let d = discrete_divergence(&q).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(d < 1e-12, "{d}");
        let r = divergence_free(&q);
        let diff = q.x.iter().zip(&r.x).chain(q.y.iter().zip(&r.y)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-12);
    }

    #[test]
    fn symmetric_gauge_is_fixed() {
        let spec = DisorderSpec::constant_field(5.0, 0.0);
        let grid = Grid::new([0.0, 0.0], 2.0, 0.125).unwrap();
        let omega = DisorderRealization::generate(&spec, 3, grid.square()).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        let p = link_phases(&view, &grid, GaugeKind::Poincare).unwrap();
        let q = divergence_free(&p);
        let diff = q.x.iter().zip(&p.x).chain(q.y.iter().zip(&p.y)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-12, "{diff}");
    }
}
