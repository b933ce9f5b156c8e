use super::report::{CellStatus, CriterionKind, ExperimentReport};
use super::stats::{linear_fit, mean_sem};
use super::{fmt_err, hamiltonian, par_map, sample, ExperimentConfig};
use crate::eigensolve::{count_in_window, CountMethod};
use crate::error::Result;
use crate::gauges::GaugeKind;

/// Mean counts below which window-doubling ratios are not tested.
pub const MIN_MEAN_COUNT: f64 = 5.0;

/// Average eigenvalue counts in `[E - eta/2, E + eta/2]` over realizations,
/// with the window-doubling linearity, monotonicity and volume-slope checks.
///
/// All windows of one box size share the same realizations.
pub fn wegner_scan(config: &ExperimentConfig) -> Result<ExperimentReport> {
    wegner_scan_with(config, CountMethod::Inertia)
}

pub(crate) fn wegner_scan_with(config: &ExperimentConfig, method: CountMethod) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(config);
    let spec = &config.disorder;
    let (elo, ehi) = (spec.b0 / 2.0, spec.k1 * spec.b0);
    let es = &config.window.energies;
    let etas = &config.window.etas;
    let r = config.realizations;
    // means[li][ei][wi]
    let mut means = vec![vec![vec![f64::NAN; etas.len()]; es.len()]; config.grid.sides.len()];
    for (li, &side) in config.grid.sides.iter().enumerate() {
        let grid = config.grid_at([0.0, 0.0], side)?;
        let runs: Vec<Result<Vec<usize>>> = par_map(r, |ri| {
            let omega = sample(config, &grid, li as u64, ri as u64)?;
            let h = hamiltonian(config, &omega, &grid, GaugeKind::Column)?;
            let mut out = Vec::with_capacity(es.len() * etas.len());
            for &e in es {
                for &eta in etas {
                    out.push(count_in_window(&h, e, eta, method)?.count);
                }
            }
            Ok(out)
        });
        let ok: Vec<&Vec<usize>> = runs.iter().filter_map(|x| x.as_ref().ok()).collect();
        let first_err = runs.iter().find_map(|x| x.as_ref().err()).map(fmt_err);
        for (ei, &e) in es.iter().enumerate() {
            for (wi, &eta) in etas.iter().enumerate() {
                let xs: Vec<f64> = ok.iter().map(|v| v[ei * etas.len() + wi] as f64).collect();
                let (m, sem) = mean_sem(&xs);
                let mut note = String::new();
                if !(elo..=ehi).contains(&e) {
                    note.push_str("energy outside [b0/2, K1 b0]");
                }
                let status = match &first_err {
                    Some(err) => {
                        note = format!("{} realizations failed: {err}", r - ok.len());
                        CellStatus::Failed
                    }
                    None => CellStatus::Ok,
                };
                rep.cell(format!("count L={side} E={e} eta={eta}"))
                    .l(side)
                    .energy(e)
                    .eta(eta)
                    .realizations(xs.len())
                    .value(m)
                    .uncertainty(sem)
                    .status(status)
                    .note(note);
                if status == CellStatus::Ok {
                    means[li][ei][wi] = m;
                }
            }
        }
    }
    let mut tested = 0;
    for (li, &side) in config.grid.sides.iter().enumerate() {
        for (ei, &e) in es.iter().enumerate() {
            let row = &means[li][ei];
            for wi in 0..etas.len().saturating_sub(1) {
                let (a, b) = (row[wi], row[wi + 1]);
                if !(b >= MIN_MEAN_COUNT) {
                    continue;
                }
                tested += 1;
                let ratio = a / b;
                let expect = etas[wi] / etas[wi + 1];
                let (lo, hi) = (0.75 * expect, 1.25 * expect);
                rep.criterion(
                    format!("wegner ratio L={side} E={e} eta {}/{} in [{lo}, {hi}]", etas[wi], etas[wi + 1]),
                    CriterionKind::Scaling,
                    ratio,
                    expect,
                    ratio >= lo && ratio <= hi,
                );
            }
            let mono = row.windows(2).all(|w| w[0] >= w[1]);
            rep.criterion(
                format!("wegner monotone in eta L={side} E={e}"),
                CriterionKind::Scaling,
                row.iter().copied().fold(f64::NAN, f64::max),
                f64::NAN,
                mono && row.iter().all(|v| v.is_finite()),
            );
        }
    }
    rep.cell("ratios tested").value(tested as f64).note(format!("pairs with smaller-window mean >= {MIN_MEAN_COUNT}"));
    if config.grid.sides.len() >= 2 {
        for (ei, &e) in es.iter().enumerate() {
            for (wi, &eta) in etas.iter().enumerate() {
                let ys: Vec<f64> = means.iter().map(|m| m[ei][wi]).collect();
                if ys.iter().any(|&y| !(y >= MIN_MEAN_COUNT)) {
                    continue;
                }
                let lx: Vec<f64> = config.grid.sides.iter().map(|l| l.ln()).collect();
                let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
                let (slope, _) = linear_fit(&lx, &ly);
                rep.criterion(
                    format!("volume slope E={e} eta={eta} in [1.5, 2.5]"),
                    CriterionKind::Scaling,
                    slope,
                    2.0,
                    (1.5..=2.5).contains(&slope),
                );
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{sample_config, ExperimentKind};

    #[test]
    fn inertia_counts_match_dense_oracle() {
        let mut cfg = sample_config(ExperimentKind::WegnerScan);
        cfg.grid.sides = vec![2.0, 2.5];
        cfg.window.energies = vec![4.0, 6.5];
        cfg.window.etas = vec![2.0, 1.0, 0.5];
        cfg.realizations = 2;
        let a = wegner_scan_with(&cfg, CountMethod::Inertia).unwrap();
        let b = wegner_scan_with(&cfg, CountMethod::Dense).unwrap();
        let cells: Vec<_> = a.cells.iter().filter(|c| c.label.starts_with("count")).collect();
        assert!(cells.len() >= 10);
        for (x, y) in cells.iter().zip(b.cells.iter()) {
            assert_eq!(x.value, y.value, "{}", x.label);
        }
    }

    #[test]
    fn empty_window_below_spectrum() {
        let mut cfg = sample_config(ExperimentKind::WegnerScan);
        cfg.window.energies = vec![-5.0];
        cfg.window.etas = vec![0.5];
        let r = wegner_scan(&cfg).unwrap();
        assert_eq!(r.cells[0].value, Some(0.0));
        assert!(r.cells[0].note.contains("outside"));
    }
}
