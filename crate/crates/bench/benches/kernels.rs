use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use randmag::discretize::link_phases;
use randmag::eigensolve::{count_below, lowest_eigenpairs, EigenMethod, EigenOptions};
use randmag::gauges::GaugeKind;
use randmag::MagneticFieldView;
use randmag_bench::{example_field, example_hamiltonian};

fn phases(c: &mut Criterion) {
    let mut g = c.benchmark_group("link_phases");
    for side in [2.0, 4.0] {
        let (spec, omega, grid) = example_field(side, 0.125);
        let view = MagneticFieldView::new(&spec, &omega);
        for gauge in [GaugeKind::Column, GaugeKind::Alpha1, GaugeKind::Poincare] {
            g.bench_with_input(BenchmarkId::new(format!("{gauge:?}"), side), &gauge, |b, &gauge| {
                b.iter(|| link_phases(&view, &grid, gauge).unwrap())
            });
        }
    }
    g.finish();
}

fn inertia(c: &mut Criterion) {
    let mut g = c.benchmark_group("band_ldl_inertia");
    for side in [4.0, 8.0] {
        let h = example_hamiltonian(side, 0.125);
        g.bench_with_input(BenchmarkId::from_parameter(h.dim()), &h, |b, h| {
            b.iter(|| count_below(h, 6.0, false).unwrap())
        });
    }
    g.finish();
}

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("lowest_eigenpairs");
    g.sample_size(10);
    let h = example_hamiltonian(6.0, 0.125);
    let opts = EigenOptions::default().with_method(EigenMethod::ShiftInvert);
    g.bench_function("shift_invert_m4", |b| b.iter(|| lowest_eigenpairs(&h, 4, &opts).unwrap()));
    let small = example_hamiltonian(3.0, 0.125);
    let dense = EigenOptions::default().with_method(EigenMethod::Dense);
    g.bench_function("dense_m4", |b| b.iter(|| lowest_eigenpairs(&small, 4, &dense).unwrap()));
    g.finish();
}

criterion_group!(benches, phases, inertia, eigen);
criterion_main!(benches);
