use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spectral_bench::{sixty_degree_wedge, unit_half_plane_rectangle};
use spectral_core::assembly2d::{assemble, conformal_chart, richardson_spectrum, spectrum_2d};
use spectral_core::domains::{DriftSpec, TensorSpec};
use spectral_core::eigensolve::SolverPath;
use spectral_core::sturm_liouville::{ball_problem, ball_spectrum, gap_wedge, sl_eigs};

fn radial(c: &mut Criterion) {
    let mut g = c.benchmark_group("ball_first_eigenvalue");
    let prob = ball_problem(2, 1.0, 8.0, 0).unwrap();
    for grid in [1024, 8192] {
        g.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &n| {
            b.iter(|| sl_eigs(black_box(&prob), 1, n).unwrap())
        });
    }
    g.finish();
    c.bench_function("ball_spectrum_modes_0_to_3", |b| {
        b.iter(|| ball_spectrum(2, 1.0, black_box(2.0), 3, 4096).unwrap())
    });
}

fn wedge(c: &mut Criterion) {
    let dom = sixty_degree_wedge();
    let mut g = c.benchmark_group("gap_wedge");
    g.sample_size(20);
    for grid in [512, 2048] {
        g.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &n| {
            b.iter(|| gap_wedge(black_box(&dom), n).unwrap())
        });
    }
    g.finish();
}

fn two_dimensional(c: &mut Criterion) {
    let chart = conformal_chart(&unit_half_plane_rectangle()).unwrap();
    let (t, d) = (TensorSpec::identity(), DriftSpec::zero());
    let mut g = c.benchmark_group("half_plane_rectangle");
    g.sample_size(10);
    g.bench_function("assemble_64", |b| b.iter(|| assemble(black_box(&chart), &t, &d, (64, 64)).unwrap()));
    let pencil = assemble(&chart, &t, &d, (32, 32)).unwrap();
    g.bench_function("dense_32_count_10", |b| {
        b.iter(|| spectrum_2d(black_box(&pencil), 10, SolverPath::Dense).unwrap())
    });
    let pencil = assemble(&chart, &t, &d, (64, 64)).unwrap();
    g.bench_function("iterative_64_count_10", |b| {
        b.iter(|| spectrum_2d(black_box(&pencil), 10, SolverPath::Iterative).unwrap())
    });
    g.bench_function("richardson_64_count_10", |b| {
        b.iter(|| richardson_spectrum(black_box(&chart), &t, &d, (64, 64), 10, SolverPath::Auto).unwrap())
    });
    g.finish();
}

criterion_group!(benches, radial, wedge, two_dimensional);
criterion_main!(benches);
