//! Throughput benchmarks for the data-parallel hot paths. Run with the
//! default features for the rayon-backed build and with
//! `--no-default-features` for the sequential fallback; within the parallel
//! build each group also reports a single-thread baseline so the speedup is
//! visible from one invocation.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use varspace::differences::{ball_means, besov_norm_differences};
use varspace::exponents::{weights_from_smoothness, SmoothnessFunction, VariableExponent};
use varspace::family::{make_family_sample, Family};
use varspace::frequency::{besov_norm_fourier, build_resolution_of_unity, peetre_maximal};
use varspace::grid::{Grid, SampledFunction};

fn tau() -> f64 {
    2.0 * std::f64::consts::PI
}

fn sample(grid: Grid, seed: u64) -> SampledFunction {
    make_family_sample(&Family::BandLimitedRandom { level: 6, decay: 1.5 }, grid, seed, 0).unwrap()
}

/// Run a closure in the default pool and in a 1-thread pool (parallel build),
/// or just once (sequential build).
fn bench_both<F: Fn() + Sync>(c: &mut Criterion, name: &str, f: F) {
    let mut group = c.benchmark_group(name);
    #[cfg(feature = "parallel")]
    {
        group.bench_function(BenchmarkId::new("threads", "default"), |b| b.iter(&f));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function(BenchmarkId::new("threads", "1"), |b| {
            b.iter(|| pool.install(&f))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function(BenchmarkId::new("threads", "sequential"), |b| b.iter(&f));
    group.finish();
}

fn bench_peetre(c: &mut Criterion) {
    let grid = Grid::line(512, tau()).unwrap();
    let f = sample(grid, 1);
    bench_both(c, "peetre_maximal_n512", || {
        black_box(peetre_maximal(black_box(&f), 3, 2.0).unwrap());
    });
}

fn bench_ball_means(c: &mut Criterion) {
    let grid = Grid::line(512, tau()).unwrap();
    let f = sample(grid, 2);
    bench_both(c, "ball_means_n512", || {
        black_box(ball_means(black_box(&f), 0.25, 2).unwrap());
    });
}

fn bench_fourier_norm(c: &mut Criterion) {
    let grid = Grid::line(512, tau()).unwrap();
    let f = sample(grid, 3);
    let s = SmoothnessFunction::constant(grid, 1.0).unwrap();
    let w = weights_from_smoothness(&s, 6).unwrap();
    let bank = build_resolution_of_unity(grid, 6).unwrap();
    let p = VariableExponent::constant(grid, 2.0).unwrap();
    let q = VariableExponent::constant(grid, 2.0).unwrap();
    bench_both(c, "besov_norm_fourier_n512", || {
        black_box(besov_norm_fourier(black_box(&f), &bank, &w, &p, &q).unwrap());
    });
}

fn bench_difference_norm(c: &mut Criterion) {
    let grid = Grid::line(256, tau()).unwrap();
    let f = sample(grid, 4);
    let s = SmoothnessFunction::constant(grid, 1.0).unwrap();
    let p = VariableExponent::constant(grid, 2.0).unwrap();
    let q = VariableExponent::constant(grid, 2.0).unwrap();
    bench_both(c, "besov_norm_differences_n256", || {
        black_box(besov_norm_differences(black_box(&f), &s, &p, &q, 2, (-5, 5)).unwrap());
    });
}

fn bench_luxemburg(c: &mut Criterion) {
    let grid = Grid::line(512, tau()).unwrap();
    let p = VariableExponent::new(
        grid,
        (0..grid.len()).map(|i| 2.0 + grid.coord(i)[0].cos()).collect(),
    )
    .unwrap();
    let f = SampledFunction::from_fn(grid, |x| Complex64::new((3.0 * x[0]).sin() + 0.2, 0.0));
    let mut group = c.benchmark_group("luxemburg_norm_n512");
    group.bench_function("variable_p", |b| {
        b.iter(|| black_box(varspace::luxemburg_norm(black_box(&f), &p).unwrap()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_peetre,
    bench_ball_means,
    bench_fourier_norm,
    bench_difference_norm,
    bench_luxemburg
);
criterion_main!(benches);
