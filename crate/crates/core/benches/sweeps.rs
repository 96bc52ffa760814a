use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nwheat::derivatives::derivative_sweep;
use nwheat::diagnostics::{envelope_check, envelope_constants, find_n0};
use nwheat::numerics::{Mag, Precision, Scalar};
use nwheat::parallel::{self, ExecMode};
use nwheat::solutions::{evaluate, SolutionId};
use num_rational::BigRational;

const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

fn grid_eval(c: &mut Criterion) {
    let pts: Vec<(Scalar, Scalar)> =
        (0..16).flat_map(|i| (0..16).map(move |j| (Scalar::ratio(i, 8), Scalar::ratio(j - 8, 4)))).collect();
    let target = Mag::from_f64_up(1e-30);
    let mut g = c.benchmark_group("grid_eval_u2");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| parallel::map(mode, &pts, |(x, t)| evaluate(&SolutionId::U2, x, t, target, Precision::default())))
        });
    }
    g.finish();
}

fn n_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("find_n0_u1");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| find_n0(&SolutionId::U1, &Scalar::zero(), 25, Precision::default(), mode))
        });
    }
    g.finish();
}

fn order_sweep(c: &mut Criterion) {
    let orders: Vec<u64> = (1..=64).map(|k| 2 * k * k + 1).collect();
    let t0: Scalar = "sqrt(2)".parse().unwrap();
    let mut g = c.benchmark_group("derivative_orders_u1");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| derivative_sweep(&SolutionId::U1, &orders, &Scalar::ratio(1, 3), &t0, Precision::default(), mode))
        });
    }
    g.finish();
}

fn envelope_grid(c: &mut Criterion) {
    let eps = BigRational::new(1.into(), 2.into());
    let cert = envelope_constants(&eps, Precision::default()).unwrap();
    let xs: Vec<Scalar> = (-20..=20).map(|i| Scalar::from_i64(10 * i)).collect();
    let ts: Vec<Scalar> = (-10..=10).map(Scalar::from_i64).collect();
    let mut g = c.benchmark_group("envelope_grid");
    g.sample_size(10);
    for mode in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &mode, |b, &mode| {
            b.iter(|| envelope_check(&cert, &xs, &ts, Precision::default(), mode))
        });
    }
    g.finish();
}

criterion_group!(sweeps, grid_eval, n_sweep, order_sweep, envelope_grid);
criterion_main!(sweeps);
