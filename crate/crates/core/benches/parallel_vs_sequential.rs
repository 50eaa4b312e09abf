use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fracpearson::simulate::{fractional_paths, SimConfig, Start};
use fracpearson::spectral::{QuadConfig, SpectralTable};
use fracpearson::{DiffusionParams, Execution};

fn paths(c: &mut Criterion) {
    let p = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut g = c.benchmark_group("fractional_paths");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let cfg = SimConfig {
            dt: 1e-3,
            n_paths: 200,
            exec,
            ..SimConfig::default()
        };
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &cfg,
            |b, cfg| {
                b.iter(|| {
                    fractional_paths(&p, 0.7, &grid, Start::Stationary, cfg, black_box(7)).unwrap()
                })
            },
        );
    }
    g.finish();
}

fn density_table(c: &mut Criterion) {
    let p = DiffusionParams::rg(1.0, 5.0, 2.0).unwrap();
    let xs: Vec<f64> = (1..=40).map(|i| 0.1 * i as f64).collect();
    let mut g = c.benchmark_group("spectral_table");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let cfg = QuadConfig {
            exec,
            ..QuadConfig::default()
        };
        g.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &cfg,
            |b, cfg| b.iter(|| SpectralTable::build(&p, 1.0, &xs, &[1.0], 1.0, cfg).unwrap()),
        );
    }
    g.finish();
}

criterion_group!(benches, paths, density_table);
criterion_main!(benches);
