use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use losmap::estimators::{EstimatorConfig, EstimatorKind};
use losmap::geometry::Occluders;
use losmap::harness::{generate_grid, run_experiment, sample_measurements, ExperimentConfig};
use losmap::model::{sample_layout_with, ScenarioParams};
use losmap::par::Execution;

fn modes() -> Vec<Execution> {
    if cfg!(feature = "parallel") {
        vec![Execution::Sequential, Execution::Parallel]
    } else {
        vec![Execution::Sequential]
    }
}

fn experiment(c: &mut Criterion) {
    let params = ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap();
    let est = vec![
        EstimatorConfig::new(EstimatorKind::KnMap),
        EstimatorConfig::new(EstimatorKind::Knn),
        EstimatorConfig::new(EstimatorKind::NaiveBayes),
    ];
    let mut group = c.benchmark_group("experiment_20_trials");
    group.sample_size(10);
    for mode in modes() {
        let mut cfg = ExperimentConfig::new(params.clone(), 10, est.clone());
        cfg.n_trials = 20;
        cfg.timing = false;
        cfg.execution = mode;
        group.bench_with_input(BenchmarkId::from_parameter(mode), &cfg, |b, cfg| {
            b.iter(|| run_experiment(cfg).unwrap())
        });
    }
    group.finish();
}

fn grid_map(c: &mut Criterion) {
    let params = ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let occ = Occluders::new(&sample_layout_with(&params, &mut rng));
    let data = sample_measurements(&occ, 150.0, 8, &mut rng);
    let grid = generate_grid(150.0, 88).unwrap();
    let est = EstimatorConfig::new(EstimatorKind::Map);
    let mut group = c.benchmark_group("map_grid_88");
    group.sample_size(10);
    for mode in modes() {
        group.bench_function(BenchmarkId::from_parameter(mode), |b| {
            b.iter(|| mode.map_slice(&grid, |&y| est.predict(&data, y, &params).unwrap().los))
        });
    }
    group.finish();
}

criterion_group!(benches, experiment, grid_map);
criterion_main!(benches);
