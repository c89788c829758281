use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::median;
use super::sample_measurements;
use crate::error::Result;
use crate::estimators::{EstimatorConfig, Measurement};
use crate::geometry::Occluders;
use crate::model::{sample_layout_with, sample_uniform_disk, ScenarioParams};

/// How measurement labels are produced for timing runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelMode {
    /// Labels from a sampled world, as in an experiment.
    #[default]
    Sampled,
    /// Every measurement NLOS: the worst case for inclusion-exclusion.
    AllNlos,
}

#[derive(Debug, Clone)]
pub struct ComplexityConfig {
    pub params: ScenarioParams,
    pub n_values: Vec<usize>,
    pub estimators: Vec<EstimatorConfig>,
    /// Independent measurement sets per N.
    pub repeats: usize,
    /// Query points timed per measurement set.
    pub queries: usize,
    pub seed: u64,
    pub label_mode: LabelMode,
}

impl ComplexityConfig {
    pub fn new(params: ScenarioParams, n_values: Vec<usize>, estimators: Vec<EstimatorConfig>) -> Self {
        Self {
            params,
            n_values,
            estimators,
            repeats: 5,
            queries: 8,
            seed: 0,
            label_mode: LabelMode::Sampled,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub estimator: String,
    pub n: usize,
    pub median_time_us: f64,
    pub mean_time_us: f64,
    pub samples: usize,
}

/// Per-prediction wall time against N for each estimator. Runs
/// sequentially so timings are not perturbed by sibling work. Estimators
/// whose measurement limit is below N are skipped at that N.
pub fn benchmark_complexity(config: &ComplexityConfig) -> Result<Vec<ComplexityRow>> {
    for e in &config.estimators {
        e.validate()?;
    }
    config.params.validate()?;
    let radius = config.params.radius;
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (n as u64).wrapping_mul(super::SEED_STRIDE));
        let mut cases: Vec<(Vec<Measurement>, Vec<_>)> = Vec::with_capacity(config.repeats);
        for _ in 0..config.repeats {
            let occluders = Occluders::new(&sample_layout_with(&config.params, &mut rng));
            let mut data = sample_measurements(&occluders, radius, n, &mut rng);
            if config.label_mode == LabelMode::AllNlos {
                data.iter_mut().for_each(|m| m.los = false);
            }
            let queries: Vec<_> = (0..config.queries)
                .map(|_| sample_uniform_disk(radius, &mut rng))
                .collect();
            cases.push((data, queries));
        }
        for est in &config.estimators {
            if !est.accepts(n) {
                continue;
            }
            let mut times = Vec::with_capacity(config.repeats * config.queries);
            for (data, queries) in &cases {
                for &y in queries {
                    let start = Instant::now();
                    std::hint::black_box(est.predict(data, y, &config.params)?);
                    times.push(start.elapsed().as_secs_f64() * 1e6);
                }
            }
            let samples = times.len();
            let mean_time_us = times.iter().sum::<f64>() / samples.max(1) as f64;
            rows.push(ComplexityRow {
                estimator: est.name().to_string(),
                n,
                median_time_us: median(&mut times).unwrap_or(0.0),
                mean_time_us,
                samples,
            });
        }
    }
    Ok(rows)
}

/// `(N, median time)` pairs for one estimator, in N order.
pub fn series(rows: &[ComplexityRow], estimator: &str) -> (Vec<f64>, Vec<f64>) {
    rows.iter()
        .filter(|r| r.estimator == estimator)
        .map(|r| (r.n as f64, r.median_time_us))
        .unzip()
}

pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut out = String::from("estimator,n,median_time_us,mean_time_us,samples\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.3},{:.3},{}",
            r.estimator, r.n, r.median_time_us, r.mean_time_us, r.samples
        );
    }
    out
}

/// Ordinary least squares: `(slope, intercept, r²)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Slope of `log₂(time)` against N, in bits per measurement.
pub fn log2_slope(ns: &[f64], times: &[f64]) -> f64 {
    let logs: Vec<f64> = times.iter().map(|t| t.log2()).collect();
    least_squares(ns, &logs).0
}

/// Exponent `a` of a fitted power law `time ∝ Nᵃ`.
pub fn power_exponent(ns: &[f64], times: &[f64]) -> f64 {
    let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ly: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    least_squares(&lx, &ly).0
}

/// Coefficient of determination of a straight-line fit of time against N.
pub fn linear_r_squared(ns: &[f64], times: &[f64]) -> f64 {
    least_squares(ns, times).2
}
