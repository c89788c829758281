//! Monte-Carlo evaluation of the predictors: sample a world, sample labelled
//! measurements, predict on a fixed grid and score against ground truth.

mod complexity;
mod grid;
mod report;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use complexity::{
    benchmark_complexity, complexity_csv, linear_r_squared, log2_slope, power_exponent, series, ComplexityConfig,
    ComplexityRow, LabelMode,
};
pub use grid::generate_grid;
pub use report::{Confusion, EvaluationReport, ReportRow, TrialLogRow, REPORT_HEADER, TRIAL_LOG_HEADER};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, Measurement};
use crate::geometry::{ObstacleSegment, Occluders, Point2D};
use crate::model::{sample_layout_with, sample_uniform_disk, ScenarioParams};
use crate::par::Execution;

/// Odd multiplier separating consecutive trial seeds.
pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    master_seed.wrapping_add(trial_index.wrapping_mul(SEED_STRIDE))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Measurement counts N.
    Measurements(Vec<usize>),
    /// Obstacle densities λ in m⁻².
    Density(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: ScenarioParams,
    pub n_measurements: usize,
    pub n_trials: usize,
    pub estimators: Vec<EstimatorConfig>,
    pub grid_size: usize,
    pub sweep: Option<Sweep>,
    pub master_seed: u64,
    /// Evaluate every trial on this world instead of sampling one.
    pub fixed_layout: Option<Vec<ObstacleSegment>>,
    /// Record wall-clock prediction times. Timed reports are not
    /// byte-reproducible.
    pub timing: bool,
    pub trial_log: bool,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(params: ScenarioParams, n_measurements: usize, estimators: Vec<EstimatorConfig>) -> Self {
        Self {
            params,
            n_measurements,
            n_trials: 1000,
            estimators,
            grid_size: 88,
            sweep: None,
            master_seed: 0,
            fixed_layout: None,
            timing: true,
            trial_log: false,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be >= 1"));
        }
        if self.grid_size == 0 {
            return Err(Error::invalid("grid_size", "must be >= 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimators", "at least one estimator is required"));
        }
        for e in &self.estimators {
            e.validate()?;
        }
        match &self.sweep {
            Some(Sweep::Measurements(ns)) if ns.is_empty() => {
                return Err(Error::invalid("sweep", "empty measurement list"));
            }
            Some(Sweep::Density(ls)) if ls.is_empty() => return Err(Error::invalid("sweep", "empty density list")),
            Some(Sweep::Density(ls)) if ls.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) => {
                return Err(Error::invalid("sweep", "densities must be finite and >= 0"));
            }
            _ => {}
        }
        Ok(())
    }

    /// The concrete (label, N, params) evaluated at each sweep value.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        match &self.sweep {
            None => vec![SweepPoint {
                label: self.n_measurements.to_string(),
                n_measurements: self.n_measurements,
                params: self.params.clone(),
            }],
            Some(Sweep::Measurements(ns)) => ns
                .iter()
                .map(|&n| SweepPoint {
                    label: n.to_string(),
                    n_measurements: n,
                    params: self.params.clone(),
                })
                .collect(),
            Some(Sweep::Density(ls)) => ls
                .iter()
                .map(|&l| SweepPoint {
                    label: l.to_string(),
                    n_measurements: self.n_measurements,
                    params: self.params.with_density(l),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub n_measurements: usize,
    pub params: ScenarioParams,
}

/// One estimator's result on one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorTrial {
    /// Not run because N exceeds the estimator's limit.
    Skipped,
    Failed(String),
    Scored {
        confusion: Confusion,
        /// Per-prediction wall time in microseconds (empty when timing is off).
        times_us: Vec<f64>,
    },
}

impl EstimatorTrial {
    pub fn rho(&self) -> Option<f64> {
        match self {
            EstimatorTrial::Scored { confusion, .. } => Some(confusion.precision()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub seed: u64,
    /// Parallel to the configured estimator list.
    pub estimators: Vec<EstimatorTrial>,
}

/// Draws `n` measurement positions uniformly on the disk and labels them
/// against the given world.
pub fn sample_measurements(occluders: &Occluders, radius: f64, n: usize, rng: &mut impl rand::Rng) -> Vec<Measurement> {
    (0..n)
        .map(|_| {
            let p = sample_uniform_disk(radius, rng);
            Measurement::new(p, occluders.is_los(Point2D::ORIGIN, p))
        })
        .collect()
}

struct TrialSetup<'a> {
    params: &'a ScenarioParams,
    n_measurements: usize,
    grid: &'a [Point2D],
    estimators: &'a [EstimatorConfig],
    fixed_layout: Option<&'a [ObstacleSegment]>,
    timing: bool,
}

fn run_trial_with(setup: &TrialSetup<'_>, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let occluders = match setup.fixed_layout {
        Some(obstacles) => Occluders::new(obstacles),
        None => Occluders::new(&sample_layout_with(setup.params, &mut rng)),
    };
    let data = sample_measurements(&occluders, setup.params.radius, setup.n_measurements, &mut rng);
    let truth: Vec<bool> = setup
        .grid
        .iter()
        .map(|&g| occluders.is_los(Point2D::ORIGIN, g))
        .collect();

    let estimators = setup
        .estimators
        .iter()
        .map(|est| {
            if !est.accepts(setup.n_measurements) {
                return EstimatorTrial::Skipped;
            }
            let mut confusion = Confusion::default();
            let mut times_us = Vec::with_capacity(if setup.timing { setup.grid.len() } else { 0 });
            for (&y, &actual) in setup.grid.iter().zip(&truth) {
                let start = setup.timing.then(Instant::now);
                let prediction = match est.predict(&data, y, setup.params) {
                    Ok(p) => p,
                    Err(e) => return EstimatorTrial::Failed(e.to_string()),
                };
                if let Some(start) = start {
                    times_us.push(start.elapsed().as_secs_f64() * 1e6);
                }
                confusion.record(prediction.los, actual);
            }
            EstimatorTrial::Scored { confusion, times_us }
        })
        .collect();
    TrialOutcome { seed, estimators }
}

/// One trial at the configuration's base N and parameters (sweeps are
/// ignored).
pub fn run_trial(config: &ExperimentConfig, trial_seed: u64) -> Result<TrialOutcome> {
    config.validate()?;
    let grid = generate_grid(config.params.radius, config.grid_size)?;
    let setup = TrialSetup {
        params: &config.params,
        n_measurements: config.n_measurements,
        grid: &grid,
        estimators: &config.estimators,
        fixed_layout: config.fixed_layout.as_deref(),
        timing: config.timing,
    };
    Ok(run_trial_with(&setup, trial_seed))
}

/// All trials at every sweep point, aggregated per estimator. Trial `t`
/// uses [`trial_seed`]`(master_seed, t)` at every sweep point.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let grid = generate_grid(config.params.radius, config.grid_size)?;
    let mut report = EvaluationReport::default();
    for point in config.sweep_points() {
        let setup = TrialSetup {
            params: &point.params,
            n_measurements: point.n_measurements,
            grid: &grid,
            estimators: &config.estimators,
            fixed_layout: config.fixed_layout.as_deref(),
            timing: config.timing,
        };
        let outcomes = config.execution.map_indexed(config.n_trials, |t| {
            run_trial_with(&setup, trial_seed(config.master_seed, t as u64))
        });
        report.absorb(
            &point.label,
            &config.estimators,
            &outcomes,
            config.timing,
            config.trial_log,
        );
    }
    Ok(report)
}
