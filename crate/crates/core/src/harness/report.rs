use std::fmt::Write as _;
use std::path::Path;

use super::{EstimatorTrial, TrialOutcome};
use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;

pub const REPORT_HEADER: &str = "sweep_value,estimator,mean_rho,std_rho,mean_time_us,median_time_us,fail_count";
pub const TRIAL_LOG_HEADER: &str = "sweep_value,trial,seed,estimator,rho,mean_time_us,error";

/// Predicted-vs-actual counts with LOS as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub true_los: usize,
    pub true_nlos: usize,
    pub false_los: usize,
    pub false_nlos: usize,
}

impl Confusion {
    pub fn record(&mut self, predicted_los: bool, actual_los: bool) {
        match (predicted_los, actual_los) {
            (true, true) => self.true_los += 1,
            (false, false) => self.true_nlos += 1,
            (true, false) => self.false_los += 1,
            (false, true) => self.false_nlos += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_los + self.true_nlos + self.false_los + self.false_nlos
    }

    pub fn misses(&self) -> usize {
        self.false_los + self.false_nlos
    }

    /// ρ = (N_est − N_miss) / N_est.
    pub fn precision(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            return 1.0;
        }
        (n - self.misses()) as f64 / n as f64
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.true_los += other.true_los;
        self.true_nlos += other.true_nlos;
        self.false_los += other.false_los;
        self.false_nlos += other.false_nlos;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub sweep_value: String,
    pub estimator: String,
    /// Trials that produced a score.
    pub trials: usize,
    pub mean_rho: Option<f64>,
    pub std_rho: Option<f64>,
    pub mean_time_us: Option<f64>,
    pub median_time_us: Option<f64>,
    pub fail_count: usize,
    pub confusion: Confusion,
}

impl ReportRow {
    /// Standard error of `mean_rho`.
    pub fn std_error(&self) -> Option<f64> {
        self.std_rho.map(|s| s / (self.trials as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLogRow {
    pub sweep_value: String,
    pub trial: usize,
    pub seed: u64,
    pub estimator: String,
    pub rho: Option<f64>,
    pub mean_time_us: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
    pub trial_log: Vec<TrialLogRow>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn sample_std(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

pub(crate) fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

fn opt(v: Option<f64>, out: &mut String) {
    if let Some(v) = v {
        let _ = write!(out, "{v}");
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl EvaluationReport {
    pub(crate) fn absorb(
        &mut self,
        sweep_value: &str,
        estimators: &[EstimatorConfig],
        outcomes: &[TrialOutcome],
        timing: bool,
        keep_log: bool,
    ) {
        for (e, est) in estimators.iter().enumerate() {
            let mut rhos = Vec::new();
            let mut times = Vec::new();
            let mut fail_count = 0;
            let mut confusion = Confusion::default();
            let mut skipped = true;
            for (t, outcome) in outcomes.iter().enumerate() {
                let trial = &outcome.estimators[e];
                let mut log = TrialLogRow {
                    sweep_value: sweep_value.to_string(),
                    trial: t,
                    seed: outcome.seed,
                    estimator: est.name().to_string(),
                    rho: None,
                    mean_time_us: None,
                    error: None,
                };
                match trial {
                    EstimatorTrial::Skipped => continue,
                    EstimatorTrial::Failed(msg) => {
                        skipped = false;
                        fail_count += 1;
                        log.error = Some(msg.clone());
                    }
                    EstimatorTrial::Scored { confusion: c, times_us } => {
                        skipped = false;
                        rhos.push(c.precision());
                        confusion.merge(c);
                        times.extend_from_slice(times_us);
                        log.rho = Some(c.precision());
                        log.mean_time_us = mean(times_us);
                    }
                }
                if keep_log {
                    self.trial_log.push(log);
                }
            }
            if skipped {
                continue;
            }
            let (mean_time_us, median_time_us) = if timing {
                (mean(&times), median(&mut times))
            } else {
                (None, None)
            };
            self.rows.push(ReportRow {
                sweep_value: sweep_value.to_string(),
                estimator: est.name().to_string(),
                trials: rhos.len(),
                mean_rho: mean(&rhos),
                std_rho: sample_std(&rhos),
                mean_time_us,
                median_time_us,
                fail_count,
                confusion,
            });
        }
    }

    pub fn row(&self, sweep_value: &str, estimator: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.estimator == estimator)
    }

    /// Report table; empty fields mark values that are not available.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&csv_field(&r.sweep_value));
            out.push(',');
            out.push_str(&csv_field(&r.estimator));
            for v in [r.mean_rho, r.std_rho, r.mean_time_us, r.median_time_us] {
                out.push(',');
                opt(v, &mut out);
            }
            let _ = writeln!(out, ",{}", r.fail_count);
        }
        out
    }

    pub fn trial_log_csv(&self) -> String {
        let mut out = String::from(TRIAL_LOG_HEADER);
        out.push('\n');
        for r in &self.trial_log {
            let _ = write!(
                out,
                "{},{},{},{},",
                csv_field(&r.sweep_value),
                r.trial,
                r.seed,
                csv_field(&r.estimator)
            );
            opt(r.rho, &mut out);
            out.push(',');
            opt(r.mean_time_us, &mut out);
            out.push(',');
            out.push_str(&csv_field(r.error.as_deref().unwrap_or("")));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn write_trial_log(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.trial_log_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_precision() {
        let mut c = Confusion::default();
        c.record(true, true);
        c.record(false, false);
        c.record(true, false);
        c.record(false, true);
        assert_eq!(c.total(), 4);
        assert_eq!(c.precision(), 0.5);
    }

    #[test]
    fn stats() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        let s = sample_std(&[1.0, 2.0, 3.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(sample_std(&[0.7]), Some(0.0));
    }

    #[test]
    fn csv_layout() {
        let report = EvaluationReport {
            rows: vec![ReportRow {
                sweep_value: "10".into(),
                estimator: "kNN".into(),
                trials: 2,
                mean_rho: Some(0.75),
                std_rho: Some(0.25),
                mean_time_us: None,
                median_time_us: None,
                fail_count: 1,
                confusion: Confusion::default(),
            }],
            trial_log: Vec::new(),
        };
        assert_eq!(report.to_csv(), format!("{REPORT_HEADER}\n10,kNN,0.75,0.25,,,1\n"));
    }
}
