//! LOS/NLOS predictors behind one configuration type.
//!
//! Bayesian predictors (MAP, its Bonferroni early-exit variant, kN-MAP and
//! naive Bayes) evaluate the blockage model; kNN, kNS and the Parzen
//! window only look at measurement geometry. Every tie resolves to NLOS.

mod bayes;
mod neighbors;

use std::fmt;
use std::str::FromStr;

pub use bayes::{
    kn_map_predict, map_predict, map_predict_bonferroni, map_predict_capped, naive_bayes_predict, nearest_angular,
};
pub use neighbors::{knn_predict, kns_predict, parzen_predict};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::model::{QuadratureSpec, ScenarioParams, EXACT_POINT_CAP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub position: Point2D,
    /// `true` for LOS (label 1), `false` for NLOS (label 0).
    pub los: bool,
}

impl Measurement {
    pub fn new(position: Point2D, los: bool) -> Self {
        Self { position, los }
    }

    pub fn label(&self) -> u8 {
        self.los as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub los: bool,
    /// `P(y = LOS | data)`; absent for purely geometric predictors and for
    /// early Bonferroni decisions.
    pub posterior: Option<f64>,
    /// Certified interval for the posterior (Bonferroni only).
    pub posterior_bounds: Option<(f64, f64)>,
    /// Distinct joint-LOS probabilities evaluated.
    pub terms_evaluated: usize,
    /// Bonferroni order at which the decision was certified.
    pub decided_at_order: Option<usize>,
}

impl Prediction {
    pub(crate) fn vote(los: bool) -> Self {
        Self {
            los,
            posterior: None,
            posterior_bounds: None,
            terms_evaluated: 0,
            decided_at_order: None,
        }
    }

    pub(crate) fn bayes(posterior: f64, terms_evaluated: usize) -> Self {
        Self {
            los: posterior > 0.5,
            posterior: Some(posterior),
            posterior_bounds: None,
            terms_evaluated,
            decided_at_order: None,
        }
    }

    pub fn label(&self) -> u8 {
        self.los as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Map,
    MapBonferroni,
    KnMap,
    Knn,
    Kns,
    Parzen,
    NaiveBayes,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 7] = [
        EstimatorKind::Map,
        EstimatorKind::MapBonferroni,
        EstimatorKind::KnMap,
        EstimatorKind::Knn,
        EstimatorKind::Kns,
        EstimatorKind::Parzen,
        EstimatorKind::NaiveBayes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Map => "MAP",
            EstimatorKind::MapBonferroni => "MAP-Bonferroni",
            EstimatorKind::KnMap => "kN-MAP",
            EstimatorKind::Knn => "kNN",
            EstimatorKind::Kns => "kNS",
            EstimatorKind::Parzen => "PG",
            EstimatorKind::NaiveBayes => "NB",
        }
    }

    pub fn default_k(self) -> usize {
        match self {
            EstimatorKind::Kns => 1,
            _ => 3,
        }
    }

    pub fn is_bayesian(self) -> bool {
        matches!(
            self,
            EstimatorKind::Map | EstimatorKind::MapBonferroni | EstimatorKind::KnMap | EstimatorKind::NaiveBayes
        )
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "map" => EstimatorKind::Map,
            "mapbonferroni" | "bonferroni" => EstimatorKind::MapBonferroni,
            "knmap" => EstimatorKind::KnMap,
            "knn" => EstimatorKind::Knn,
            "kns" => EstimatorKind::Kns,
            "pg" | "parzen" | "parzengaussian" => EstimatorKind::Parzen,
            "nb" | "naivebayes" => EstimatorKind::NaiveBayes,
            _ => return Err(Error::Config(format!("unknown estimator `{s}`"))),
        })
    }
}

/// Default Parzen window width in meters.
pub const DEFAULT_SIGMA_M: f64 = 1.8;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    /// Report label; defaults to the kind's name.
    pub label: Option<String>,
    /// Neighbour count for kN-MAP, kNN and kNS.
    pub k: usize,
    /// Parzen window standard deviation in meters.
    pub sigma: f64,
    /// Highest Bonferroni order tried before the exact fallback; `None` exhausts.
    pub max_bonferroni_order: Option<usize>,
    pub quadrature: QuadratureSpec,
    /// Largest measurement count accepted by exact inclusion-exclusion.
    pub cap: usize,
    /// The harness skips this estimator when N exceeds this.
    pub max_measurements: Option<usize>,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            label: None,
            k: kind.default_k(),
            sigma: DEFAULT_SIGMA_M,
            max_bonferroni_order: None,
            quadrature: QuadratureSpec::default(),
            cap: EXACT_POINT_CAP,
            max_measurements: None,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_max_measurements(mut self, n: usize) -> Self {
        self.max_measurements = Some(n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be >= 1"));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid("sigma", "must be finite and > 0"));
        }
        if self.max_bonferroni_order == Some(0) {
            return Err(Error::invalid("max_bonferroni_order", "must be >= 1"));
        }
        self.quadrature.validate()
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.kind.name())
    }

    pub fn accepts(&self, n: usize) -> bool {
        self.max_measurements.is_none_or(|max| n <= max)
    }

    pub fn predict(&self, data: &[Measurement], y: Point2D, params: &ScenarioParams) -> Result<Prediction> {
        let q = &self.quadrature;
        match self.kind {
            EstimatorKind::Map => map_predict_capped(data, y, params, q, self.cap),
            EstimatorKind::MapBonferroni => {
                map_predict_bonferroni(data, y, params, q, self.max_bonferroni_order, self.cap)
            }
            EstimatorKind::KnMap => kn_map_predict(data, y, params, q, self.k),
            EstimatorKind::Knn => knn_predict(data, y, self.k),
            EstimatorKind::Kns => kns_predict(data, y, self.k, params.radius),
            EstimatorKind::Parzen => parzen_predict(data, y, self.sigma),
            EstimatorKind::NaiveBayes => naive_bayes_predict(data, y, params, q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.name().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert_eq!("kn_map".parse::<EstimatorKind>().unwrap(), EstimatorKind::KnMap);
        assert!("svm".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn default_ks() {
        assert_eq!(EstimatorConfig::new(EstimatorKind::KnMap).k, 3);
        assert_eq!(EstimatorConfig::new(EstimatorKind::Knn).k, 3);
        assert_eq!(EstimatorConfig::new(EstimatorKind::Kns).k, 1);
        assert_eq!(EstimatorConfig::new(EstimatorKind::Parzen).sigma, 1.8);
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(EstimatorKind::Knn).with_k(0).validate().is_err());
        assert!(EstimatorConfig::new(EstimatorKind::Parzen)
            .with_sigma(0.0)
            .validate()
            .is_err());
        let cfg = EstimatorConfig::new(EstimatorKind::Map).with_max_measurements(10);
        assert!(cfg.accepts(10) && !cfg.accepts(11));
    }
}
