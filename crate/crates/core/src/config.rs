//! Experiment configuration files.
//!
//! Flat `key = value` lines grouped under `[section]` headers; estimators
//! use `[estimator <label>]`. `#` starts a comment. Units are part of the
//! key names (`_m`, `_rad`, `_per_m2`).
//!
//! ```text
//! [scenario]
//! radius_m = 150
//! density_per_m2 = 0.0015
//! max_length_m = 20
//!
//! [experiment]
//! n_trials = 1000
//! sweep = measurements
//! sweep_values = 5, 10, 20, 30
//!
//! [estimator kN-MAP]
//! k = 3
//! ```

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorKind};
use crate::harness::{ExperimentConfig, Sweep};
use crate::layout_io::{clip_to_region, fit_params, read_layout_file};
use crate::model::{PiecewiseDensity, QuadratureSpec, ScenarioParams};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    /// Text after the section name, e.g. the label in `[estimator kNN]`.
    pub argument: Option<String>,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    pub path: PathBuf,
    pub sections: Vec<Section>,
}

pub fn parse_config(text: &str, path: &Path) -> Result<RawConfig> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "unterminated section header".into()))?
                .trim();
            let (name, argument) = match header.split_once(char::is_whitespace) {
                Some((n, a)) => (n.to_string(), Some(a.trim().to_string())),
                None => (header.to_string(), None),
            };
            if name.is_empty() {
                return Err(err(line_no, "empty section name".into()));
            }
            sections.push(Section {
                name: name.to_ascii_lowercase(),
                argument,
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, found `{line}`")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| err(line_no, "key outside of any [section]".into()))?;
        let key = key.trim().to_ascii_lowercase();
        if section.entries.iter().any(|e| e.key == key) {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
        section.entries.push(Entry {
            key,
            value: value.trim().to_string(),
            line: line_no,
        });
    }
    Ok(RawConfig {
        path: path.to_path_buf(),
        sections,
    })
}

/// Reads typed values out of one section, rejecting unknown keys.
struct Reader<'a> {
    path: &'a Path,
    section: &'a Section,
    used: HashSet<&'a str>,
}

impl<'a> Reader<'a> {
    fn new(path: &'a Path, section: &'a Section) -> Self {
        Self {
            path,
            section,
            used: HashSet::new(),
        }
    }

    fn err(&self, entry: &Entry, message: String) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: entry.line,
            message: format!("[{}] {}: {message}", self.section.name, entry.key),
        }
    }

    fn raw(&mut self, key: &'a str) -> Option<&'a Entry> {
        let e = self.section.entries.iter().find(|e| e.key == key)?;
        self.used.insert(key);
        Some(e)
    }

    fn get<T: FromStr>(&mut self, key: &'a str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.err(e, format!("cannot parse `{}`", e.value))),
        }
    }

    fn list<T: FromStr>(&mut self, key: &'a str) -> Result<Option<Vec<T>>> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            // `a..b` expands to the integers a through b.
            if let Some((a, b)) = item.split_once("..") {
                let (a, b): (i64, i64) = match (a.trim().parse(), b.trim().parse()) {
                    (Ok(a), Ok(b)) if a <= b => (a, b),
                    _ => return Err(self.err(e, format!("bad range `{item}`"))),
                };
                for v in a..=b {
                    out.push(
                        v.to_string()
                            .parse::<T>()
                            .map_err(|_| self.err(e, format!("bad range `{item}`")))?,
                    );
                }
            } else {
                out.push(
                    item.parse::<T>()
                        .map_err(|_| self.err(e, format!("cannot parse `{item}`")))?,
                );
            }
        }
        Ok(Some(out))
    }

    fn flag(&mut self, key: &'a str) -> Result<Option<bool>> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        match e.value.to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" | "1" => Ok(Some(true)),
            "off" | "false" | "no" | "0" => Ok(Some(false)),
            _ => Err(self.err(e, format!("expected on/off, found `{}`", e.value))),
        }
    }

    fn finish(self) -> Result<()> {
        match self
            .section
            .entries
            .iter()
            .find(|e| !self.used.contains(e.key.as_str()))
        {
            Some(e) => Err(self.err(e, "unknown key".into())),
            None => Ok(()),
        }
    }
}

/// Pairwise-independence study over a (distance, azimuth separation) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceStudy {
    pub params: ScenarioParams,
    pub quadrature: QuadratureSpec,
    pub distances_m: Vec<f64>,
    pub thetas_rad: Vec<f64>,
}

/// What a configuration file asks to run.
#[derive(Debug, Clone)]
pub enum Study {
    Experiment(ExperimentConfig),
    Independence(IndependenceStudy),
}

fn density_from(
    reader: &mut Reader<'_>,
    edges_key: &'static str,
    weights_key: &'static str,
) -> Result<Option<PiecewiseDensity>> {
    let edges: Option<Vec<f64>> = reader.list(edges_key)?;
    let weights: Option<Vec<f64>> = reader.list(weights_key)?;
    match (edges, weights) {
        (None, None) => Ok(None),
        (Some(e), Some(w)) => PiecewiseDensity::from_weights(e, &w).map(Some),
        _ => Err(Error::Config(format!(
            "`{edges_key}` and `{weights_key}` must be given together"
        ))),
    }
}

fn scenario(raw: &RawConfig, base: &Path) -> Result<(ScenarioParams, Option<Vec<crate::geometry::ObstacleSegment>>)> {
    let section = raw
        .sections
        .iter()
        .find(|s| s.name == "scenario")
        .ok_or_else(|| Error::Config("missing [scenario] section".into()))?;
    let mut r = Reader::new(&raw.path, section);
    let radius: f64 = r
        .get("radius_m")?
        .ok_or_else(|| Error::Config("[scenario] radius_m is required".into()))?;
    let layout_path: Option<String> = r.get("layout")?;
    let fit: bool = r.flag("fit_from_layout")?.unwrap_or(false);
    let per_building: usize = r.get("obstacles_per_building")?.unwrap_or(2);
    let mut density: Option<f64> = r.get("density_per_m2")?;
    let mut max_length: Option<f64> = r.get("max_length_m")?;
    let length = density_from(&mut r, "length_edges_m", "length_weights")?;
    let orientation = density_from(&mut r, "orientation_edges_rad", "orientation_weights")?;
    r.finish()?;

    let layout = match &layout_path {
        Some(p) => {
            let path = base.join(p);
            let file = read_layout_file(&path)?;
            if fit {
                let fitted = fit_params(&file, radius, per_building)?;
                density = Some(fitted.density);
                max_length = Some(fitted.max_length);
            }
            Some(clip_to_region(&file.obstacles, radius))
        }
        None if fit => return Err(Error::Config("fit_from_layout needs a layout".into())),
        None => None,
    };
    let density = density.ok_or_else(|| Error::Config("[scenario] density_per_m2 is required".into()))?;
    let length = match (length, max_length) {
        (Some(l), _) => l,
        (None, Some(m)) => PiecewiseDensity::uniform(0.0, m)?,
        (None, None) => return Err(Error::Config("[scenario] max_length_m is required".into())),
    };
    let orientation = match orientation {
        Some(o) => o,
        None => PiecewiseDensity::uniform(0.0, PI)?,
    };
    Ok((ScenarioParams::new(radius, density, length, orientation)?, layout))
}

fn quadrature(raw: &RawConfig) -> Result<QuadratureSpec> {
    let mut q = QuadratureSpec::default();
    if let Some(section) = raw.sections.iter().find(|s| s.name == "quadrature") {
        let mut r = Reader::new(&raw.path, section);
        if let Some(n) = r.get("nodes_l")? {
            q.nodes_l = n;
        }
        if let Some(n) = r.get("nodes_theta")? {
            q.nodes_theta = n;
        }
        r.finish()?;
    }
    q.validate()?;
    Ok(q)
}

fn estimator(raw: &RawConfig, section: &Section, quad: QuadratureSpec) -> Result<EstimatorConfig> {
    let label = section
        .argument
        .clone()
        .ok_or_else(|| Error::Config(format!("line {}: [estimator] needs a name", section.line)))?;
    let mut r = Reader::new(&raw.path, section);
    let kind: EstimatorKind = match r.get::<String>("kind")? {
        Some(k) => k.parse()?,
        None => label.parse()?,
    };
    let mut est = EstimatorConfig::new(kind);
    est.quadrature = quad;
    if label != kind.name() {
        est.label = Some(label);
    }
    if let Some(k) = r.get("k")? {
        est.k = k;
    }
    if let Some(s) = r.get("sigma_m")? {
        est.sigma = s;
    }
    est.max_bonferroni_order = r.get("max_bonferroni_order")?;
    est.max_measurements = r.get("max_n")?;
    if let Some(c) = r.get("cap")? {
        est.cap = c;
    }
    r.finish()?;
    est.validate()?;
    Ok(est)
}

/// Builds the study described by a parsed file. Relative layout paths are
/// resolved against `base`.
pub fn build_study(raw: &RawConfig, base: &Path) -> Result<Study> {
    let known = ["scenario", "experiment", "quadrature", "estimator", "independence"];
    if let Some(s) = raw.sections.iter().find(|s| !known.contains(&s.name.as_str())) {
        return Err(Error::Parse {
            path: raw.path.clone(),
            line: s.line,
            message: format!("unknown section [{}]", s.name),
        });
    }
    let (params, layout) = scenario(raw, base)?;
    let quad = quadrature(raw)?;

    if let Some(section) = raw.sections.iter().find(|s| s.name == "independence") {
        let mut r = Reader::new(&raw.path, section);
        let distances_m: Vec<f64> = r.list("distances_m")?.unwrap_or_else(|| vec![params.radius]);
        let thetas_rad = match r.list::<f64>("thetas_rad")? {
            Some(t) => t,
            None => {
                let n: usize = r.get("theta_count")?.unwrap_or(33);
                if n < 2 {
                    return Err(Error::invalid("theta_count", "must be >= 2"));
                }
                (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
            }
        };
        r.finish()?;
        return Ok(Study::Independence(IndependenceStudy {
            params,
            quadrature: quad,
            distances_m,
            thetas_rad,
        }));
    }

    let estimators = raw
        .sections
        .iter()
        .filter(|s| s.name == "estimator")
        .map(|s| estimator(raw, s, quad))
        .collect::<Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(params, 10, estimators);
    cfg.fixed_layout = layout;
    if let Some(section) = raw.sections.iter().find(|s| s.name == "experiment") {
        let mut r = Reader::new(&raw.path, section);
        if let Some(n) = r.get("n_measurements")? {
            cfg.n_measurements = n;
        }
        if let Some(n) = r.get("n_trials")? {
            cfg.n_trials = n;
        }
        if let Some(n) = r.get("grid_size")? {
            cfg.grid_size = n;
        }
        if let Some(s) = r.get("master_seed")? {
            cfg.master_seed = s;
        }
        if let Some(t) = r.flag("timing")? {
            cfg.timing = t;
        }
        if let Some(e) = r.get::<Execution>("execution")? {
            cfg.execution = e;
        }
        let axis: Option<String> = r.get("sweep")?;
        cfg.sweep = match axis.as_deref() {
            None | Some("none") => None,
            Some("measurements") | Some("n") => Some(Sweep::Measurements(
                r.list("sweep_values")?
                    .ok_or_else(|| Error::Config("sweep_values is required".into()))?,
            )),
            Some("density") | Some("lambda") => Some(Sweep::Density(
                r.list("sweep_values")?
                    .ok_or_else(|| Error::Config("sweep_values is required".into()))?,
            )),
            Some(other) => return Err(Error::Config(format!("unknown sweep axis `{other}`"))),
        };
        r.finish()?;
    }
    cfg.validate()?;
    Ok(Study::Experiment(cfg))
}

pub fn load_study(path: &Path) -> Result<Study> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw = parse_config(&text, path)?;
    build_study(&raw, path.parent().unwrap_or(Path::new(".")))
}
