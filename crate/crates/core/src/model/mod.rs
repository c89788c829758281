//! Poisson segment-blockage model: blocker expectations, joint and
//! conditional LOS probabilities, layout sampling.
//!
//! Positions passed as bare points are relative to a base station at the
//! origin. Link-based entry points accept any common BS endpoint.

mod density;
mod fan;
mod independence;
mod joint;
mod sampling;

use std::f64::consts::PI;

pub use density::{PiecewiseDensity, MASS_TOLERANCE};
pub use independence::pairwise_independence_error;
pub(crate) use joint::NeumaierSum;
pub use joint::{joint_event_prob, joint_event_prob_capped, JointLos, EXACT_POINT_CAP};
pub use sampling::{sample_layout, sample_layout_with, sample_uniform_disk};

use crate::error::{Error, Result};
use crate::geometry::{blocking_quad, union_area, Link, ObstacleSegment, Point2D, GEOM_EPS};
use crate::quadrature::GaussLegendre;
use fan::{fan_union_area, FanScratch, RandomLength};

/// Minimum Gauss–Legendre order on any integration panel.
pub const MIN_PANEL_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    /// Cell radius in meters.
    pub radius: f64,
    /// Blocker density in m⁻².
    pub density: f64,
    /// Obstacle length density (meters).
    pub length: PiecewiseDensity,
    /// Obstacle orientation density on `[0, π]`.
    pub orientation: PiecewiseDensity,
}

impl ScenarioParams {
    pub fn new(radius: f64, density: f64, length: PiecewiseDensity, orientation: PiecewiseDensity) -> Result<Self> {
        let p = Self {
            radius,
            density,
            length,
            orientation,
        };
        p.validate()?;
        Ok(p)
    }

    /// `L ~ U(0, max_length)`, `Θ ~ U(0, π)`.
    pub fn uniform(radius: f64, density: f64, max_length: f64) -> Result<Self> {
        Self::new(
            radius,
            density,
            PiecewiseDensity::uniform(0.0, max_length)?,
            PiecewiseDensity::uniform(0.0, PI)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::invalid("radius", "must be finite and > 0"));
        }
        if !(self.density >= 0.0) || !self.density.is_finite() {
            return Err(Error::invalid("density", "must be finite and >= 0"));
        }
        if self.length.support().0 < 0.0 {
            return Err(Error::invalid("length", "support must be non-negative"));
        }
        let (lo, hi) = self.orientation.support();
        if lo < 0.0 || hi > PI + 1e-12 {
            return Err(Error::invalid("orientation", "support must lie within [0, π]"));
        }
        Ok(())
    }

    pub fn max_length(&self) -> f64 {
        self.length.support().1
    }

    /// Radius of the disk that holds every center able to block an in-cell link.
    pub fn sampling_radius(&self) -> f64 {
        self.radius + 0.5 * self.max_length()
    }

    pub fn with_density(&self, density: f64) -> Self {
        Self {
            density,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub nodes_l: usize,
    pub nodes_theta: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_l: 32,
            nodes_theta: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes_l: usize, nodes_theta: usize) -> Result<Self> {
        let q = Self { nodes_l, nodes_theta };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_l < MIN_PANEL_NODES || self.nodes_theta < MIN_PANEL_NODES {
            return Err(Error::invalid(
                "quadrature",
                format!("need at least {MIN_PANEL_NODES} nodes per axis"),
            ));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            nodes_l: 2 * self.nodes_l,
            nodes_theta: 2 * self.nodes_theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Sampled { seed: u64 },
    Ingested,
}

/// A concrete world: the obstacles that decide ground-truth visibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub obstacles: Vec<ObstacleSegment>,
    pub provenance: Provenance,
}

impl Layout {
    pub fn empty() -> Self {
        Self {
            obstacles: Vec::new(),
            provenance: Provenance::Ingested,
        }
    }

    pub fn is_los(&self, bs: Point2D, x: Point2D) -> bool {
        crate::geometry::is_los(&self.obstacles, bs, x)
    }
}

/// Points relative to the shared BS; errors on empty or non-concurrent sets.
fn link_points(links: &[Link]) -> Result<Vec<Point2D>> {
    let first = links.first().ok_or(Error::EmptyLinks)?;
    let bs = first.endpoint_a;
    links
        .iter()
        .map(|l| {
            if l.endpoint_a.distance(bs) > GEOM_EPS {
                Err(Error::LinksNotConcurrent)
            } else {
                Ok(l.endpoint_b - bs)
            }
        })
        .collect()
}

/// Expected number of blockers touching at least one of the links.
pub fn expected_k(links: &[Link], params: &ScenarioParams, quad: &QuadratureSpec) -> Result<f64> {
    let points = link_points(links)?;
    Ok(expected_k_points(&points, params, quad, &mut FanScratch::default()))
}

/// `P(all links clear) = exp(−E[K])`; 1 for an empty set.
pub fn joint_los_prob(links: &[Link], params: &ScenarioParams, quad: &QuadratureSpec) -> Result<f64> {
    if links.is_empty() {
        return Ok(1.0);
    }
    Ok((-expected_k(links, params, quad)?).exp())
}

/// `P(target clear | given clear)` as a ratio of joint LOS probabilities.
pub fn conditional_los_prob(
    target: &[Link],
    given_los: &[Link],
    params: &ScenarioParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if target.is_empty() {
        return Ok(1.0);
    }
    let all: Vec<Link> = target.iter().chain(given_los).copied().collect();
    let mut scratch = FanScratch::default();
    let points = link_points(&all)?;
    let joint = expected_k_points(&points, params, quad, &mut scratch);
    let given = if given_los.is_empty() {
        0.0
    } else {
        expected_k_points(&points[target.len()..], params, quad, &mut scratch)
    };
    Ok((given - joint).exp().clamp(0.0, 1.0))
}

/// θ-breakpoints: orientation bin edges, every link direction modulo π,
/// and the direction between any two endpoints close enough for one
/// obstacle to reach both. The blocked area has a kink at each of them.
fn theta_breakpoints(points: &[Point2D], orientation: &PiecewiseDensity, max_length: f64) -> Vec<f64> {
    let (lo, hi) = orientation.support();
    let mut cuts: Vec<f64> = orientation.edges().to_vec();
    let mut push = |v: Point2D| {
        let phi = v.azimuth().rem_euclid(PI);
        if phi > lo && phi < hi {
            cuts.push(phi);
        }
    };
    for (i, &p) in points.iter().enumerate() {
        if p.norm() <= GEOM_EPS {
            continue;
        }
        push(p);
        for &q in &points[i + 1..] {
            let d = p - q;
            if d.norm() > GEOM_EPS && d.norm() < max_length && q.norm() > GEOM_EPS {
                push(d);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    cuts
}

/// Composite rule: each panel gets its share of `budget` nodes by width.
fn panel_order(width: f64, total: f64, budget: usize) -> usize {
    ((budget as f64 * width / total).ceil() as usize).max(MIN_PANEL_NODES)
}

pub(crate) fn expected_k_points(
    points: &[Point2D],
    params: &ScenarioParams,
    quad: &QuadratureSpec,
    scratch: &mut FanScratch,
) -> f64 {
    if params.density == 0.0 || points.iter().all(|p| p.norm() <= GEOM_EPS) {
        return 0.0;
    }
    let orient = &params.orientation;
    let kernel = RandomLength(&params.length);
    let (lo, hi) = orient.support();
    let cuts = theta_breakpoints(points, orient, params.max_length());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let f = orient.pdf(0.5 * (a + b));
        if f == 0.0 {
            continue;
        }
        let rule = GaussLegendre::get(panel_order(b - a, hi - lo, quad.nodes_theta));
        let mut panel = 0.0;
        for (theta, wt) in rule.mapped(a, b) {
            panel += wt * fan_union_area(points, theta, &kernel, scratch);
        }
        total += f * panel;
    }
    params.density * total
}

/// Reference route: plain tensor Gauss–Legendre over `(l, θ)` with the
/// generic polygon union. Slower and less accurate near kinks; used to
/// cross-check [`expected_k`].
pub fn expected_k_tensor(links: &[Link], params: &ScenarioParams, quad: &QuadratureSpec) -> Result<f64> {
    link_points(links)?;
    let panels = |d: &PiecewiseDensity, budget: usize| -> Vec<(f64, f64)> {
        let (lo, hi) = d.support();
        let mut nodes = Vec::new();
        for (i, w) in d.edges().windows(2).enumerate() {
            let f = d.densities()[i];
            if f == 0.0 {
                continue;
            }
            let rule = GaussLegendre::get(panel_order(w[1] - w[0], hi - lo, budget));
            nodes.extend(rule.mapped(w[0], w[1]).map(|(x, wt)| (x, wt * f)));
        }
        nodes
    };
    let l_nodes = panels(&params.length, quad.nodes_l);
    let t_nodes = panels(&params.orientation, quad.nodes_theta);
    let mut total = 0.0;
    let mut quads = Vec::with_capacity(links.len());
    for &(l, wl) in &l_nodes {
        for &(theta, wt) in &t_nodes {
            quads.clear();
            quads.extend(links.iter().map(|link| blocking_quad(link, l, theta)));
            total += wl * wt * union_area(&quads);
        }
    }
    Ok(params.density * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> ScenarioParams {
        ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap()
    }

    fn link(r: f64, az: f64) -> Link {
        Link::from_origin(Point2D::from_polar(r, az))
    }

    #[test]
    fn single_link_closed_form() {
        let q = QuadratureSpec::default();
        for az in [0.0, 0.3, 1.7, 3.0, 5.5] {
            let ek = expected_k(&[link(100.0, az)], &paper(), &q).unwrap();
            let exact = 3.0 / PI;
            assert!((ek - exact).abs() / exact < 1e-12, "az={az} ek={ek}");
        }
    }

    #[test]
    fn zero_density_and_empty_links() {
        let p = paper().with_density(0.0);
        let q = QuadratureSpec::default();
        assert_eq!(expected_k(&[link(100.0, 1.0)], &p, &q).unwrap(), 0.0);
        assert!(matches!(expected_k(&[], &paper(), &q), Err(Error::EmptyLinks)));
        assert_eq!(joint_los_prob(&[], &paper(), &q).unwrap(), 1.0);
    }

    #[test]
    fn coincident_links_equal_single() {
        let q = QuadratureSpec::default();
        let a = link(120.0, 0.8);
        let one = expected_k(&[a], &paper(), &q).unwrap();
        let two = expected_k(&[a, a], &paper(), &q).unwrap();
        assert!((one - two).abs() < 1e-12);
    }

    #[test]
    fn non_concurrent_links_rejected() {
        let q = QuadratureSpec::default();
        let a = link(10.0, 0.0);
        let b = Link::new(Point2D::new(1.0, 0.0), Point2D::new(5.0, 5.0));
        assert!(matches!(
            expected_k(&[a, b], &paper(), &q),
            Err(Error::LinksNotConcurrent)
        ));
    }

    #[test]
    fn shifted_base_station() {
        let q = QuadratureSpec::default();
        let bs = Point2D::new(-40.0, 25.0);
        let shifted = Link::new(bs, bs + Point2D::new(100.0, 0.0));
        let ek = expected_k(&[shifted], &paper(), &q).unwrap();
        assert!((ek - 3.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn conditional_cases() {
        let q = QuadratureSpec::default();
        let p = paper();
        let a = link(100.0, 0.2);
        let b = link(80.0, 1.4);
        let uncond = joint_los_prob(&[a], &p, &q).unwrap();
        assert!((conditional_los_prob(&[a], &[], &p, &q).unwrap() - uncond).abs() < 1e-15);
        assert!((conditional_los_prob(&[a], &[a, b], &p, &q).unwrap() - 1.0).abs() < 1e-12);
        // Well separated links of equal length are nearly independent.
        let c = link(100.0, 0.2 + 0.9);
        let cond = conditional_los_prob(&[a], &[c], &p, &q).unwrap();
        assert!((cond - uncond).abs() / uncond < 0.05);
        // Right at π/4 the exact overlap still gives about 5.5%.
        let c = link(100.0, 0.2 + PI / 4.0);
        let cond = conditional_los_prob(&[a], &[c], &p, &q).unwrap();
        assert!(((cond - uncond) / uncond - 0.0549).abs() < 1e-3);
    }

    #[test]
    fn tensor_route_agrees() {
        let q = QuadratureSpec::new(32, 128).unwrap();
        let links = [link(100.0, 0.3), link(60.0, 0.9), link(140.0, 0.5)];
        let fast = expected_k(&links, &paper(), &QuadratureSpec::default()).unwrap();
        let slow = expected_k_tensor(&links, &paper(), &q).unwrap();
        assert!((fast - slow).abs() / fast < 5e-4, "fast={fast} slow={slow}");
    }
}
