use std::collections::HashMap;

use super::fan::FanScratch;
use super::{expected_k_points, QuadratureSpec, ScenarioParams};
use crate::error::{Error, Result};
use crate::geometry::Point2D;

/// Default ceiling on the number of points in an exact inclusion-exclusion.
pub const EXACT_POINT_CAP: usize = 20;

/// Joint LOS probabilities over subsets of a fixed point set, memoized by
/// index bitmask. Bit `i` refers to `points[i]`.
#[derive(Debug)]
pub struct JointLos<'a> {
    points: Vec<Point2D>,
    params: &'a ScenarioParams,
    quad: QuadratureSpec,
    cache: HashMap<u64, f64>,
    subset: Vec<Point2D>,
    scratch: FanScratch,
}

impl<'a> JointLos<'a> {
    pub fn new(points: Vec<Point2D>, params: &'a ScenarioParams, quad: QuadratureSpec) -> Result<Self> {
        if points.len() > 63 {
            return Err(Error::CombinatorialBlowUp {
                points: points.len(),
                cap: 63,
            });
        }
        Ok(Self {
            points,
            params,
            quad,
            cache: HashMap::new(),
            subset: Vec::new(),
            scratch: FanScratch::default(),
        })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    /// Number of distinct non-empty subsets whose blockage mean was computed.
    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }

    pub fn expected_k(&mut self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&v) = self.cache.get(&mask) {
            return v;
        }
        self.subset.clear();
        self.subset.extend(
            self.points
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| *p),
        );
        let v = expected_k_points(&self.subset, self.params, &self.quad, &mut self.scratch);
        self.cache.insert(mask, v);
        v
    }

    /// `P(every point in mask is LOS)`.
    pub fn los_prob(&mut self, mask: u64) -> f64 {
        (-self.expected_k(mask)).exp()
    }

    /// `P(points in los_mask LOS, points in nlos_mask NLOS)` by
    /// inclusion-exclusion over subsets of the NLOS set, compensated-summed
    /// and clamped to `[0, 1]`.
    pub fn event_prob(&mut self, los_mask: u64, nlos_mask: u64) -> f64 {
        debug_assert_eq!(los_mask & nlos_mask, 0);
        let mut sum = NeumaierSum::default();
        let mut sub = nlos_mask;
        loop {
            let term = self.los_prob(los_mask | sub);
            if sub.count_ones().is_multiple_of(2) {
                sum.add(term);
            } else {
                sum.add(-term);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & nlos_mask;
        }
        sum.total().clamp(0.0, 1.0)
    }
}

/// Kahan–Babuška compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `P(LOS at los_points, NLOS at nlos_points)` with the default cap.
pub fn joint_event_prob(
    los_points: &[Point2D],
    nlos_points: &[Point2D],
    params: &ScenarioParams,
    quad: &QuadratureSpec,
) -> Result<f64> {
    joint_event_prob_capped(los_points, nlos_points, params, quad, EXACT_POINT_CAP)
}

pub fn joint_event_prob_capped(
    los_points: &[Point2D],
    nlos_points: &[Point2D],
    params: &ScenarioParams,
    quad: &QuadratureSpec,
    cap: usize,
) -> Result<f64> {
    let m = los_points.len() + nlos_points.len();
    if m > cap.min(63) {
        return Err(Error::CombinatorialBlowUp { points: m, cap });
    }
    let w = los_points.len();
    let points: Vec<Point2D> = los_points.iter().chain(nlos_points).copied().collect();
    let los_mask = (1u64 << w) - 1;
    let nlos_mask = ((1u64 << m) - 1) & !los_mask;
    let mut engine = JointLos::new(points, params, *quad)?;
    Ok(engine.event_prob(los_mask, nlos_mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Link;
    use crate::model::joint_los_prob;
    use std::f64::consts::PI;

    fn paper() -> ScenarioParams {
        ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap()
    }

    #[test]
    fn all_los_equals_joint_los() {
        let q = QuadratureSpec::default();
        let pts = [Point2D::new(50.0, 20.0), Point2D::new(-30.0, 90.0)];
        let links: Vec<Link> = pts.iter().map(|&p| Link::from_origin(p)).collect();
        let a = joint_event_prob(&pts, &[], &paper(), &q).unwrap();
        let b = joint_los_prob(&links, &paper(), &q).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn single_nlos_is_complement() {
        let q = QuadratureSpec::default();
        let p = joint_event_prob(&[], &[Point2D::new(100.0, 0.0)], &paper(), &q).unwrap();
        assert!((p - (1.0 - (-3.0 / PI).exp())).abs() < 1e-12);
    }

    #[test]
    fn patterns_sum_to_one() {
        let q = QuadratureSpec::default();
        let pts = [
            Point2D::new(80.0, 10.0),
            Point2D::new(60.0, 40.0),
            Point2D::new(-20.0, 100.0),
            Point2D::new(110.0, -30.0),
        ];
        let params = paper();
        let mut engine = JointLos::new(pts.to_vec(), &params, q).unwrap();
        let full = 0b1111u64;
        let total: f64 = (0..16u64).map(|los| engine.event_prob(los, full & !los)).sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        assert_eq!(engine.evaluations(), 15);
    }

    #[test]
    fn cap_is_enforced() {
        let q = QuadratureSpec::default();
        let pts: Vec<Point2D> = (0..21).map(|i| Point2D::from_polar(100.0, i as f64 * 0.2)).collect();
        let err = joint_event_prob(&[], &pts, &paper(), &q).unwrap_err();
        assert!(matches!(err, Error::CombinatorialBlowUp { points: 21, cap: 20 }));
        assert!(err.to_string().contains("kN-MAP"));
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.total(), 2.0);
    }
}
