use super::fan::FanScratch;
use super::{expected_k_points, QuadratureSpec, ScenarioParams};
use crate::error::{Error, Result};
use crate::geometry::Point2D;

/// Relative error of treating two equidistant LOS events as independent:
/// `|P(LOS₁ | LOS₂) − P(LOS₁)| / P(LOS₁)` for points at distance `d`
/// separated by azimuth `theta0`.
pub fn pairwise_independence_error(d: f64, theta0: f64, params: &ScenarioParams, quad: &QuadratureSpec) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::invalid("distance", "must be > 0"));
    }
    let p1 = Point2D::new(d, 0.0);
    let p2 = Point2D::from_polar(d, theta0);
    let mut scratch = FanScratch::default();
    let k1 = expected_k_points(&[p1], params, quad, &mut scratch);
    let k2 = expected_k_points(&[p2], params, quad, &mut scratch);
    let k12 = expected_k_points(&[p1, p2], params, quad, &mut scratch);
    // P(LOS₁|LOS₂)/P(LOS₁) = exp(E[K₁] + E[K₂] − E[K₁₂]).
    Ok((k1 + k2 - k12).exp_m1().abs())
}
