//! Union area of blocking parallelograms for links that share the base station.
//!
//! Fix the obstacle direction `u` and measure the coordinate `w` across it.
//! A link to `p` spans `w ∈ [0, p·u⊥]`, and at each `w` its parallelogram's
//! cross-section is an interval of length `l` centered at `w·m`, where `m`
//! is the link's slope in the `(u⊥, u)` frame. Intervals of equal length
//! sorted by center have union `l + Σ min(l, gap)`, so the union area is a
//! one-dimensional integral whose adjacency structure changes only where
//! a link ends. That integral is evaluated exactly, either for a fixed
//! obstacle length or in expectation over a length density.

use super::density::PiecewiseDensity;
use crate::geometry::{Point2D, GEOM_EPS};

pub(crate) trait LengthKernel {
    /// `∫_0^{w_max} l dw`.
    fn strip(&self, w_max: f64) -> f64;
    /// `∫_a^b min(l, w·slope_gap) dw`.
    fn gap(&self, slope_gap: f64, a: f64, b: f64) -> f64;
}

#[cfg(test)]
pub(crate) struct FixedLength(pub f64);

#[cfg(test)]
impl LengthKernel for FixedLength {
    fn strip(&self, w_max: f64) -> f64 {
        self.0 * w_max
    }

    fn gap(&self, slope_gap: f64, a: f64, b: f64) -> f64 {
        if slope_gap <= 0.0 || b <= a {
            return 0.0;
        }
        let l = self.0;
        let g = |w: f64| {
            if w * slope_gap <= l {
                0.5 * slope_gap * w * w
            } else {
                l * w - l * l / (2.0 * slope_gap)
            }
        };
        g(b) - g(a)
    }
}

pub(crate) struct RandomLength<'a>(pub &'a PiecewiseDensity);

impl LengthKernel for RandomLength<'_> {
    fn strip(&self, w_max: f64) -> f64 {
        self.0.mean() * w_max
    }

    fn gap(&self, slope_gap: f64, a: f64, b: f64) -> f64 {
        if slope_gap <= 0.0 || b <= a {
            return 0.0;
        }
        // E[min(L, c)] = ∫_0^c P(L > l) dl, integrated once more over w.
        self.0.survival_double_integral_diff(a * slope_gap, b * slope_gap) / slope_gap
    }
}

#[derive(Debug, Default)]
pub(crate) struct FanScratch {
    positive: Vec<(f64, f64)>,
    negative: Vec<(f64, f64)>,
    slopes: Vec<f64>,
    starts: Vec<f64>,
}

/// Union area of the blocking parallelograms of the links `0 → p` for
/// obstacles with orientation `theta`. Points are relative to the BS.
pub(crate) fn fan_union_area<K: LengthKernel>(
    points: &[Point2D],
    theta: f64,
    kernel: &K,
    scratch: &mut FanScratch,
) -> f64 {
    let (s, c) = theta.sin_cos();
    scratch.positive.clear();
    scratch.negative.clear();
    for p in points {
        let r = p.norm();
        if r <= GEOM_EPS {
            continue;
        }
        let w = -p.x * s + p.y * c;
        let t = p.x * c + p.y * s;
        if w.abs() <= 1e-12 * r {
            // Parallel to the obstacles: the parallelogram has no area.
            continue;
        }
        let entry = (w.abs(), t / w.abs());
        if w > 0.0 {
            scratch.positive.push(entry);
        } else {
            scratch.negative.push(entry);
        }
    }
    let FanScratch {
        positive,
        negative,
        slopes,
        starts,
    } = scratch;
    side_area(positive, kernel, slopes, starts) + side_area(negative, kernel, slopes, starts)
}

fn side_area<K: LengthKernel>(
    items: &mut [(f64, f64)],
    kernel: &K,
    slopes: &mut Vec<f64>,
    starts: &mut Vec<f64>,
) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut area = kernel.strip(items[0].0);
    slopes.clear();
    // starts[i]: w at which slopes[i] and slopes[i + 1] became neighbours.
    starts.clear();
    for &(w, m) in items.iter() {
        let pos = slopes.partition_point(|&s| s < m);
        if slopes.is_empty() {
            // first interval, nothing adjacent yet
        } else if pos == 0 {
            starts.insert(0, w);
        } else if pos == slopes.len() {
            starts.push(w);
        } else {
            let gap = slopes[pos] - slopes[pos - 1];
            area += kernel.gap(gap, w, starts[pos - 1]);
            starts[pos - 1] = w;
            starts.insert(pos, w);
        }
        slopes.insert(pos, m);
    }
    for (i, &b) in starts.iter().enumerate() {
        area += kernel.gap(slopes[i + 1] - slopes[i], 0.0, b);
    }
    area
}
