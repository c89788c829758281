use crate::error::{Error, Result};
use crate::geometry::Point2D;

/// Lattice offsets in pitch units.
const OFFSET_X: f64 = 0.25;
const OFFSET_Y: f64 = 1.0 / 3.0;

/// Lattice radii (in pitch units) sorted ascending, covering at least
/// `needed` entries.
fn sorted_radii(needed: usize) -> Vec<f64> {
    let mut reach = (needed as f64 / std::f64::consts::PI).sqrt() + 3.0;
    loop {
        let span = reach.ceil() as i64 + 1;
        let mut radii: Vec<f64> = Vec::new();
        for j in -span..=span {
            for i in -span..=span {
                let r = (i as f64 + OFFSET_X).hypot(j as f64 + OFFSET_Y);
                if r < reach {
                    radii.push(r);
                }
            }
        }
        if radii.len() > needed {
            radii.sort_by(f64::total_cmp);
            return radii;
        }
        reach *= 1.5;
    }
}

/// Whether exactly `n` lattice points can lie inside the disk: the `n`-th
/// and `n + 1`-th radii must differ by more than rounding.
fn achievable(radii: &[f64], n: usize) -> bool {
    n >= 1 && radii[n] - radii[n - 1] > 1e-9 * radii[n]
}

/// A square lattice clipped to the open disk of radius `radius`, with the
/// pitch chosen so that exactly `n_est` points fall inside.
///
/// Lattice sites sit at `((i + 1/4) h, (j + 1/3) h)`. Exactly `n` sites are
/// inside for every pitch in `(R / r₍ₙ₊₁₎, R / r₍ₙ₎]`, where `r₍ₖ₎` is the
/// k-th smallest site radius in pitch units. The returned grid uses the
/// geometric midpoint of that interval so no site lies near the boundary.
/// Points are ordered row by row, bottom to top, left to right.
pub fn generate_grid(radius: f64, n_est: usize) -> Result<Vec<Point2D>> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("radius", "must be finite and > 0"));
    }
    if n_est == 0 {
        return Err(Error::invalid("grid_size", "must be >= 1"));
    }
    let radii = sorted_radii(n_est + 64);
    if !achievable(&radii, n_est) {
        let below = (1..n_est).rev().find(|&n| achievable(&radii, n));
        let above = (n_est + 1..radii.len()).find(|&n| achievable(&radii, n));
        return Err(Error::GridUnachievable {
            requested: n_est,
            below,
            above,
        });
    }
    let pitch = radius / (radii[n_est - 1] * radii[n_est]).sqrt();
    let span = (radius / pitch).ceil() as i64 + 1;
    let mut points = Vec::with_capacity(n_est);
    for j in -span..=span {
        for i in -span..=span {
            let p = Point2D::new((i as f64 + OFFSET_X) * pitch, (j as f64 + OFFSET_Y) * pitch);
            if p.norm() < radius {
                points.push(p);
            }
        }
    }
    debug_assert_eq!(points.len(), n_est);
    Ok(points)
}
