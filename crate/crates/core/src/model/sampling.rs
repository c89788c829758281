use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{Layout, Provenance, ScenarioParams};
use crate::geometry::{ObstacleSegment, Point2D};

/// Draws a Poisson layout whose centers cover the cell plus a half-length
/// buffer, so that blockers centered just outside the cell still count.
pub fn sample_layout(params: &ScenarioParams, seed: u64) -> Layout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Layout {
        obstacles: sample_layout_with(params, &mut rng),
        provenance: Provenance::Sampled { seed },
    }
}

pub fn sample_layout_with<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Vec<ObstacleSegment> {
    let radius = params.sampling_radius();
    let mean = params.density * std::f64::consts::PI * radius * radius;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
    } else {
        0
    };
    (0..count)
        .map(|_| {
            let center = sample_uniform_disk(radius, rng);
            let length = params.length.quantile(rng.random());
            let orientation = params.orientation.quantile(rng.random());
            ObstacleSegment::new(center, length, orientation).expect("sampled values are finite")
        })
        .collect()
}

/// Uniform point in the open disk of the given radius about the origin.
pub fn sample_uniform_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Point2D {
    let r = radius * rng.random::<f64>().sqrt();
    Point2D::from_polar(r, TAU * rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_empty() {
        let p = ScenarioParams::uniform(150.0, 0.0, 20.0).unwrap();
        assert!(sample_layout(&p, 1).obstacles.is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let p = ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap();
        assert_eq!(sample_layout(&p, 42), sample_layout(&p, 42));
        assert_ne!(sample_layout(&p, 42), sample_layout(&p, 43));
    }

    #[test]
    fn samples_respect_supports() {
        let p = ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap();
        let layout = sample_layout(&p, 9);
        for o in &layout.obstacles {
            assert!(o.center.norm() < 160.0);
            assert!(o.length >= 0.0 && o.length <= 20.0);
            assert!(o.orientation >= 0.0 && o.orientation < std::f64::consts::PI);
        }
    }
}
