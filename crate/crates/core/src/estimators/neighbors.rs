use super::{Measurement, Prediction};
use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Point2D};

fn majority_of_nearest(data: &[Measurement], k: usize, dist: impl Fn(&Measurement) -> f64) -> Result<Prediction> {
    if data.is_empty() {
        return Err(Error::NoData);
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    let k = k.min(data.len());
    let mut ranked: Vec<(f64, usize)> = data.iter().enumerate().map(|(i, m)| (dist(m), i)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let los_votes = ranked[..k].iter().filter(|&&(_, i)| data[i].los).count();
    Ok(Prediction::vote(2 * los_votes > k))
}

/// Majority label of the `k` Euclidean-nearest measurements.
pub fn knn_predict(data: &[Measurement], y: Point2D, k: usize) -> Result<Prediction> {
    majority_of_nearest(data, k, |m| m.position.distance(y))
}

/// Majority label of the `k` nearest labelled segments. A LOS measurement
/// stands for the segment BS→x, an NLOS one for the radial segment from x
/// out to the cell boundary of radius `radius`.
pub fn kns_predict(data: &[Measurement], y: Point2D, k: usize, radius: f64) -> Result<Prediction> {
    majority_of_nearest(data, k, |m| {
        let x = m.position;
        if m.los {
            point_segment_distance(y, Point2D::ORIGIN, x)
        } else {
            let r = x.norm();
            let outer = if r > 0.0 && r < radius { x * (radius / r) } else { x };
            point_segment_distance(y, x, outer)
        }
    })
}

/// Gaussian-window vote with window standard deviation `sigma` (meters).
pub fn parzen_predict(data: &[Measurement], y: Point2D, sigma: f64) -> Result<Prediction> {
    if data.is_empty() {
        return Err(Error::NoData);
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", "must be finite and > 0"));
    }
    // Compare in log space so far-away data cannot underflow both sums to 0.
    let exponent = |m: &Measurement| -m.position.distance(y).powi(2) / (2.0 * sigma * sigma);
    let log_sum = |los: bool| {
        let es: Vec<f64> = data.iter().filter(|m| m.los == los).map(exponent).collect();
        let top = es.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return top;
        }
        top + es.iter().map(|e| (e - top).exp()).sum::<f64>().ln()
    };
    Ok(Prediction::vote(log_sum(true) > log_sum(false)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meas(x: f64, y: f64, los: bool) -> Measurement {
        Measurement::new(Point2D::new(x, y), los)
    }

    #[test]
    fn knn_cases() {
        let y = Point2D::new(0.0, 0.0);
        let all_los = [meas(1.0, 0.0, true), meas(5.0, 0.0, true)];
        assert!(knn_predict(&all_los, y, 3).unwrap().los);
        let near_nlos = [meas(1.0, 0.0, false), meas(2.0, 0.0, true)];
        assert!(!knn_predict(&near_nlos, y, 1).unwrap().los);
        let mixed = [
            meas(1.0, 0.0, true),
            meas(2.0, 0.0, false),
            meas(3.0, 0.0, true),
            meas(9.0, 0.0, false),
        ];
        assert!(knn_predict(&mixed, y, 3).unwrap().los);
        assert!(matches!(knn_predict(&[], y, 1), Err(Error::NoData)));
    }

    #[test]
    fn knn_vote_tie_is_nlos() {
        let data = [meas(1.0, 0.0, true), meas(2.0, 0.0, false)];
        assert!(!knn_predict(&data, Point2D::ORIGIN, 2).unwrap().los);
    }

    #[test]
    fn knn_distance_tie_prefers_lower_index() {
        let data = [meas(1.0, 0.0, true), meas(-1.0, 0.0, false)];
        assert!(knn_predict(&data, Point2D::ORIGIN, 1).unwrap().los);
        let data = [meas(-1.0, 0.0, false), meas(1.0, 0.0, true)];
        assert!(!knn_predict(&data, Point2D::ORIGIN, 1).unwrap().los);
    }

    #[test]
    fn kns_cases() {
        let on_los_segment = [meas(100.0, 0.0, true), meas(50.0, 5.0, false)];
        assert!(
            kns_predict(&on_los_segment, Point2D::new(40.0, 0.0), 1, 150.0)
                .unwrap()
                .los
        );
        let behind_nlos = [meas(50.0, 0.0, false), meas(80.0, 20.0, true)];
        assert!(
            !kns_predict(&behind_nlos, Point2D::new(120.0, 0.0), 1, 150.0)
                .unwrap()
                .los
        );
        // Equidistant from both segments: lower index wins.
        let tie = [meas(100.0, 10.0, true), meas(100.0, -10.0, false)];
        assert!(kns_predict(&tie, Point2D::new(50.0, 0.0), 1, 150.0).unwrap().los);
    }

    #[test]
    fn parzen_cases() {
        let sigma = 1.8;
        assert!(
            parzen_predict(&[meas(500.0, 0.0, true)], Point2D::ORIGIN, sigma)
                .unwrap()
                .los
        );
        let sym = [meas(3.0, 0.0, true), meas(-3.0, 0.0, false)];
        assert!(!parzen_predict(&sym, Point2D::ORIGIN, sigma).unwrap().los);
        let graded = [meas(sigma, 0.0, true), meas(0.0, 2.0 * sigma, false)];
        assert!(parzen_predict(&graded, Point2D::ORIGIN, sigma).unwrap().los);
        assert!(parzen_predict(&sym, Point2D::ORIGIN, 0.0).is_err());
    }
}
