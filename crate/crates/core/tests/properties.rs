use std::f64::consts::PI;

use proptest::prelude::*;

use losmap::estimators::{map_predict, map_predict_bonferroni, EstimatorConfig, EstimatorKind, Measurement};
use losmap::geometry::{blocking_quad, union_area, BlockingQuad, Link, Point2D};
use losmap::model::{expected_k, QuadratureSpec, ScenarioParams};

fn fig3() -> ScenarioParams {
    ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap()
}

fn point() -> impl Strategy<Value = Point2D> {
    (1.0..150.0f64, 0.0..2.0 * PI).prop_map(|(r, a)| Point2D::from_polar(r, a))
}

fn quad() -> impl Strategy<Value = BlockingQuad> {
    (point(), 0.5..20.0f64, 0.0..PI).prop_map(|(p, l, t)| blocking_quad(&Link::from_origin(p), l, t))
}

fn measurements(max: usize) -> impl Strategy<Value = Vec<Measurement>> {
    prop::collection::vec(
        (point(), any::<bool>()).prop_map(|(p, los)| Measurement::new(p, los)),
        1..=max,
    )
}

/// Points a few meters from the BS make NLOS evidence so rare that
/// inclusion-exclusion cancellation dominates, so keep clear of it here.
fn far_point() -> impl Strategy<Value = Point2D> {
    (10.0..150.0f64, 0.0..2.0 * PI).prop_map(|(r, a)| Point2D::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_area_between_max_and_sum(quads in prop::collection::vec(quad(), 1..8)) {
        let u = union_area(&quads);
        let max = quads.iter().map(|q| q.area).fold(0.0, f64::max);
        let sum: f64 = quads.iter().map(|q| q.area).sum();
        prop_assert!(u >= max * (1.0 - 1e-9) - 1e-9);
        prop_assert!(u <= sum * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn union_area_ignores_order(mut quads in prop::collection::vec(quad(), 2..8)) {
        let a = union_area(&quads);
        quads.reverse();
        let b = union_area(&quads);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn duplicated_quads_add_nothing(quads in prop::collection::vec(quad(), 1..5)) {
        let mut doubled = quads.clone();
        doubled.extend_from_slice(&quads);
        let a = union_area(&quads);
        prop_assert!((union_area(&doubled) - a).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn expected_k_single_link_closed_form(d in 1.0..150.0f64, a in 0.0..2.0 * PI) {
        let k = expected_k(&[Link::from_origin(Point2D::from_polar(d, a))], &fig3(), &QuadratureSpec::default()).unwrap();
        let exact = 2.0 * 0.0015 * 10.0 * d / PI;
        prop_assert!((k - exact).abs() <= 1e-6 * exact);
    }

    #[test]
    fn expected_k_grows_with_links(pts in prop::collection::vec(point(), 2..6)) {
        let params = fig3();
        let q = QuadratureSpec::default();
        let links: Vec<Link> = pts.iter().map(|&p| Link::from_origin(p)).collect();
        let all = expected_k(&links, &params, &q).unwrap();
        let singles: Vec<f64> = links.iter().map(|l| expected_k(&[*l], &params, &q).unwrap()).collect();
        let fewer = expected_k(&links[1..], &params, &q).unwrap();
        prop_assert!(all >= fewer - 1e-9);
        prop_assert!(all >= singles.iter().cloned().fold(0.0, f64::max) - 1e-9);
        prop_assert!(all <= singles.iter().sum::<f64>() + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_rotate_with_the_scene(
        data in prop::collection::vec((far_point(), any::<bool>()).prop_map(|(p, los)| Measurement::new(p, los)), 1..=5),
        y in far_point(),
         angle in 0.0..2.0 * PI,
    ) {
        let params = fig3();
        let turned: Vec<Measurement> = data.iter().map(|m| Measurement::new(m.position.rotated(angle), m.los)).collect();
        let ty = y.rotated(angle);
        for kind in EstimatorKind::ALL {
            let est = EstimatorConfig::new(kind);
            let a = est.predict(&data, y, &params).unwrap();
            let b = est.predict(&turned, ty, &params).unwrap();
            match (a.posterior, b.posterior) {
                (Some(pa), Some(pb)) => {
                    prop_assert!((pa - pb).abs() < 1e-4, "{kind}: {pa} vs {pb}");
                    if (pa - 0.5).abs() > 1e-3 {
                        prop_assert_eq!(a.los, b.los);
                    }
                }
                _ => prop_assert_eq!(a.los, b.los, "{}", kind),
            }
        }
    }

    #[test]
    fn bonferroni_label_matches_map(data in measurements(6), y in point()) {
        let params = fig3();
        let q = QuadratureSpec::default();
        let exact = map_predict(&data, y, &params, &q).unwrap();
        let bonf = map_predict_bonferroni(&data, y, &params, &q, None, 20).unwrap();
        prop_assert_eq!(exact.los, bonf.los);
        prop_assert!(bonf.terms_evaluated <= exact.terms_evaluated);
        let post = exact.posterior.unwrap();
        if let Some((lo, hi)) = bonf.posterior_bounds {
            prop_assert!(lo <= post + 1e-9 && post <= hi + 1e-9, "{lo} <= {post} <= {hi}");
        }
    }
}
