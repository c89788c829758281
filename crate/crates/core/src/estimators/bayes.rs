use super::{Measurement, Prediction};
use crate::error::{Error, Result};
use crate::geometry::{angular_distance, Point2D};
use crate::model::{JointLos, NeumaierSum, QuadratureSpec, ScenarioParams, EXACT_POINT_CAP};

fn coincident(data: &[Measurement], y: Point2D) -> Option<Prediction> {
    data.iter().find(|m| m.position == y).map(|m| Prediction {
        posterior: Some(if m.los { 1.0 } else { 0.0 }),
        ..Prediction::vote(m.los)
    })
}

/// Evidence over `data ++ [y]`: bit `i` is measurement `i`, the top bit is `y`.
struct Evidence<'a> {
    engine: JointLos<'a>,
    los: u64,
    nlos: u64,
    y_bit: u64,
}

impl<'a> Evidence<'a> {
    fn new(
        data: &[Measurement],
        y: Point2D,
        params: &'a ScenarioParams,
        quad: &QuadratureSpec,
        cap: usize,
    ) -> Result<Self> {
        let n = data.len();
        if n > cap.min(62) {
            return Err(Error::CombinatorialBlowUp { points: n, cap });
        }
        let mut points: Vec<Point2D> = data.iter().map(|m| m.position).collect();
        points.push(y);
        let mut los = 0u64;
        let mut nlos = 0u64;
        for (i, m) in data.iter().enumerate() {
            if m.los {
                los |= 1 << i;
            } else {
                nlos |= 1 << i;
            }
        }
        Ok(Self {
            engine: JointLos::new(points, params, *quad)?,
            los,
            nlos,
            y_bit: 1 << n,
        })
    }

    fn exact(&mut self) -> Result<Prediction> {
        let den = self.engine.event_prob(self.los, self.nlos);
        if !(den > 0.0) {
            return Err(Error::DegenerateEvidence);
        }
        let num = self.engine.event_prob(self.los | self.y_bit, self.nlos);
        let posterior = (num / den).clamp(0.0, 1.0);
        Ok(Prediction::bayes(posterior, self.engine.evaluations()))
    }
}

/// Exact MAP decision with the default point cap.
pub fn map_predict(
    data: &[Measurement],
    y: Point2D,
    params: &ScenarioParams,
    quad: &QuadratureSpec,
) -> Result<Prediction> {
    map_predict_capped(data, y, params, quad, EXACT_POINT_CAP)
}

/// Exact MAP decision: `P(y LOS | data)` as a ratio of two
/// inclusion-exclusion expansions sharing one memo table.
pub fn map_predict_capped(
    data: &[Measurement],
    y: Point2D,
    params: &ScenarioParams,
    quad: &QuadratureSpec,
    cap: usize,
) -> Result<Prediction> {
    if let Some(p) = coincident(data, y) {
        return Ok(p);
    }
    Evidence::new(data, y, params, quad, cap)?.exact()
}

/// Partial inclusion-exclusion sums for `P(base LOS, every candidate NLOS)`
/// with the Bonferroni bracket they imply.
struct Bracket {
    base: u64,
    candidates: Vec<u64>,
    p_base: f64,
    partial: f64,
    lo: f64,
    hi: f64,
    singles: Vec<f64>,
}

impl Bracket {
    fn new(engine: &mut JointLos<'_>, base: u64, candidates: Vec<u64>) -> Self {
        let p_base = engine.los_prob(base);
        let exact = candidates.is_empty();
        Self {
            base,
            candidates,
            p_base,
            partial: p_base,
            lo: if exact { p_base } else { 0.0 },
            hi: p_base,
            singles: Vec::new(),
        }
    }

    fn is_exact(&self, order: usize) -> bool {
        order >= self.candidates.len()
    }

    /// Adds the order-`r` terms and tightens the bracket.
    fn advance(&mut self, engine: &mut JointLos<'_>, r: usize) {
        let c = self.candidates.len();
        if r == 0 || r > c {
            return;
        }
        let mut sum = NeumaierSum::default();
        sum.add(self.partial);
        let mut order_sum = NeumaierSum::default();
        let mut terms = Vec::new();
        // Gosper's hack over r-subsets of the candidate indices.
        let mut comb: u64 = (1u64 << r) - 1;
        let limit = 1u64 << c;
        while comb < limit {
            let mut mask = self.base;
            let mut bits = comb;
            while bits != 0 {
                mask |= self.candidates[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            let term = engine.los_prob(mask);
            if r <= 2 {
                terms.push((comb, term));
            }
            order_sum.add(term);
            sum.add(if r % 2 == 1 { -term } else { term });
            let low = comb & comb.wrapping_neg();
            let ripple = comb + low;
            comb = (((ripple ^ comb) >> 2) / low) | ripple;
        }
        self.partial = sum.total();
        if r == c {
            let exact = self.partial.clamp(0.0, self.p_base);
            self.lo = exact;
            self.hi = exact;
            return;
        }
        if r % 2 == 1 {
            self.lo = self.lo.max(self.partial);
        } else {
            self.hi = self.hi.min(self.partial);
        }
        match r {
            1 => {
                let largest = terms.iter().map(|t| t.1).fold(0.0, f64::max);
                self.hi = self.hi.min(self.p_base - largest);
                self.singles = terms.iter().map(|t| t.1).collect();
            }
            2 => self.second_order(&terms, order_sum.total()),
            _ => {}
        }
        self.hi = self.hi.max(self.lo);
    }

    /// Hunter's spanning-tree upper bound and the Dawson–Sankoff lower
    /// bound on the union, both from first- and second-order terms only.
    fn second_order(&mut self, pairs: &[(u64, f64)], s2: f64) {
        let c = self.candidates.len();
        let mut w = vec![0.0; c * c];
        for &(comb, t) in pairs {
            let i = comb.trailing_zeros() as usize;
            let j = (comb & (comb - 1)).trailing_zeros() as usize;
            w[i * c + j] = t;
            w[j * c + i] = t;
        }
        // Prim's algorithm for a maximum-weight spanning tree.
        let mut in_tree = vec![false; c];
        let mut best = vec![f64::NEG_INFINITY; c];
        best[0] = 0.0;
        let mut tree = 0.0;
        for _ in 0..c {
            let u = (0..c)
                .filter(|&v| !in_tree[v])
                .max_by(|&a, &b| best[a].total_cmp(&best[b]))
                .unwrap_or(0);
            in_tree[u] = true;
            tree += best[u];
            for v in 0..c {
                if !in_tree[v] {
                    best[v] = best[v].max(w[u * c + v]);
                }
            }
        }
        let s1: f64 = self.singles.iter().sum();
        self.lo = self.lo.max(self.p_base - (s1 - tree));
        if s1 > 0.0 {
            let k = 1.0 + (2.0 * s2 / s1).floor();
            let union_lo = 2.0 * s1 / (k + 1.0) - 2.0 * s2 / (k * (k + 1.0));
            self.hi = self.hi.min(self.p_base - union_lo);
        }
    }
}

/// MAP decision certified by Bonferroni-type bounds.
///
/// `P(data)` is expanded exactly, while `P(y LOS, data)` is bracketed
/// order by order: alternating partial sums at every order plus Hunter and
/// Dawson–Sankoff bounds at order two. The first order whose bracket sits
/// strictly on one side of `P(data)/2` decides. If none does up to
/// `max_order`, the expansion is finished on the same memo table, so the
/// label always equals [`map_predict`]'s.
pub fn map_predict_bonferroni(
    data: &[Measurement],
    y: Point2D,
    params: &ScenarioParams,
    quad: &QuadratureSpec,
    max_order: Option<usize>,
    cap: usize,
) -> Result<Prediction> {
    if max_order == Some(0) {
        return Err(Error::invalid("max_bonferroni_order", "must be >= 1"));
    }
    if let Some(p) = coincident(data, y) {
        return Ok(p);
    }
    let mut ev = Evidence::new(data, y, params, quad, cap)?;
    let evidence = ev.engine.event_prob(ev.los, ev.nlos);
    if !(evidence > 0.0) {
        return Err(Error::DegenerateEvidence);
    }
    let nlos_bits: Vec<u64> = (0..data.len())
        .map(|i| 1u64 << i)
        .filter(|b| ev.nlos & b != 0)
        .collect();
    let m = nlos_bits.len();
    let mut joint = Bracket::new(&mut ev.engine, ev.los | ev.y_bit, nlos_bits);
    // Rounding slack of the alternating sums, relative to P(LOS at data).
    let margin = 16.0 * f64::EPSILON * (2.0f64).powi(m as i32 + 1) * ev.engine.los_prob(ev.los);
    let last = max_order.map_or(m, |r| r.min(m)).max(1);

    for r in 1..=last {
        joint.advance(&mut ev.engine, r);
        let decision = if 2.0 * joint.lo > evidence + margin {
            Some(true)
        } else if 2.0 * joint.hi < evidence - margin {
            Some(false)
        } else {
            None
        };
        if let Some(los) = decision {
            let lo = (joint.lo / evidence).clamp(0.0, 1.0);
            let hi = (joint.hi / evidence).clamp(lo, 1.0);
            return Ok(Prediction {
                los,
                posterior: joint.is_exact(r).then_some(lo),
                posterior_bounds: Some((lo, hi)),
                terms_evaluated: ev.engine.evaluations(),
                decided_at_order: Some(r),
            });
        }
    }
    let mut p = ev.exact()?;
    let post = p.posterior.unwrap_or(0.5);
    p.posterior_bounds = Some((post, post));
    Ok(p)
}

/// Indices of the `k` measurements angularly closest to `y` as seen from
/// the BS, returned in ascending index order. Ties favour smaller indices.
pub fn nearest_angular(data: &[Measurement], y: Point2D, k: usize) -> Vec<usize> {
    if k >= data.len() {
        return (0..data.len()).collect();
    }
    let mut ranked: Vec<(f64, usize)> = data
        .iter()
        .enumerate()
        .map(|(i, m)| (angular_distance(Point2D::ORIGIN, m.position, y), i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut chosen: Vec<usize> = ranked[..k].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();
    chosen
}

/// MAP restricted to the `k` angular nearest neighbours of `y`.
pub fn kn_map_predict(
    data: &[Measurement],
    y: Point2D,
    params: &ScenarioParams,
    quad: &QuadratureSpec,
    k: usize,
) -> Result<Prediction> {
    if k == 0 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    if k >= data.len() {
        return map_predict(data, y, params, quad);
    }
    if let Some(p) = coincident(data, y) {
        return Ok(p);
    }
    let subset: Vec<Measurement> = nearest_angular(data, y, k).into_iter().map(|i| data[i]).collect();
    map_predict_capped(&subset, y, params, quad, k.max(EXACT_POINT_CAP))
}

/// Naive Bayes: each measurement is treated as conditionally independent
/// of the others given the state of `y`. Factors use exact two-point joints.
pub fn naive_bayes_predict(
    data: &[Measurement],
    y: Point2D,
    params: &ScenarioParams,
    quad: &QuadratureSpec,
) -> Result<Prediction> {
    if let Some(p) = coincident(data, y) {
        return Ok(p);
    }
    let prior = {
        let mut engine = JointLos::new(vec![y], params, *quad)?;
        engine.los_prob(1)
    };
    if prior >= 1.0 || prior <= 0.0 {
        return Ok(Prediction::bayes(prior.clamp(0.0, 1.0), 1));
    }
    let mut log1 = prior.ln();
    let mut log0 = (-prior).ln_1p();
    let mut terms = 1;
    for m in data {
        let mut engine = JointLos::new(vec![y, m.position], params, *quad)?;
        let p_x = engine.los_prob(0b10);
        let p_xy = engine.los_prob(0b11);
        terms += 2;
        // Joint of (x state, y state) from the three LOS probabilities.
        let (j1, j0) = if m.los {
            (p_xy, p_x - p_xy)
        } else {
            (prior - p_xy, 1.0 - p_x - prior + p_xy)
        };
        log1 += j1.max(0.0).ln() - prior.ln();
        log0 += j0.max(0.0).ln() - (-prior).ln_1p();
    }
    if log1 == f64::NEG_INFINITY && log0 == f64::NEG_INFINITY {
        return Err(Error::DegenerateEvidence);
    }
    let posterior = if log1 == f64::NEG_INFINITY {
        0.0
    } else if log0 == f64::NEG_INFINITY {
        1.0
    } else {
        1.0 / (1.0 + (log0 - log1).exp())
    };
    Ok(Prediction::bayes(posterior, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn paper() -> ScenarioParams {
        ScenarioParams::uniform(150.0, 0.0015, 20.0).unwrap()
    }

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn meas(x: f64, y: f64, los: bool) -> Measurement {
        Measurement::new(Point2D::new(x, y), los)
    }

    #[test]
    fn prior_at_100m() {
        let p = map_predict(&[], Point2D::new(100.0, 0.0), &paper(), &q()).unwrap();
        let want = (-3.0 / PI).exp();
        assert!((p.posterior.unwrap() - want).abs() < 1e-10);
        assert!((want - 0.38476).abs() < 1e-4);
        assert!(!p.los);
    }

    #[test]
    fn los_beyond_on_same_ray_implies_los() {
        let data = [meas(120.0, 0.0, true)];
        let p = map_predict(&data, Point2D::new(60.0, 0.0), &paper(), &q()).unwrap();
        assert!((p.posterior.unwrap() - 1.0).abs() < 1e-9);
        assert!(p.los);
    }

    #[test]
    fn coincident_returns_observed_label() {
        let data = [meas(50.0, 50.0, false), meas(10.0, 0.0, true)];
        let p = map_predict(&data, Point2D::new(50.0, 50.0), &paper(), &q()).unwrap();
        assert!(!p.los);
        assert_eq!(p.posterior, Some(0.0));
        let p = naive_bayes_predict(&data, Point2D::new(10.0, 0.0), &paper(), &q()).unwrap();
        assert!(p.los);
    }

    #[test]
    fn cap_exceeded() {
        let data: Vec<Measurement> = (0..21).map(|i| meas(50.0 + i as f64, 10.0, true)).collect();
        let err = map_predict(&data, Point2D::new(0.0, 80.0), &paper(), &q()).unwrap_err();
        assert!(matches!(err, Error::CombinatorialBlowUp { .. }));
    }

    #[test]
    fn full_map_terms() {
        let data = [
            meas(80.0, 20.0, false),
            meas(-40.0, 90.0, true),
            meas(30.0, -100.0, false),
        ];
        let p = map_predict(&data, Point2D::new(70.0, 70.0), &paper(), &q()).unwrap();
        // P(L), P(L+y) and every NLOS superset of each.
        assert_eq!(p.terms_evaluated, 8);
    }

    #[test]
    fn complementarity() {
        let data = [meas(80.0, 20.0, false), meas(-40.0, 90.0, true)];
        let y = Point2D::new(70.0, 70.0);
        let params = paper();
        let los = [data[1].position, y];
        let nlos = [data[0].position];
        let p1 = crate::model::joint_event_prob(&los, &nlos, &params, &q()).unwrap();
        let p0 = crate::model::joint_event_prob(&[data[1].position], &[data[0].position, y], &params, &q()).unwrap();
        let post = map_predict(&data, y, &params, &q()).unwrap().posterior.unwrap();
        assert!((post - p1 / (p1 + p0)).abs() < 1e-9);
    }

    #[test]
    fn bonferroni_exhausted_matches_map() {
        let data = [
            meas(80.0, 20.0, false),
            meas(-40.0, 90.0, true),
            meas(30.0, -100.0, false),
        ];
        let y = Point2D::new(70.0, 70.0);
        let exact = map_predict(&data, y, &paper(), &q()).unwrap();
        let b = map_predict_bonferroni(&data, y, &paper(), &q(), None, EXACT_POINT_CAP).unwrap();
        assert_eq!(b.los, exact.los);
        let (lo, hi) = b.posterior_bounds.unwrap();
        let post = exact.posterior.unwrap();
        assert!(lo <= post + 1e-12 && post <= hi + 1e-12);
    }

    #[test]
    fn bonferroni_early_exit_with_blocking_nlos() {
        // NLOS measurement on the segment BS→y makes y almost surely NLOS.
        let y = Point2D::from_polar(140.0, 0.3);
        let data = [
            Measurement::new(Point2D::from_polar(100.0, 0.3), false),
            Measurement::new(Point2D::from_polar(60.0, 1.5), true),
            Measurement::new(Point2D::from_polar(148.0, 0.3 + PI), false),
            Measurement::new(Point2D::from_polar(60.0, 4.0), true),
        ];
        let exact = map_predict(&data, y, &paper(), &q()).unwrap();
        let b = map_predict_bonferroni(&data, y, &paper(), &q(), None, EXACT_POINT_CAP).unwrap();
        assert!(!b.los && !exact.los);
        assert_eq!(b.decided_at_order, Some(1));
        assert!(b.terms_evaluated < exact.terms_evaluated);
    }

    #[test]
    fn bonferroni_all_los_concludes_at_once() {
        let data = [meas(30.0, 5.0, true), meas(-20.0, 40.0, true)];
        let b = map_predict_bonferroni(&data, Point2D::new(35.0, 6.0), &paper(), &q(), None, 20).unwrap();
        assert_eq!(b.decided_at_order, Some(1));
        assert!(b.los);
    }

    #[test]
    fn bonferroni_order_limit_falls_back() {
        let data = [
            meas(80.0, 20.0, false),
            meas(-40.0, 90.0, false),
            meas(30.0, -100.0, false),
        ];
        let y = Point2D::new(-90.0, -60.0);
        let exact = map_predict(&data, y, &paper(), &q()).unwrap();
        let b = map_predict_bonferroni(&data, y, &paper(), &q(), Some(1), 20).unwrap();
        assert_eq!(b.los, exact.los);
    }

    #[test]
    fn kn_map_with_large_k_is_map() {
        let data = [meas(80.0, 20.0, false), meas(-40.0, 90.0, true)];
        let y = Point2D::new(70.0, 70.0);
        let a = map_predict(&data, y, &paper(), &q()).unwrap();
        let b = kn_map_predict(&data, y, &paper(), &q(), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kn_map_far_neighbours_give_prior() {
        let data: Vec<Measurement> = (0..10)
            .map(|i| {
                Measurement::new(
                    Point2D::from_polar(60.0 + 8.0 * i as f64, 0.1 + 0.12 * i as f64),
                    i % 3 != 0,
                )
            })
            .collect();
        let y = Point2D::from_polar(100.0, 0.6 + PI);
        let p = kn_map_predict(&data, y, &paper(), &q(), 3).unwrap();
        let prior = (-3.0 / PI).exp();
        assert!((p.posterior.unwrap() - prior).abs() < 0.05);
    }

    #[test]
    fn nearest_angular_ties_prefer_lower_index() {
        let data = [meas(0.0, 10.0, true), meas(0.0, -10.0, true), meas(10.0, 0.0, true)];
        assert_eq!(nearest_angular(&data, Point2D::new(-5.0, 0.0), 1), vec![0]);
    }

    #[test]
    fn nb_single_measurement_equals_map() {
        let y = Point2D::new(70.0, 70.0);
        for los in [true, false] {
            let data = [meas(80.0, 20.0, los)];
            let a = map_predict(&data, y, &paper(), &q()).unwrap().posterior.unwrap();
            let b = naive_bayes_predict(&data, y, &paper(), &q())
                .unwrap()
                .posterior
                .unwrap();
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn nb_without_data_is_prior() {
        let p = naive_bayes_predict(&[], Point2D::new(100.0, 0.0), &paper(), &q()).unwrap();
        assert!((p.posterior.unwrap() - (-3.0 / PI).exp()).abs() < 1e-10);
    }

    #[test]
    fn nb_double_counts_duplicates() {
        let y = Point2D::new(70.0, 60.0);
        let x = meas(60.0, 40.0, false);
        let data = [x, x];
        let map = map_predict(&data, y, &paper(), &q()).unwrap().posterior.unwrap();
        let nb = naive_bayes_predict(&data, y, &paper(), &q())
            .unwrap()
            .posterior
            .unwrap();
        assert!(nb < map, "nb {nb} map {map}");
    }
}
