//! Planar primitives: points, obstacle segments, links, blocking
//! parallelograms, convex union areas and the segment-visibility oracle.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Absolute tolerance in meters for contact and collinearity tests.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, azimuth: f64) -> Self {
        let (s, c) = azimuth.sin_cos();
        Self::new(radius * c, radius * s)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Azimuth in `[0, 2π)`.
    pub fn azimuth(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a < 0.0 {
            (a + TAU) % TAU
        } else {
            a
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates the point about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Self) -> Self {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Self) -> Self {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, rhs: f64) -> Self {
        Point2D::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2D {
    type Output = Point2D;
    fn neg(self) -> Self {
        Point2D::new(-self.x, -self.y)
    }
}

/// Maps any angle onto `[0, π)`; a segment's orientation is defined modulo π.
pub fn normalize_orientation(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// A straight blocking element described by its center, length and orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleSegment {
    pub center: Point2D,
    pub length: f64,
    pub orientation: f64,
}

impl ObstacleSegment {
    pub fn new(center: Point2D, length: f64, orientation: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid("center", "obstacle center must be finite"));
        }
        if !(length >= 0.0) || !length.is_finite() {
            return Err(Error::invalid(
                "length",
                format!("must be finite and >= 0, got {length}"),
            ));
        }
        if !orientation.is_finite() {
            return Err(Error::invalid("orientation", "must be finite"));
        }
        Ok(Self {
            center,
            length,
            orientation: normalize_orientation(orientation),
        })
    }

    pub fn from_endpoints(a: Point2D, b: Point2D) -> Result<Self> {
        let d = b - a;
        Self::new((a + b) * 0.5, d.norm(), d.y.atan2(d.x))
    }

    pub fn endpoints(&self) -> (Point2D, Point2D) {
        let half = Point2D::from_polar(0.5 * self.length, self.orientation);
        (self.center - half, self.center + half)
    }
}

/// A straight radio link, conventionally from the base station to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub endpoint_a: Point2D,
    pub endpoint_b: Point2D,
}

impl Link {
    pub fn new(endpoint_a: Point2D, endpoint_b: Point2D) -> Self {
        Self { endpoint_a, endpoint_b }
    }

    pub fn from_origin(endpoint_b: Point2D) -> Self {
        Self::new(Point2D::ORIGIN, endpoint_b)
    }

    pub fn length(&self) -> f64 {
        self.endpoint_a.distance(self.endpoint_b)
    }

    pub fn azimuth(&self) -> f64 {
        (self.endpoint_b - self.endpoint_a).azimuth()
    }
}

/// Locus of obstacle centers (fixed length and orientation) that block a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingQuad {
    /// Counter-clockwise; collinear when the quad is degenerate.
    pub vertices: [Point2D; 4],
    pub area: f64,
}

impl BlockingQuad {
    fn from_vertices(mut vertices: [Point2D; 4]) -> Self {
        let signed = shoelace(&vertices);
        if signed < 0.0 {
            vertices.reverse();
        }
        Self {
            vertices,
            area: signed.abs(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.vertices)
    }

    pub fn is_degenerate(&self) -> bool {
        is_thin(&self.vertices, self.area)
    }

    /// Closed membership test with [`GEOM_EPS`] slack.
    pub fn contains(&self, p: Point2D) -> bool {
        if self.is_degenerate() {
            let (a, b) = farthest_pair(&self.vertices);
            return point_segment_distance(p, a, b) <= GEOM_EPS;
        }
        let v = &self.vertices;
        (0..4).all(|i| {
            let a = v[i];
            let b = v[(i + 1) % 4];
            let e = b - a;
            e.cross(p - a) / e.norm() >= -GEOM_EPS
        })
    }
}

/// Parallelogram of centers `c` such that the obstacle `(c, l, θ)` touches `link`.
pub fn blocking_quad(link: &Link, length: f64, theta: f64) -> BlockingQuad {
    let half = Point2D::from_polar(0.5 * length, theta);
    let a = link.endpoint_a;
    let b = link.endpoint_b;
    BlockingQuad::from_vertices([a - half, b - half, b + half, a + half])
}

pub(crate) fn shoelace(vertices: &[Point2D]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum::<f64>()
}

fn perimeter(vertices: &[Point2D]) -> f64 {
    let n = vertices.len();
    (0..n).map(|i| vertices[i].distance(vertices[(i + 1) % n])).sum()
}

/// A polygon thinner than the tolerance everywhere has no area to contribute.
fn is_thin(vertices: &[Point2D], area: f64) -> bool {
    area <= GEOM_EPS * perimeter(vertices).max(GEOM_EPS)
}

fn farthest_pair(vertices: &[Point2D]) -> (Point2D, Point2D) {
    let mut best = (vertices[0], vertices[0], -1.0);
    for (i, &p) in vertices.iter().enumerate() {
        for &q in &vertices[i + 1..] {
            let d = p.distance(q);
            if d > best.2 {
                best = (p, q, d);
            }
        }
    }
    (best.0, best.1)
}

pub fn point_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Closed-segment intersection. Touching and collinear overlap both count.
pub fn segments_intersect(s1: (Point2D, Point2D), s2: (Point2D, Point2D)) -> bool {
    let (p1, p2) = s1;
    let (q1, q2) = s2;
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    point_segment_distance(q1, p1, p2) <= GEOM_EPS
        || point_segment_distance(q2, p1, p2) <= GEOM_EPS
        || point_segment_distance(p1, q1, q2) <= GEOM_EPS
        || point_segment_distance(p2, q1, q2) <= GEOM_EPS
}

/// Ground truth: `true` (LOS) iff no obstacle touches the segment `bs → x`.
pub fn is_los(obstacles: &[ObstacleSegment], bs: Point2D, x: Point2D) -> bool {
    if bs.distance(x) <= GEOM_EPS {
        return true;
    }
    obstacles.iter().all(|o| !segments_intersect((bs, x), o.endpoints()))
}

/// Obstacle endpoints precomputed for repeated visibility queries.
#[derive(Debug, Clone, Default)]
pub struct Occluders {
    segments: Vec<(Point2D, Point2D)>,
}

impl Occluders {
    pub fn new(obstacles: &[ObstacleSegment]) -> Self {
        Self {
            segments: obstacles.iter().map(ObstacleSegment::endpoints).collect(),
        }
    }

    pub fn is_los(&self, bs: Point2D, x: Point2D) -> bool {
        if bs.distance(x) <= GEOM_EPS {
            return true;
        }
        self.segments.iter().all(|&s| !segments_intersect((bs, x), s))
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Absolute difference of azimuths seen from `bs`, wrapped into `[0, π]`.
/// Returns 0 when either point coincides with `bs`.
pub fn angular_distance(bs: Point2D, p: Point2D, q: Point2D) -> f64 {
    let u = p - bs;
    let v = q - bs;
    if u.norm() <= GEOM_EPS || v.norm() <= GEOM_EPS {
        return 0.0;
    }
    let diff = (u.azimuth() - v.azimuth()).abs() % TAU;
    if diff > PI {
        TAU - diff
    } else {
        diff
    }
}

/// Exact area of the union of blocking quads.
pub fn union_area(quads: &[BlockingQuad]) -> f64 {
    let polys: Vec<&[Point2D]> = quads
        .iter()
        .filter(|q| !q.is_degenerate())
        .map(|q| &q.vertices[..])
        .collect();
    union_area_convex(&polys)
}

/// Exact area of a union of convex counter-clockwise polygons.
///
/// Integrates `½(x dy − y dx)` along the parts of every edge that are not
/// covered by another polygon. An edge lying on another polygon's edge is
/// kept once when both run the same way (lowest index wins) and dropped
/// when they run opposite ways, since it is then interior to the union.
pub fn union_area_convex(polys: &[&[Point2D]]) -> f64 {
    let polys: Vec<&[Point2D]> = polys
        .iter()
        .copied()
        .filter(|p| p.len() >= 3 && !is_thin(p, shoelace(p).abs()))
        .collect();
    let mut total = 0.0;
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for (i, poly) in polys.iter().enumerate() {
        let n = poly.len();
        for k in 0..n {
            let p = poly[k];
            let q = poly[(k + 1) % n];
            let d = q - p;
            if d.norm() <= GEOM_EPS {
                continue;
            }
            covered.clear();
            for (j, other) in polys.iter().enumerate() {
                if j == i {
                    continue;
                }
                if let Some(span) = clip_edge(p, d, other, j < i) {
                    covered.push(span);
                }
            }
            total += uncovered_contribution(p, d, &mut covered);
        }
    }
    total.max(0.0)
}

/// Parameter range of `p + t·d`, `t ∈ [0,1]`, inside the convex polygon.
fn clip_edge(p: Point2D, d: Point2D, poly: &[Point2D], wins_ties: bool) -> Option<(f64, f64)> {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let n = poly.len();
    for k in 0..n {
        let a = poly[k];
        let e = poly[(k + 1) % n] - a;
        let len = e.norm();
        if len <= GEOM_EPS {
            continue;
        }
        let s0 = e.cross(p - a) / len;
        let s1 = e.cross(d) / len;
        if s0.abs() <= GEOM_EPS && (s0 + s1).abs() <= GEOM_EPS {
            let same_direction = e.dot(d) > 0.0;
            if same_direction && !wins_ties {
                return None;
            }
            continue;
        }
        if s1 > 0.0 {
            lo = lo.max(-s0 / s1);
        } else if s1 < 0.0 {
            hi = hi.min(-s0 / s1);
        } else if s0 <= 0.0 {
            return None;
        }
        if lo >= hi {
            return None;
        }
    }
    Some((lo, hi))
}

fn uncovered_contribution(p: Point2D, d: Point2D, covered: &mut [(f64, f64)]) -> f64 {
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let piece = |t0: f64, t1: f64| {
        let a = p + d * t0;
        let b = p + d * t1;
        0.5 * a.cross(b)
    };
    let mut sum = 0.0;
    let mut cursor = 0.0;
    for &(lo, hi) in covered.iter() {
        if lo > cursor {
            sum += piece(cursor, lo);
        }
        cursor = cursor.max(hi);
        if cursor >= 1.0 {
            return sum;
        }
    }
    if cursor < 1.0 {
        sum += piece(cursor, 1.0);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point2D> {
        vec![p(x0, y0), p(x0 + s, y0), p(x0 + s, y0 + s), p(x0, y0 + s)]
    }

    #[test]
    fn crossing_and_parallel_segments() {
        assert!(segments_intersect((p(0., 0.), p(2., 0.)), (p(1., -1.), p(1., 1.))));
        assert!(!segments_intersect((p(0., 0.), p(1., 0.)), (p(0., 1.), p(1., 1.))));
    }

    #[test]
    fn collinear_overlap_counts() {
        assert!(segments_intersect((p(0., 0.), p(2., 0.)), (p(1., 0.), p(3., 0.))));
        assert!(!segments_intersect((p(0., 0.), p(1., 0.)), (p(2., 0.), p(3., 0.))));
        // Brute force on a fine parametric sample of both segments.
        let hit = (0..=200).any(|i| {
            let a = p(2.0 * i as f64 / 200.0, 0.0);
            (0..=200).any(|j| a.distance(p(1.0 + 2.0 * j as f64 / 200.0, 0.0)) < 1e-12)
        });
        assert!(hit);
    }

    #[test]
    fn touching_endpoint_blocks() {
        // Obstacle from (50, 0) up to (50, 10): its endpoint sits on the link.
        let o = ObstacleSegment::from_endpoints(p(50., 0.), p(50., 10.)).unwrap();
        assert!(!is_los(&[o], Point2D::ORIGIN, p(100., 0.)));
        assert!(segments_intersect(o.endpoints(), (Point2D::ORIGIN, p(100., 0.))));
    }

    #[test]
    fn los_basics() {
        assert!(is_los(&[], Point2D::ORIGIN, p(30., 40.)));
        let o = ObstacleSegment::new(p(50., 0.), 10.0, PI / 2.0).unwrap();
        assert!(!is_los(&[o], Point2D::ORIGIN, p(100., 0.)));
        assert!(is_los(&[o], Point2D::ORIGIN, p(0., 100.)));
        assert!(is_los(&[o], Point2D::ORIGIN, Point2D::ORIGIN));
    }

    #[test]
    fn orientation_is_normalized() {
        let o = ObstacleSegment::new(Point2D::ORIGIN, 1.0, -PI / 4.0).unwrap();
        assert!((o.orientation - 3.0 * PI / 4.0).abs() < 1e-15);
        let o = ObstacleSegment::new(Point2D::ORIGIN, 1.0, PI).unwrap();
        assert_eq!(o.orientation, 0.0);
        assert!(ObstacleSegment::new(Point2D::ORIGIN, -1.0, 0.0).is_err());
    }

    #[test]
    fn quad_area_cases() {
        let link = Link::from_origin(p(100., 0.));
        let q = blocking_quad(&link, 20.0, PI / 2.0);
        assert!((q.area - 2000.0).abs() < 1e-9);
        assert!(shoelace(&q.vertices) > 0.0);
        let flat = blocking_quad(&link, 20.0, 0.0);
        assert_eq!(flat.area, 0.0);
        assert!(flat.is_degenerate());
        assert!(flat.contains(p(105., 0.)));
        assert!(!flat.contains(p(111., 0.)));
    }

    #[test]
    fn angular_distance_cases() {
        let o = Point2D::ORIGIN;
        let az = |a: f64| Point2D::from_polar(10.0, a);
        assert!((angular_distance(o, az(0.0), az(PI / 2.0)) - PI / 2.0).abs() < 1e-12);
        assert!((angular_distance(o, az(0.1), az(TAU - 0.1)) - 0.2).abs() < 1e-12);
        assert!((angular_distance(o, az(0.0), az(PI)) - PI).abs() < 1e-12);
        assert_eq!(angular_distance(o, o, az(1.0)), 0.0);
    }

    #[test]
    fn union_identical_and_disjoint() {
        let a = square(0., 0., 1.);
        let b = square(3., 0., 1.);
        assert!((union_area_convex(&[&a, &a]) - 1.0).abs() < 1e-12);
        assert!((union_area_convex(&[&a, &b]) - 2.0).abs() < 1e-12);
        // Edge-adjacent squares share an edge running opposite ways.
        let c = square(1., 0., 1.);
        assert!((union_area_convex(&[&a, &c]) - 2.0).abs() < 1e-12);
        // Overlap by half.
        let h = square(0.5, 0., 1.);
        assert!((union_area_convex(&[&a, &h]) - 1.5).abs() < 1e-12);
        // Nested.
        let big = square(-1., -1., 3.);
        assert!((union_area_convex(&[&a, &big]) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn union_ignores_degenerate_quads() {
        let link = Link::from_origin(p(100., 0.));
        let q = blocking_quad(&link, 20.0, 1.0);
        let flat = blocking_quad(&link, 20.0, 0.0);
        assert!((union_area(&[q, flat]) - q.area).abs() < 1e-9);
        assert_eq!(union_area(&[flat]), 0.0);
        assert_eq!(union_area(&[]), 0.0);
    }
}
