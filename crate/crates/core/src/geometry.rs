//! Planar primitives: points, segments, circular arcs and the distance,
//! projection and winding queries the walker needs.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(radius * c, radius * s)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Straight boundary piece from `start` to `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point2,
    pub end: Point2,
}

impl Segment {
    pub const fn new(start: Point2, end: Point2) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn closest_point(&self, p: Point2) -> Point2 {
        let d = self.end - self.start;
        let len_sq = d.norm_sq();
        if len_sq == 0.0 {
            return self.start;
        }
        let t = ((p - self.start).dot(d) / len_sq).clamp(0.0, 1.0);
        self.start + d * t
    }

    pub fn distance(&self, p: Point2) -> f64 {
        p.distance(self.closest_point(p))
    }
}

/// Circular arc from `start_angle` to `end_angle`. `sweep` is the signed
/// angle travelled (positive is counterclockwise), `0 < |sweep| <= 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: Point2,
    pub radius: f64,
    pub start_angle: f64,
    pub end_angle: f64,
    pub sweep: f64,
}

impl Arc {
    /// Arc from `from_angle` to `to_angle`, travelling counterclockwise when
    /// `ccw` is set. Equal angles (mod 2π) describe a full circle.
    pub fn new(center: Point2, radius: f64, from_angle: f64, to_angle: f64, ccw: bool) -> Self {
        let raw = if ccw {
            (to_angle - from_angle).rem_euclid(TAU)
        } else {
            (from_angle - to_angle).rem_euclid(TAU)
        };
        let magnitude = if raw <= 1e-15 || TAU - raw <= 1e-15 { TAU } else { raw };
        Self {
            center,
            radius,
            start_angle: from_angle,
            end_angle: to_angle,
            sweep: if ccw { magnitude } else { -magnitude },
        }
    }

    pub fn from_sweep(center: Point2, radius: f64, start_angle: f64, sweep: f64) -> Self {
        Self {
            center,
            radius,
            start_angle,
            end_angle: start_angle + sweep,
            sweep,
        }
    }

    pub fn is_ccw(&self) -> bool {
        self.sweep > 0.0
    }

    pub fn point_at_angle(&self, angle: f64) -> Point2 {
        self.center + Point2::from_polar(self.radius, angle)
    }

    pub fn start(&self) -> Point2 {
        self.point_at_angle(self.start_angle)
    }

    pub fn end(&self) -> Point2 {
        self.point_at_angle(self.end_angle)
    }

    pub fn midpoint(&self) -> Point2 {
        self.point_at_angle(self.start_angle + 0.5 * self.sweep)
    }

    pub fn is_full_circle(&self) -> bool {
        (self.sweep.abs() - TAU).abs() <= 1e-12
    }

    /// Angular offset of direction `angle` from the start, measured along the
    /// arc's direction of travel, in `[0, 2π)`.
    fn offset_along(&self, angle: f64) -> f64 {
        if self.sweep > 0.0 {
            (angle - self.start_angle).rem_euclid(TAU)
        } else {
            (self.start_angle - angle).rem_euclid(TAU)
        }
    }

    pub fn contains_angle(&self, angle: f64) -> bool {
        self.is_full_circle() || self.offset_along(angle) <= self.sweep.abs()
    }

    pub fn closest_point(&self, p: Point2) -> Point2 {
        let rel = p - self.center;
        if rel.norm_sq() == 0.0 {
            return self.start();
        }
        let angle = rel.angle();
        if self.contains_angle(angle) {
            return self.center + rel * (self.radius / rel.norm());
        }
        let (a, b) = (self.start(), self.end());
        if p.distance(a) <= p.distance(b) {
            a
        } else {
            b
        }
    }

    pub fn distance(&self, p: Point2) -> f64 {
        let rel = p - self.center;
        let r = rel.norm();
        if r == 0.0 {
            return self.radius;
        }
        if self.contains_angle(rel.angle()) {
            (r - self.radius).abs()
        } else {
            p.distance(self.start()).min(p.distance(self.end()))
        }
    }

    /// Reverse the direction of travel without changing the point set.
    pub fn reversed(&self) -> Self {
        Self {
            center: self.center,
            radius: self.radius,
            start_angle: self.end_angle,
            end_angle: self.start_angle,
            sweep: -self.sweep,
        }
    }
}

/// A boundary piece: either a segment or a circular arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Segment(Segment),
    Arc(Arc),
}

impl Piece {
    pub fn start(&self) -> Point2 {
        match self {
            Piece::Segment(s) => s.start,
            Piece::Arc(a) => a.start(),
        }
    }

    pub fn end(&self) -> Point2 {
        match self {
            Piece::Segment(s) => s.end,
            Piece::Arc(a) => a.end(),
        }
    }

    pub fn midpoint(&self) -> Point2 {
        match self {
            Piece::Segment(s) => (s.start + s.end) * 0.5,
            Piece::Arc(a) => a.midpoint(),
        }
    }

    /// Point at parameter `t ∈ [0, 1]` along the piece.
    pub fn point_at(&self, t: f64) -> Point2 {
        match self {
            Piece::Segment(s) => s.start + (s.end - s.start) * t,
            Piece::Arc(a) => a.point_at_angle(a.start_angle + t * a.sweep),
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Piece::Segment(s) => s.length(),
            Piece::Arc(a) => a.radius * a.sweep.abs(),
        }
    }

    pub fn distance(&self, p: Point2) -> f64 {
        match self {
            Piece::Segment(s) => s.distance(p),
            Piece::Arc(a) => a.distance(p),
        }
    }

    pub fn closest_point(&self, p: Point2) -> Point2 {
        match self {
            Piece::Segment(s) => s.closest_point(p),
            Piece::Arc(a) => a.closest_point(p),
        }
    }

    pub fn reversed(&self) -> Self {
        match self {
            Piece::Segment(s) => Piece::Segment(Segment::new(s.end, s.start)),
            Piece::Arc(a) => Piece::Arc(a.reversed()),
        }
    }

    /// Contribution of this piece to `∮ (x dy − y dx) / 2`, i.e. to the
    /// signed area enclosed by a closed chain of pieces.
    pub fn signed_area_term(&self) -> f64 {
        match self {
            Piece::Segment(s) => 0.5 * s.start.cross(s.end),
            Piece::Arc(a) => {
                let (t0, t1) = (a.start_angle, a.start_angle + a.sweep);
                let (c, r) = (a.center, a.radius);
                0.5 * (r * r * a.sweep + r * c.x * (t1.sin() - t0.sin())
                    - r * c.y * (t1.cos() - t0.cos()))
            }
        }
    }

    /// Signed angle the piece subtends as seen from `p`. Summed over a
    /// closed chain this is `2π` times the winding number.
    pub fn winding_angle(&self, p: Point2) -> f64 {
        let chord = |a: Point2, b: Point2| {
            let (u, v) = (a - p, b - p);
            u.cross(v).atan2(u.dot(v))
        };
        match self {
            Piece::Segment(s) => chord(s.start, s.end),
            Piece::Arc(a) => {
                let inside_circle = (p - a.center).norm_sq() < a.radius * a.radius;
                if a.is_full_circle() {
                    return if inside_circle { TAU.copysign(a.sweep) } else { 0.0 };
                }
                let (s, e) = (a.start(), a.end());
                let mut angle = chord(s, e);
                if inside_circle {
                    // p inside the region bounded by the arc and its chord?
                    let dir = e - s;
                    let side_p = dir.cross(p - s);
                    let side_mid = dir.cross(a.midpoint() - s);
                    if side_p * side_mid > 0.0 {
                        angle += TAU.copysign(a.sweep);
                    }
                }
                angle
            }
        }
    }

    /// Points that bound the piece's extent: endpoints plus any axis
    /// extreme of an arc that lies inside its sweep.
    pub fn extent_points(&self) -> Vec<Point2> {
        match self {
            Piece::Segment(s) => vec![s.start, s.end],
            Piece::Arc(a) => {
                let mut pts = vec![a.start(), a.end()];
                for k in 0..4 {
                    let angle = k as f64 * 0.5 * PI;
                    if a.contains_angle(angle) {
                        pts.push(a.point_at_angle(angle));
                    }
                }
                pts
            }
        }
    }
}

impl Piece {
    /// Unit tangent in the direction of travel at parameter `t`.
    pub fn tangent_at(&self, t: f64) -> Point2 {
        match self {
            Piece::Segment(s) => {
                let d = s.end - s.start;
                d * (1.0 / d.norm())
            }
            Piece::Arc(a) => {
                let radial = Point2::from_polar(1.0, a.start_angle + t * a.sweep);
                if a.sweep > 0.0 {
                    radial.perp()
                } else {
                    -radial.perp()
                }
            }
        }
    }

    /// Parameter in `[0, 1]` of the point of the piece nearest `p`.
    pub fn param_of(&self, p: Point2) -> f64 {
        match self {
            Piece::Segment(s) => {
                let d = s.end - s.start;
                let len_sq = d.norm_sq();
                if len_sq == 0.0 {
                    return 0.0;
                }
                ((p - s.start).dot(d) / len_sq).clamp(0.0, 1.0)
            }
            Piece::Arc(a) => {
                let off = a.offset_along((p - a.center).angle());
                if off <= a.sweep.abs() {
                    off / a.sweep.abs()
                } else if p.distance(a.start()) <= p.distance(a.end()) {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// The part of the piece between parameters `t0 < t1`.
    pub fn sub_piece(&self, t0: f64, t1: f64) -> Piece {
        match self {
            Piece::Segment(_) => Segment::new(self.point_at(t0), self.point_at(t1)).into(),
            Piece::Arc(a) => {
                Arc::from_sweep(a.center, a.radius, a.start_angle + t0 * a.sweep, (t1 - t0) * a.sweep).into()
            }
        }
    }

    /// Parameters along `self` at which it meets `other` (crossings and
    /// tangencies), together with the endpoints of `other` that lie on
    /// `self`. Sorted, within `tol` absolute distance.
    pub fn split_params(&self, other: &Piece, tol: f64) -> Vec<f64> {
        let mut candidates = curve_intersections(&Curve::of(self), &Curve::of(other));
        candidates.push(other.start());
        candidates.push(other.end());
        let mut ts: Vec<f64> = candidates
            .into_iter()
            .filter(|q| q.is_finite() && self.distance(*q) <= tol && other.distance(*q) <= tol)
            .map(|q| self.param_of(q))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        ts
    }
}

/// Supporting line or circle of a piece.
enum Curve {
    Line { point: Point2, direction: Point2 },
    Circle { center: Point2, radius: f64 },
}

impl Curve {
    fn of(piece: &Piece) -> Self {
        match piece {
            Piece::Segment(s) => Curve::Line {
                point: s.start,
                direction: s.end - s.start,
            },
            Piece::Arc(a) => Curve::Circle {
                center: a.center,
                radius: a.radius,
            },
        }
    }
}

fn line_circle(point: Point2, direction: Point2, center: Point2, radius: f64) -> Vec<Point2> {
    // |point + t·direction − center|² = radius²
    let f = point - center;
    let a = direction.norm_sq();
    let b = f.dot(direction);
    let c = f.norm_sq() - radius * radius;
    let disc = b * b - a * c;
    if a == 0.0 || disc < -1e-12 * b.abs().max(a * radius * radius) {
        return Vec::new();
    }
    let root = disc.max(0.0).sqrt();
    vec![point + direction * ((-b - root) / a), point + direction * ((-b + root) / a)]
}

fn curve_intersections(a: &Curve, b: &Curve) -> Vec<Point2> {
    match (a, b) {
        (
            Curve::Line {
                point: p,
                direction: d,
            },
            Curve::Line {
                point: q,
                direction: e,
            },
        ) => {
            let denom = d.cross(*e);
            if denom.abs() <= 1e-14 * d.norm() * e.norm() {
                return Vec::new();
            }
            vec![*p + *d * ((*q - *p).cross(*e) / denom)]
        }
        (Curve::Line { point, direction }, Curve::Circle { center, radius })
        | (Curve::Circle { center, radius }, Curve::Line { point, direction }) => {
            line_circle(*point, *direction, *center, *radius)
        }
        (
            Curve::Circle {
                center: c0,
                radius: r0,
            },
            Curve::Circle {
                center: c1,
                radius: r1,
            },
        ) => {
            let dv = *c1 - *c0;
            let d = dv.norm();
            if d == 0.0 || d > r0 + r1 + 1e-12 * d || d < (r0 - r1).abs() - 1e-12 * d {
                return Vec::new();
            }
            let along = (d * d + r0 * r0 - r1 * r1) / (2.0 * d);
            let half = (r0 * r0 - along * along).max(0.0).sqrt();
            let base = *c0 + dv * (along / d);
            let off = dv.perp() * (half / d);
            vec![base + off, base - off]
        }
    }
}

impl From<Segment> for Piece {
    fn from(s: Segment) -> Self {
        Piece::Segment(s)
    }
}

impl From<Arc> for Piece {
    fn from(a: Arc) -> Self {
        Piece::Arc(a)
    }
}

/// Axis-aligned bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub fn from_points(points: impl IntoIterator<Item = Point2>) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Direction drawn uniformly from the unit circle.
pub fn uniform_unit_vector2<R: Rng + ?Sized>(rng: &mut R) -> Point2 {
    let angle = TAU * rng.random::<f64>();
    Point2::from_polar(1.0, angle)
}

/// Circle through three points, or `None` when they are (nearly) collinear.
pub fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<(Point2, f64)> {
    let (ab, ac) = (b - a, c - a);
    let d = 2.0 * ab.cross(ac);
    let scale = ab.norm_sq().max(ac.norm_sq());
    if d.abs() <= 1e-14 * scale {
        return None;
    }
    let (b2, c2) = (ab.norm_sq(), ac.norm_sq());
    let ux = (ac.y * b2 - ab.y * c2) / d;
    let uy = (ab.x * c2 - ac.x * b2) / d;
    let rel = Point2::new(ux, uy);
    Some((a + rel, rel.norm()))
}

/// The arc of the circle `(center, radius)` that starts at `start`, passes
/// through `via` and ends at `end`.
pub fn arc_through(center: Point2, radius: f64, start: Point2, via: Point2, end: Point2) -> Arc {
    let a0 = (start - center).angle();
    let am = (via - center).angle();
    let a1 = (end - center).angle();
    let ccw = Arc::new(center, radius, a0, a1, true);
    if ccw.contains_angle(am) {
        ccw
    } else {
        Arc::new(center, radius, a0, a1, false)
    }
}
