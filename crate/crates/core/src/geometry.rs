//! Planar kernel: points, angles, circles and the handful of constructions
//! the classifier and the robot procedures are built from.
//!
//! Angles come in two flavours. A [`ExactAngle::Turns`] value is a reduced
//! rational fraction of a full turn and every comparison on it is exact; an
//! [`ExactAngle::Radians`] value is a plain float compared under a
//! [`Tolerance`]. Mixing the two degrades to the float comparison.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use thiserror::Error;

/// Arbitrary precision rational used for exact angles (in turns) and radii.
pub type Rational = RBig;

/// Builds `num / den` as a reduced [`Rational`].
///
/// Panics if `den` is zero.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    let num = IBig::from(num) * IBig::from(den.signum());
    RBig::from_parts(num, UBig::from(den.unsigned_abs()))
}

/// Exact order of two rationals. The correctly rounded `f64` values settle
/// almost every comparison; the exact cross-multiplication only runs when
/// they are too close to call.
pub fn cmp_rational(a: &Rational, b: &Rational) -> Ordering {
    let (x, y) = (rat_to_f64(a), rat_to_f64(b));
    if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1e-300) {
        x.total_cmp(&y)
    } else {
        a.cmp(b)
    }
}

/// Nearest `f64` to a rational.
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().value()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("points are collinear")]
    CollinearPoints,
    #[error("ray is degenerate: a point coincides with the center")]
    DegenerateRay,
    #[error("non-finite coordinate ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("circle radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

/// Relative tolerance used for every floating comparison.
///
/// Two reals are equal when `|a - b| <= eps * max(1, |a|, |b|)`; angles are
/// additionally compared modulo a full turn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(eps: f64) -> Self {
        Tolerance { eps }
    }

    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.eps * 1f64.max(a.abs()).max(b.abs())
    }

    /// Equality of two radian values modulo `2π`.
    pub fn angle_eq(&self, a: f64, b: f64) -> bool {
        let d = (a - b).rem_euclid(TAU);
        let d = d.min(TAU - d);
        d <= self.eps * 1f64.max(a.abs()).max(b.abs())
    }

    pub fn is_zero(&self, a: f64) -> bool {
        a.abs() <= self.eps
    }

    /// Coincidence of two points, scaled by the magnitude of their coordinates.
    pub fn same_point(&self, a: Point, b: Point) -> bool {
        let scale = 1f64.max(a.norm()).max(b.norm());
        a.dist(b) <= self.eps * scale
    }
}

/// A point of the Euclidean plane. Coordinates are always finite.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Panics on non-finite input; see [`Point::try_new`].
    pub fn new(x: f64, y: f64) -> Self {
        Self::try_new(x, y).expect("point coordinates must be finite")
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(GeometryError::NonFinite(x, y))
        }
    }

    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    /// Point at `radius` and angle `theta` (radians) around `center`.
    pub fn polar(center: Point, radius: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point::new(center.x + radius * c, center.y + radius * s)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    /// Lexicographic total order on `(x, y)`.
    pub fn total_cmp(&self, other: &Point) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_real(self.x), fmt_real(self.y))
    }
}

/// Rotation sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Ccw,
    Cw,
}

/// An angle in `[0, 2π)`, either an exact fraction of a turn or real radians.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactAngle {
    /// Fraction of a full turn, reduced and normalised to `[0, 1)`.
    Turns(Rational),
    /// Radians, normalised to `[0, 2π)`.
    Radians(f64),
}

impl ExactAngle {
    pub fn zero() -> Self {
        ExactAngle::Turns(Rational::ZERO)
    }

    pub fn turns(t: Rational) -> Self {
        ExactAngle::Turns(normalize_turns(t))
    }

    pub fn from_turns(num: i64, den: i64) -> Self {
        Self::turns(rat(num, den))
    }

    /// `num / den` degrees, kept exact.
    pub fn degrees(num: i64, den: i64) -> Self {
        Self::turns(rat(num, den * 360))
    }

    /// `num / den · π`, kept exact.
    pub fn pi_fraction(num: i64, den: i64) -> Self {
        Self::turns(rat(num, 2 * den))
    }

    /// Characteristic angle `2π/n` of the regular n-gon.
    pub fn characteristic(n: usize) -> Self {
        Self::from_turns(1, n as i64)
    }

    pub fn radians(r: f64) -> Self {
        let mut v = r.rem_euclid(TAU);
        if v >= TAU {
            v = 0.0;
        }
        ExactAngle::Radians(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ExactAngle::Turns(_))
    }

    pub fn as_turns(&self) -> Option<&Rational> {
        match self {
            ExactAngle::Turns(t) => Some(t),
            ExactAngle::Radians(_) => None,
        }
    }

    pub fn to_radians(&self) -> f64 {
        match self {
            ExactAngle::Turns(t) => rat_to_f64(t) * TAU,
            ExactAngle::Radians(r) => *r,
        }
    }

    pub fn to_turns_f64(&self) -> f64 {
        match self {
            ExactAngle::Turns(t) => rat_to_f64(t),
            ExactAngle::Radians(r) => r / TAU,
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            ExactAngle::Turns(t) => Self::turns(-t.clone()),
            ExactAngle::Radians(r) => Self::radians(-r),
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        match self {
            ExactAngle::Turns(t) => Self::turns(t * k),
            ExactAngle::Radians(r) => Self::radians(r * rat_to_f64(k)),
        }
    }

    /// Equality modulo a full turn: exact for two rational angles, otherwise
    /// within `tol`.
    pub fn approx_eq(&self, other: &ExactAngle, tol: Tolerance) -> bool {
        match (self, other) {
            (ExactAngle::Turns(a), ExactAngle::Turns(b)) => a == b,
            _ => tol.angle_eq(self.to_radians(), other.to_radians()),
        }
    }

    pub fn is_zero(&self, tol: Tolerance) -> bool {
        self.approx_eq(&ExactAngle::zero(), tol)
    }

    /// Order by normalised value, without wraparound.
    pub fn cmp_value(&self, other: &ExactAngle) -> Ordering {
        match (self, other) {
            (ExactAngle::Turns(a), ExactAngle::Turns(b)) => cmp_rational(a, b),
            _ => self.to_radians().total_cmp(&other.to_radians()),
        }
    }

    /// Returns `m` when this angle equals `m · 2π/n` for an integer
    /// `0 <= m < n`.
    pub fn lattice_index(&self, n: usize, tol: Tolerance) -> Option<usize> {
        match self {
            ExactAngle::Turns(t) => {
                let m = t * rat(n as i64, 1);
                if m.is_int() {
                    usize::try_from(m.numerator()).ok()
                } else {
                    None
                }
            }
            ExactAngle::Radians(r) => {
                let unit = TAU / n as f64;
                let m = (r / unit).round();
                if tol.eq(*r, m * unit) {
                    Some((m as usize) % n)
                } else if tol.angle_eq(*r, 0.0) {
                    Some(0)
                } else {
                    None
                }
            }
        }
    }
}

impl Add for &ExactAngle {
    type Output = ExactAngle;
    fn add(self, o: &ExactAngle) -> ExactAngle {
        match (self, o) {
            (ExactAngle::Turns(a), ExactAngle::Turns(b)) => ExactAngle::turns(a + b),
            _ => ExactAngle::radians(self.to_radians() + o.to_radians()),
        }
    }
}

impl Sub for &ExactAngle {
    type Output = ExactAngle;
    fn sub(self, o: &ExactAngle) -> ExactAngle {
        match (self, o) {
            (ExactAngle::Turns(a), ExactAngle::Turns(b)) => ExactAngle::turns(a - b),
            _ => ExactAngle::radians(self.to_radians() - o.to_radians()),
        }
    }
}

impl Mul<&Rational> for &ExactAngle {
    type Output = ExactAngle;
    fn mul(self, k: &Rational) -> ExactAngle {
        self.scale(k)
    }
}

impl fmt::Display for ExactAngle {
    /// Exact angles print as a reduced fraction of π, others with 12
    /// significant digits (radians).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactAngle::Turns(t) => {
                let pis = t * rat(2, 1);
                if pis.is_zero() {
                    return write!(f, "0");
                }
                let (n, d) = (pis.numerator(), pis.denominator());
                let num = if n.is_one() {
                    "π".to_string()
                } else {
                    format!("{n}π")
                };
                if d.is_one() {
                    write!(f, "{num}")
                } else {
                    write!(f, "{num}/{d}")
                }
            }
            ExactAngle::Radians(r) => write!(f, "{}", fmt_real(*r)),
        }
    }
}

/// 12 significant digits, trailing zeros trimmed.
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let digits = 12i32 - 1 - v.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.clamp(0, 17) as usize, v);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn normalize_turns(t: Rational) -> Rational {
    // angle sums and differences land in [-1, 2); avoid the division
    if t >= Rational::ZERO {
        if t < Rational::ONE {
            return t;
        }
        let u = t - Rational::ONE;
        if u < Rational::ONE {
            return u;
        }
        let fl = RBig::from(u.floor());
        return u - fl;
    }
    if t >= -Rational::ONE {
        return t + Rational::ONE;
    }
    let fl = RBig::from(t.floor());
    let v = t - fl;
    debug_assert!(v >= Rational::ZERO);
    v
}

/// Non-negative scalar (a radius, or an arc measured in turns) that stays
/// exact when it was derived from rational inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Magnitude {
    Exact(Rational),
    Real(f64),
}

impl Magnitude {
    pub fn to_f64(&self) -> f64 {
        match self {
            Magnitude::Exact(r) => rat_to_f64(r),
            Magnitude::Real(v) => *v,
        }
    }

    pub fn approx_eq(&self, other: &Magnitude, tol: Tolerance) -> bool {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => a == b,
            _ => tol.eq(self.to_f64(), other.to_f64()),
        }
    }

    pub fn cmp_value(&self, other: &Magnitude) -> Ordering {
        match (self, other) {
            (Magnitude::Exact(a), Magnitude::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Magnitude::Exact(r) => Some(r),
            Magnitude::Real(_) => None,
        }
    }
}

/// Circle with strictly positive radius.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Circle { center, radius })
        } else {
            Err(GeometryError::NonPositiveRadius(radius))
        }
    }

    pub fn contains_on_boundary(&self, p: Point, tol: Tolerance) -> bool {
        tol.eq(p.dist(self.center), self.radius)
    }

    pub fn same_as(&self, other: &Circle, tol: Tolerance) -> bool {
        tol.same_point(self.center, other.center) && tol.eq(self.radius, other.radius)
    }
}

/// Exact polar coordinates relative to an externally known center.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polar {
    /// Strictly positive.
    pub radius: Rational,
    /// Normalised to `[0, 1)`.
    pub turns: Rational,
}

impl Polar {
    pub fn new(radius: Rational, turns: Rational) -> Self {
        debug_assert!(radius > Rational::ZERO);
        Polar {
            radius,
            turns: normalize_turns(turns),
        }
    }

    pub fn angle(&self) -> ExactAngle {
        ExactAngle::Turns(self.turns.clone())
    }

    pub fn to_point(&self, center: Point) -> Point {
        Point::polar(center, rat_to_f64(&self.radius), rat_to_f64(&self.turns) * TAU)
    }

    /// Exact counterclockwise angle from `self` to `other` about the shared
    /// center.
    pub fn angle_ccw_to(&self, other: &Polar) -> ExactAngle {
        ExactAngle::turns(&other.turns - &self.turns)
    }

    /// Exact rotation about the shared center.
    pub fn rotated(&self, theta: &Rational, orientation: Orientation) -> Polar {
        let t = match orientation {
            Orientation::Ccw => &self.turns + theta,
            Orientation::Cw => &self.turns - theta,
        };
        Polar::new(self.radius.clone(), t)
    }

    pub fn with_radius(&self, radius: Rational) -> Polar {
        Polar::new(radius, self.turns.clone())
    }
}

/// Center of the circle through three points.
pub fn circumcenter(a: Point, b: Point, c: Point, tol: Tolerance) -> Result<Point, GeometryError> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    let scale = ab.norm().max(ac.norm());
    if scale == 0.0 || d.abs() <= tol.eps * scale * scale {
        return Err(GeometryError::CollinearPoints);
    }
    let ab2 = ab.dot(ab);
    let ac2 = ac.dot(ac);
    let ux = (ac.y * ab2 - ab.y * ac2) / d;
    let uy = (ab.x * ac2 - ac.x * ab2) / d;
    Point::try_new(a.x + ux, a.y + uy)
}

/// Counterclockwise angle in `[0, 2π)` from ray `[center, from)` to ray
/// `[center, to)`. Always real; use [`Polar::angle_ccw_to`] for the exact
/// path when both points carry rational polar coordinates.
pub fn angle_ccw(
    center: Point,
    from: Point,
    to: Point,
    tol: Tolerance,
) -> Result<ExactAngle, GeometryError> {
    if tol.same_point(from, center) || tol.same_point(to, center) {
        return Err(GeometryError::DegenerateRay);
    }
    let u = from - center;
    let v = to - center;
    Ok(ExactAngle::radians(u.cross(v).atan2(u.dot(v))))
}

pub fn rotate_about(
    center: Point,
    p: Point,
    theta: &ExactAngle,
    orientation: Orientation,
    tol: Tolerance,
) -> Result<Point, GeometryError> {
    if tol.same_point(p, center) {
        return Err(GeometryError::DegenerateRay);
    }
    let t = match orientation {
        Orientation::Ccw => theta.to_radians(),
        Orientation::Cw => -theta.to_radians(),
    };
    let (s, c) = t.sin_cos();
    let v = p - center;
    Ok(Point::new(
        center.x + c * v.x - s * v.y,
        center.y + s * v.x + c * v.y,
    ))
}

/// Intersection of the half-line `[target.center, p)` with `target`.
pub fn project_to_circle(target: &Circle, p: Point, tol: Tolerance) -> Result<Point, GeometryError> {
    if tol.same_point(p, target.center) {
        return Err(GeometryError::DegenerateRay);
    }
    let v = p - target.center;
    let d = v.norm();
    if tol.eq(d, target.radius) {
        return Ok(p);
    }
    Ok(target.center + v.scale(target.radius / d))
}

/// Do the closed segments `[a, b]` and `[c, d]` share a point?
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point, tol: Tolerance) -> bool {
    let scale = 1f64
        .max(a.norm())
        .max(b.norm())
        .max(c.norm())
        .max(d.norm());
    let eps = tol.eps * scale * scale;
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    let sgn = |v: f64| if v > eps { 1 } else if v < -eps { -1 } else { 0 };
    let (s1, s2, s3, s4) = (sgn(o1), sgn(o2), sgn(o3), sgn(o4));
    if s1 * s2 < 0 && s3 * s4 < 0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r.x >= p.x.min(q.x) - eps
            && r.x <= p.x.max(q.x) + eps
            && r.y >= p.y.min(q.y) - eps
            && r.y <= p.y.max(q.y) + eps
    };
    (s1 == 0 && on(a, b, c))
        || (s2 == 0 && on(a, b, d))
        || (s3 == 0 && on(c, d, a))
        || (s4 == 0 && on(c, d, b))
}
