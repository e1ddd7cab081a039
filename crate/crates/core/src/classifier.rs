//! Recognition of the configuration classes the protocol branches on:
//! regular n-gons, biangular circles, concentric configurations with their
//! sector structure, and quasi n-gons.
//!
//! Every predicate runs on a polar decomposition of the configuration about
//! some center. When the configuration carries an exact layout and the center
//! is the layout center, angles and radii are rationals and all comparisons
//! are exact; otherwise they are floats compared under the configuration's
//! tolerance.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::config::Configuration;
use crate::geometry::{
    circumcenter, rat_to_f64, Circle, ExactAngle, Magnitude, Point, Polar, Rational, Tolerance,
};

/// Smallest cohort for which quasi n-gons are defined.
pub const MIN_QUASI_N: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("quasi n-gons need at least {MIN_QUASI_N} robots, got {0}")]
    TooFewRobots(usize),
}

/// Radius and angle of every robot about one center.
#[derive(Debug, Clone)]
struct PolarView {
    center: Point,
    exact: bool,
    radii: Vec<Magnitude>,
    angles: Vec<ExactAngle>,
}

/// `None` when some robot sits on the center.
fn polar_about(config: &Configuration, center: Point) -> Option<PolarView> {
    let tol = config.tolerance();
    if let Some(layout) = config.exact() {
        if tol.same_point(layout.center, center) {
            return Some(PolarView {
                center: layout.center,
                exact: true,
                radii: layout.polar.iter().map(|p| Magnitude::Exact(p.radius.clone())).collect(),
                angles: layout.polar.iter().map(Polar::angle).collect(),
            });
        }
    }
    let mut radii = Vec::with_capacity(config.len());
    let mut angles = Vec::with_capacity(config.len());
    for &p in config.positions() {
        if tol.same_point(p, center) {
            return None;
        }
        let v = p - center;
        radii.push(Magnitude::Real(v.norm()));
        angles.push(ExactAngle::radians(v.y.atan2(v.x)));
    }
    Some(PolarView {
        center,
        exact: false,
        radii,
        angles,
    })
}

/// Counterclockwise angle from `a` to `b`.
fn ccw_gap(a: &ExactAngle, b: &ExactAngle) -> ExactAngle {
    b - a
}

/// Robots sitting on one common circle, in counterclockwise order.
#[derive(Debug, Clone)]
pub struct Ring {
    pub circle: Circle,
    /// Exact radius when the ring came from an exact layout.
    pub radius: Magnitude,
    pub exact: bool,
    angles: Vec<ExactAngle>,
    ccw: Vec<usize>,
    /// `gaps[i]` is the counterclockwise angle from `ccw[i]` to `ccw[i + 1]`.
    gaps: Vec<ExactAngle>,
    rank: Vec<usize>,
}

impl Ring {
    fn from_view(view: PolarView, radius: Magnitude) -> Option<Ring> {
        let n = view.angles.len();
        let mut ccw: Vec<usize> = (0..n).collect();
        ccw.sort_by(|&a, &b| view.angles[a].cmp_value(&view.angles[b]).then(a.cmp(&b)));
        let gaps = (0..n)
            .map(|i| ccw_gap(&view.angles[ccw[i]], &view.angles[ccw[(i + 1) % n]]))
            .collect();
        let mut rank = vec![0; n];
        for (i, &r) in ccw.iter().enumerate() {
            rank[r] = i;
        }
        let circle = Circle::new(view.center, radius.to_f64()).ok()?;
        Some(Ring {
            circle,
            radius,
            exact: view.exact,
            angles: view.angles,
            ccw,
            gaps,
            rank,
        })
    }

    pub fn len(&self) -> usize {
        self.ccw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ccw.is_empty()
    }

    pub fn angle(&self, robot: usize) -> &ExactAngle {
        &self.angles[robot]
    }

    /// Robot indices in counterclockwise order of angle.
    pub fn ccw_order(&self) -> &[usize] {
        &self.ccw
    }

    pub fn gaps(&self) -> &[ExactAngle] {
        &self.gaps
    }

    /// Counterclockwise neighbour of `robot` and the central angle to it.
    pub fn ccw_neighbor(&self, robot: usize) -> (usize, &ExactAngle) {
        let i = self.rank[robot];
        (self.ccw[(i + 1) % self.len()], &self.gaps[i])
    }

    /// Clockwise neighbour of `robot` and the central angle to it.
    pub fn cw_neighbor(&self, robot: usize) -> (usize, &ExactAngle) {
        let n = self.len();
        let i = self.rank[robot];
        let j = (i + n - 1) % n;
        (self.ccw[j], &self.gaps[j])
    }
}

/// The circle through all robots as a [`Ring`], if there is one.
///
/// Two robots always lie on the circle having them as a diameter; that is
/// the ring returned for `n = 2`, with both gaps exactly half a turn.
pub fn ring_of(config: &Configuration) -> Option<Ring> {
    let tol = config.tolerance();
    let n = config.len();
    if n == 2 {
        let (a, b) = (config.position(0), config.position(1));
        if tol.same_point(a, b) {
            return None;
        }
        let view = PolarView {
            center: a.midpoint(b),
            exact: true,
            radii: vec![],
            angles: vec![ExactAngle::zero(), ExactAngle::from_turns(1, 2)],
        };
        return Ring::from_view(view, Magnitude::Real(a.dist(b) / 2.0));
    }
    if let Some(layout) = config.exact() {
        let r0 = &layout.polar[0].radius;
        if layout.polar.iter().all(|p| &p.radius == r0) {
            let view = polar_about(config, layout.center)?;
            return Ring::from_view(view, Magnitude::Exact(r0.clone()));
        }
    }
    let center = real_circle_center(config)?;
    let view = polar_about(config, center)?;
    let r = view.radii[0].to_f64();
    if view.radii.iter().all(|d| tol.eq(d.to_f64(), r)) {
        Ring::from_view(view, Magnitude::Real(r))
    } else {
        None
    }
}

fn real_circle_center(config: &Configuration) -> Option<Point> {
    let tol = config.tolerance();
    let mut distinct: Vec<Point> = Vec::with_capacity(3);
    for &p in config.positions() {
        if distinct.iter().all(|&q| !tol.same_point(p, q)) {
            distinct.push(p);
            if distinct.len() == 3 {
                break;
            }
        }
    }
    if distinct.len() < 3 {
        return None;
    }
    circumcenter(distinct[0], distinct[1], distinct[2], tol).ok()
}

/// The circle through all robots. Absent for `n <= 2`, where such a circle
/// is never unique.
pub fn common_circle(config: &Configuration) -> Option<Circle> {
    if config.len() <= 2 {
        return None;
    }
    ring_of(config).map(|r| r.circle)
}

fn all_gaps_equal(ring: &Ring, target: &ExactAngle, tol: Tolerance) -> bool {
    ring.gaps.iter().all(|g| g.approx_eq(target, tol))
}

/// `(circle, 2π/n)` when the robots form a regular n-gon.
pub fn is_regular_ngon(config: &Configuration) -> Option<(Circle, ExactAngle)> {
    let ring = ring_of(config)?;
    regular_from_ring(&ring, config.tolerance())
}

/// [`is_regular_ngon`] on an already computed ring.
pub fn regular_from_ring(ring: &Ring, tol: Tolerance) -> Option<(Circle, ExactAngle)> {
    let delta = ExactAngle::characteristic(ring.len());
    all_gaps_equal(ring, &delta, tol).then_some((ring.circle, delta))
}

/// A biangular circle: central angles between consecutive robots alternate
/// between `alpha` and `beta`, with `alpha <= beta`.
#[derive(Debug, Clone)]
pub struct BiangularDescriptor {
    pub circle: Circle,
    pub alpha: ExactAngle,
    pub beta: ExactAngle,
    /// Robot indices in clockwise order.
    pub alternation: Vec<usize>,
    pub strict: bool,
    pub exact: bool,
}

impl BiangularDescriptor {
    /// The two interleaved halves of the alternation; each is a regular
    /// `n/2`-gon when the circle is strict.
    pub fn groups(&self) -> (Vec<usize>, Vec<usize>) {
        let g1 = self.alternation.iter().step_by(2).copied().collect();
        let g2 = self.alternation.iter().skip(1).step_by(2).copied().collect();
        (g1, g2)
    }
}

pub fn biangular(config: &Configuration) -> Option<BiangularDescriptor> {
    let ring = ring_of(config)?;
    biangular_from_ring(&ring, config.tolerance())
}

/// [`biangular`] on an already computed ring.
pub fn biangular_from_ring(ring: &Ring, tol: Tolerance) -> Option<BiangularDescriptor> {
    let n = ring.len();
    let g = &ring.gaps;
    if g.iter().any(|x| x.is_zero(tol)) {
        return None;
    }
    if (0..n).any(|i| !g[i].approx_eq(&g[(i + 2) % n], tol)) {
        return None;
    }
    let (alpha, beta) = if n == 1 {
        (g[0].clone(), g[0].clone())
    } else if g[0].cmp_value(&g[1]) == Ordering::Greater {
        (g[1].clone(), g[0].clone())
    } else {
        (g[0].clone(), g[1].clone())
    };
    let sum = &alpha + &beta;
    if !sum.approx_eq(&ExactAngle::from_turns(2, n as i64), tol) {
        return None;
    }
    let strict = !alpha.approx_eq(&beta, tol);
    let mut alternation = Vec::with_capacity(n);
    alternation.push(ring.ccw[0]);
    alternation.extend(ring.ccw[1..].iter().rev());
    Some(BiangularDescriptor {
        circle: ring.circle,
        alpha,
        beta,
        alternation,
        strict,
        exact: ring.exact,
    })
}

/// Two concentric circles carrying every robot.
#[derive(Debug, Clone)]
pub struct ConcentricPair {
    /// `C1`, the larger circle.
    pub outer: Circle,
    /// `C2`, the smaller circle.
    pub inner: Circle,
    /// Robots on `C1`, ascending index.
    pub on_outer: Vec<usize>,
    /// Robots on `C2`, ascending index.
    pub on_inner: Vec<usize>,
    /// Radii as exact rationals, when the pair was recognised on an exact
    /// layout.
    pub exact_radii: Option<(Rational, Rational)>,
}

impl ConcentricPair {
    pub fn center(&self) -> Point {
        self.outer.center
    }

    pub fn is_exact(&self) -> bool {
        self.exact_radii.is_some()
    }

    fn same_as(&self, other: &ConcentricPair, tol: Tolerance) -> bool {
        self.outer.same_as(&other.outer, tol) && self.inner.same_as(&other.inner, tol)
    }
}

fn pair_about(config: &Configuration, center: Point) -> Option<ConcentricPair> {
    let tol = config.tolerance();
    let view = polar_about(config, center)?;
    let mut lo = &view.radii[0];
    let mut hi = &view.radii[0];
    for r in &view.radii {
        if r.cmp_value(lo) == Ordering::Less {
            lo = r;
        }
        if r.cmp_value(hi) == Ordering::Greater {
            hi = r;
        }
    }
    if lo.approx_eq(hi, tol) {
        return None;
    }
    let mut on_outer = vec![];
    let mut on_inner = vec![];
    let (mut sum_o, mut sum_i) = (0.0, 0.0);
    for (i, r) in view.radii.iter().enumerate() {
        if r.approx_eq(hi, tol) {
            on_outer.push(i);
            sum_o += r.to_f64();
        } else if r.approx_eq(lo, tol) {
            on_inner.push(i);
            sum_i += r.to_f64();
        } else {
            return None;
        }
    }
    let exact_radii = match (hi, lo) {
        (Magnitude::Exact(h), Magnitude::Exact(l)) => Some((h.clone(), l.clone())),
        _ => None,
    };
    let (ro, ri) = match &exact_radii {
        Some((h, l)) => (rat_to_f64(h), rat_to_f64(l)),
        None => (sum_o / on_outer.len() as f64, sum_i / on_inner.len() as f64),
    };
    Some(ConcentricPair {
        outer: Circle::new(view.center, ro).ok()?,
        inner: Circle::new(view.center, ri).ok()?,
        on_outer,
        on_inner,
        exact_radii,
    })
}

/// Candidate centers for concentric pairs.
///
/// Among any five robots, three share a circle of any valid pair, so the
/// circumcenters of the ten triples drawn from five distinct robots contain
/// every pair's center. Smaller cohorts fall back to all triples plus, for
/// four robots, the intersections of perpendicular bisectors of the three
/// 2+2 splits.
fn candidate_centers(config: &Configuration) -> Vec<Point> {
    let tol = config.tolerance();
    let mut out: Vec<Point> = vec![];
    if let Some(l) = config.exact() {
        out.push(l.center);
    }
    let mut reps: Vec<Point> = vec![];
    for &p in config.positions() {
        if reps.iter().all(|&q| !tol.same_point(p, q)) {
            reps.push(p);
        }
    }
    let pool = if reps.len() >= 5 { &reps[..5] } else { &reps[..] };
    let push = |c: Point, out: &mut Vec<Point>| {
        if out.iter().all(|&q| !tol.same_point(q, c)) {
            out.push(c);
        }
    };
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            for k in j + 1..pool.len() {
                if let Ok(c) = circumcenter(pool[i], pool[j], pool[k], tol) {
                    push(c, &mut out);
                }
            }
        }
    }
    if pool.len() == 4 {
        for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
            if let Some(x) = bisector_intersection(pool[a], pool[b], pool[c], pool[d], tol) {
                push(x, &mut out);
            }
        }
    }
    out
}

/// Intersection of the perpendicular bisectors of `[a, b]` and `[c, d]`.
fn bisector_intersection(a: Point, b: Point, c: Point, d: Point, tol: Tolerance) -> Option<Point> {
    // |x - a|^2 = |x - b|^2  <=>  2 (b - a) . x = |b|^2 - |a|^2
    let u = b - a;
    let v = d - c;
    let det = u.cross(v);
    let scale = u.norm().max(v.norm());
    if det.abs() <= tol.eps * scale * scale {
        return None;
    }
    let e = (b.dot(b) - a.dot(a)) / 2.0;
    let f = (d.dot(d) - c.dot(c)) / 2.0;
    Point::try_new((e * v.y - f * u.y) / det, (u.x * f - v.x * e) / det).ok()
}

/// Every pair of concentric circles on which all robots lie, both circles
/// non-empty. Sorted by center, then outer radius.
pub fn find_concentric_pairs(config: &Configuration) -> Vec<ConcentricPair> {
    let tol = config.tolerance();
    let mut pairs: Vec<ConcentricPair> = vec![];
    for c in candidate_centers(config) {
        if let Some(p) = pair_about(config, c) {
            if pairs.iter().all(|q| !q.same_as(&p, tol)) {
                pairs.push(p);
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.center()
            .total_cmp(&b.center())
            .then(a.outer.radius.total_cmp(&b.outer.radius))
    });
    pairs
}

/// One sector of a concentric configuration, bounded by the radii through
/// two clockwise-consecutive robots of `C1`.
#[derive(Debug, Clone)]
pub struct Sector {
    /// Intersection of the first boundary radius with `C2`.
    pub boundary_b1: Point,
    /// Intersection of the second (clockwise) boundary radius with `C2`.
    pub boundary_b2: Point,
    /// Robots on `C2` strictly inside, clockwise from `B1`.
    pub inner_robots: Vec<usize>,
    /// Regular n-gon vertices missing on `C1` between the two boundaries.
    pub missing_count: usize,
    /// `C1` robots on the two boundary radii.
    pub outer_b1: usize,
    pub outer_b2: usize,
    pub center: Point,
    /// Radius of `C2`.
    pub inner_radius: Magnitude,
    /// Angle of the `B1` radius.
    pub b1_angle: ExactAngle,
    /// Angular width in turns; a whole turn when `B1 = B2`.
    pub span: Magnitude,
    /// Clockwise offsets from `B1` of `inner_robots`, same order.
    pub inner_offsets: Vec<ExactAngle>,
}

impl Sector {
    /// Point on `C2` at clockwise offset `offset` from `B1`, with exact
    /// polar coordinates when the sector is exact.
    pub fn point_at(&self, offset: &ExactAngle) -> (Point, Option<Polar>) {
        let angle = &self.b1_angle - offset;
        match (&self.inner_radius, &angle) {
            (Magnitude::Exact(r), ExactAngle::Turns(t)) => {
                let p = Polar::new(r.clone(), t.clone());
                (p.to_point(self.center), Some(p))
            }
            _ => (
                Point::polar(self.center, self.inner_radius.to_f64(), angle.to_radians()),
                None,
            ),
        }
    }

    /// Span as an angle; `None` for the full-turn sector.
    fn span_fraction(&self) -> Option<ExactAngle> {
        match &self.span {
            Magnitude::Exact(s) if s.is_one() => None,
            Magnitude::Exact(s) => Some(ExactAngle::Turns(s.clone())),
            Magnitude::Real(s) if *s >= 1.0 => None,
            Magnitude::Real(s) => Some(ExactAngle::radians(s * std::f64::consts::TAU)),
        }
    }

    /// Number of `2π/n` steps across the sector, if the span is a lattice
    /// multiple.
    pub fn lattice_steps(&self, n: usize, tol: Tolerance) -> Option<usize> {
        match self.span_fraction() {
            None => Some(n),
            Some(a) => a.lattice_index(n, tol).filter(|&m| m > 0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SectorDecomposition {
    pub pair: ConcentricPair,
    /// Projection of every robot on `C1`, by robot index.
    pub projections: Vec<Point>,
    /// Clockwise order.
    pub sectors: Vec<Sector>,
}

impl SectorDecomposition {
    pub fn sector_of(&self, robot: usize) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.inner_robots.contains(&robot))
    }
}

/// Splits the disk of `C1` into sectors. Absent when two robots project to
/// the same point of `C1`.
pub fn sector_decomposition(
    pair: &ConcentricPair,
    config: &Configuration,
) -> Option<SectorDecomposition> {
    let tol = config.tolerance();
    let n = config.len();
    let view = polar_about(config, pair.center())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| view.angles[a].cmp_value(&view.angles[b]));
    for i in 0..n {
        let g = ccw_gap(&view.angles[order[i]], &view.angles[order[(i + 1) % n]]);
        if g.is_zero(tol) {
            return None;
        }
    }
    let outer_ccw: Vec<usize> = order
        .iter()
        .copied()
        .filter(|r| pair.on_outer.binary_search(r).is_ok())
        .collect();
    let k = outer_ccw.len();
    let mut clockwise = Vec::with_capacity(k);
    clockwise.push(outer_ccw[0]);
    clockwise.extend(outer_ccw[1..].iter().rev());

    let inner_radius = match &pair.exact_radii {
        Some((_, r2)) => Magnitude::Exact(r2.clone()),
        None => Magnitude::Real(pair.inner.radius),
    };
    let on_c2 = |angle: &ExactAngle| match (&inner_radius, angle) {
        (Magnitude::Exact(r), ExactAngle::Turns(t)) => Polar::new(r.clone(), t.clone()).to_point(view.center),
        _ => Point::polar(view.center, pair.inner.radius, angle.to_radians()),
    };
    let full_turn = if view.exact {
        Magnitude::Exact(Rational::ONE)
    } else {
        Magnitude::Real(1.0)
    };

    let mut sectors: Vec<Sector> = clockwise
        .iter()
        .enumerate()
        .map(|(i, &b1)| {
            let b2 = clockwise[(i + 1) % k];
            let span = if k == 1 {
                full_turn.clone()
            } else {
                match ccw_gap(&view.angles[b2], &view.angles[b1]) {
                    ExactAngle::Turns(t) => Magnitude::Exact(t),
                    a => Magnitude::Real(a.to_turns_f64()),
                }
            };
            let missing = (span.to_f64() * n as f64).round() as usize;
            Sector {
                boundary_b1: on_c2(&view.angles[b1]),
                boundary_b2: on_c2(&view.angles[b2]),
                inner_robots: vec![],
                missing_count: missing.saturating_sub(1),
                outer_b1: b1,
                outer_b2: b2,
                center: view.center,
                inner_radius: inner_radius.clone(),
                b1_angle: view.angles[b1].clone(),
                span,
                inner_offsets: vec![],
            }
        })
        .collect();

    for &r in &pair.on_inner {
        let mut placed = false;
        for s in sectors.iter_mut() {
            let offset = ccw_gap(&view.angles[r], &s.b1_angle);
            let inside = match (&offset, &s.span) {
                (ExactAngle::Turns(o), Magnitude::Exact(w)) => o < w,
                (o, w) => o.to_turns_f64() < w.to_f64(),
            };
            if inside {
                s.inner_robots.push(r);
                s.inner_offsets.push(offset);
                placed = true;
                break;
            }
        }
        debug_assert!(placed, "every inner robot falls in some sector");
    }
    for s in sectors.iter_mut() {
        let mut idx: Vec<usize> = (0..s.inner_robots.len()).collect();
        idx.sort_by(|&a, &b| s.inner_offsets[a].cmp_value(&s.inner_offsets[b]));
        s.inner_robots = idx.iter().map(|&i| s.inner_robots[i]).collect();
        s.inner_offsets = idx.iter().map(|&i| s.inner_offsets[i].clone()).collect();
    }

    let projections = (0..n)
        .map(|r| match (&pair.exact_radii, &view.angles[r]) {
            (Some((r1, _)), ExactAngle::Turns(t)) => {
                Polar::new(r1.clone(), t.clone()).to_point(view.center)
            }
            (_, a) => Point::polar(view.center, pair.outer.radius, a.to_radians()),
        })
        .collect();

    Some(SectorDecomposition {
        pair: pair.clone(),
        projections,
        sectors,
    })
}

#[derive(Debug, Clone)]
pub struct QuasiDescriptor {
    pub pair: ConcentricPair,
    pub sectors: SectorDecomposition,
    /// Robots on `C1`.
    pub k: usize,
    pub n: usize,
    /// The projections form a regular n-gon.
    pub aligned: bool,
}

/// Recognises a quasi n-gon (aligned or arbitrary).
pub fn is_quasi_ngon(config: &Configuration) -> Result<Option<QuasiDescriptor>, ClassifyError> {
    let n = config.len();
    if n < MIN_QUASI_N {
        return Err(ClassifyError::TooFewRobots(n));
    }
    Ok(quasi_unchecked(config))
}

fn quasi_unchecked(config: &Configuration) -> Option<QuasiDescriptor> {
    let tol = config.tolerance();
    let n = config.len();
    let pairs = find_concentric_pairs(config);
    let [pair] = pairs.as_slice() else {
        return None;
    };
    let dec = sector_decomposition(pair, config)?;
    for s in &dec.sectors {
        let steps = s.lattice_steps(n, tol)?;
        if s.missing_count + 1 != steps || s.inner_robots.len() != s.missing_count {
            return None;
        }
    }
    let aligned = dec
        .sectors
        .iter()
        .flat_map(|s| s.inner_offsets.iter())
        .all(|o| o.lattice_index(n, tol).is_some());
    Some(QuasiDescriptor {
        pair: pair.clone(),
        k: pair.on_outer.len(),
        n,
        aligned,
        sectors: dec,
    })
}

/// Verdict of [`classify`].
#[derive(Debug, Clone)]
pub enum ConfigClass {
    RegularNGon { circle: Circle, delta: ExactAngle },
    StrictBiangular(BiangularDescriptor),
    QuasiAligned(QuasiDescriptor),
    QuasiArbitrary(QuasiDescriptor),
    Arbitrary,
}

/// Payload-free tag of a [`ConfigClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ClassLabel {
    RegularNGon,
    StrictBiangular,
    QuasiAligned,
    QuasiArbitrary,
    Arbitrary,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::RegularNGon => "RegularNGon",
            ClassLabel::StrictBiangular => "StrictBiangular",
            ClassLabel::QuasiAligned => "QuasiAligned",
            ClassLabel::QuasiArbitrary => "QuasiArbitrary",
            ClassLabel::Arbitrary => "Arbitrary",
        }
    }

    pub fn is_quasi(self) -> bool {
        matches!(self, ClassLabel::QuasiAligned | ClassLabel::QuasiArbitrary)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl ConfigClass {
    pub fn label(&self) -> ClassLabel {
        match self {
            ConfigClass::RegularNGon { .. } => ClassLabel::RegularNGon,
            ConfigClass::StrictBiangular(_) => ClassLabel::StrictBiangular,
            ConfigClass::QuasiAligned(_) => ClassLabel::QuasiAligned,
            ConfigClass::QuasiArbitrary(_) => ClassLabel::QuasiArbitrary,
            ConfigClass::Arbitrary => ClassLabel::Arbitrary,
        }
    }
}

/// Classifies a configuration. A regular n-gon wins over everything (it is
/// also a non-strict biangular circle); quasi n-gons are tested before
/// strict biangular circles, mirroring the dispatcher's branch order.
pub fn classify(config: &Configuration) -> ConfigClass {
    let tol = config.tolerance();
    let ring = ring_of(config);
    if let Some(ring) = &ring {
        if let Some((circle, delta)) = regular_from_ring(ring, tol) {
            return ConfigClass::RegularNGon { circle, delta };
        }
    }
    if config.len() >= MIN_QUASI_N && ring.is_none() {
        if let Some(q) = quasi_unchecked(config) {
            return if q.aligned {
                ConfigClass::QuasiAligned(q)
            } else {
                ConfigClass::QuasiArbitrary(q)
            };
        }
    }
    if let Some(ring) = &ring {
        if let Some(b) = biangular_from_ring(ring, tol) {
            if b.strict {
                return ConfigClass::StrictBiangular(b);
            }
        }
    }
    ConfigClass::Arbitrary
}

/// Number of robots in a sector that do not sit on a lattice offset.
pub fn off_lattice_count(sector: &Sector, n: usize, tol: Tolerance) -> usize {
    sector
        .inner_offsets
        .iter()
        .filter(|o| o.lattice_index(n, tol).is_none())
        .count()
}
