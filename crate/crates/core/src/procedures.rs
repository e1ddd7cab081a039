//! Robot decision rules. Each rule maps one robot's view, expressed in its
//! own local frame, to a target point in that same frame.

use std::cmp::Ordering;

use thiserror::Error;

use crate::classifier::{
    classify, ring_of, ConcentricPair, ConfigClass, QuasiDescriptor, Sector,
};
use crate::config::Configuration;
use crate::geometry::{rat, ExactAngle, Magnitude, Point, Polar, Rational, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcedureError {
    #[error("configuration is not an aligned quasi n-gon")]
    NotAlignedQuasi,
    #[error("configuration is not an arbitrary quasi n-gon")]
    NotArbitraryQuasi,
    #[error("configuration is not a strict biangular circle")]
    NotStrictBiangular,
    #[error("n = {0} is not handled: the protocol excludes 4, 6 and 8 robots")]
    UnsupportedN(usize),
    #[error("robot has {0} neighbours at the smaller biangular angle, expected exactly one")]
    AmbiguousNeighbor(usize),
    #[error("{0}")]
    Rule(String),
}

/// Mirror image or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Handedness {
    Direct,
    Mirrored,
}

impl Handedness {
    pub fn sign(self) -> i64 {
        match self {
            Handedness::Direct => 1,
            Handedness::Mirrored => -1,
        }
    }
}

/// A robot's private coordinate system, as a similarity transform of the
/// global frame: `local = scale · R(rotation) · H · (global - origin)`,
/// where `H` flips the y axis for [`Handedness::Mirrored`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    pub origin: Point,
    pub rotation: ExactAngle,
    /// Unit of length, kept rational so exact layouts survive the transform.
    pub scale: Rational,
    pub handedness: Handedness,
}

impl LocalFrame {
    pub fn identity() -> Self {
        LocalFrame {
            origin: Point::ORIGIN,
            rotation: ExactAngle::zero(),
            scale: Rational::ONE,
            handedness: Handedness::Direct,
        }
    }

    fn scale_f64(&self) -> f64 {
        crate::geometry::rat_to_f64(&self.scale)
    }

    pub fn to_local(&self, p: Point) -> Point {
        let mut v = p - self.origin;
        if self.handedness == Handedness::Mirrored {
            v.y = -v.y;
        }
        let (s, c) = self.rotation.to_radians().sin_cos();
        let k = self.scale_f64();
        Point::new(k * (c * v.x - s * v.y), k * (s * v.x + c * v.y))
    }

    pub fn to_global(&self, q: Point) -> Point {
        let k = self.scale_f64();
        let (s, c) = self.rotation.to_radians().sin_cos();
        let (x, y) = (q.x / k, q.y / k);
        let mut v = Point::new(c * x + s * y, -s * x + c * y);
        if self.handedness == Handedness::Mirrored {
            v.y = -v.y;
        }
        v + self.origin
    }

    /// Exact image of polar coordinates (about a center that is mapped with
    /// [`LocalFrame::to_local`]); `None` when the rotation is not rational.
    pub fn polar_to_local(&self, p: &Polar) -> Option<Polar> {
        let rho = self.rotation.as_turns()?;
        let h = rat(self.handedness.sign(), 1);
        Some(Polar::new(&p.radius * &self.scale, h * &p.turns + rho))
    }

    pub fn polar_to_global(&self, p: &Polar) -> Option<Polar> {
        let rho = self.rotation.as_turns()?;
        let h = rat(self.handedness.sign(), 1);
        Some(Polar::new(&p.radius / &self.scale, h * (&p.turns - rho)))
    }
}

/// What an active robot observes: every robot position in its local frame,
/// and which of them is its own.
///
/// The snapshot is sorted by local coordinates, so robot identities and the
/// simulator's indexing do not leak into it.
#[derive(Debug, Clone)]
pub struct View {
    me: usize,
    snapshot: Configuration,
}

impl View {
    pub(crate) fn new(me: usize, snapshot: Configuration) -> Self {
        View { me, snapshot }
    }

    /// Index of the observing robot inside [`View::snapshot`].
    pub fn me(&self) -> usize {
        self.me
    }

    pub fn my_position(&self) -> Point {
        self.snapshot.position(self.me)
    }

    pub fn others(&self) -> impl Iterator<Item = Point> + '_ {
        let me = self.me;
        self.snapshot
            .positions()
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != me)
            .map(|(_, p)| *p)
    }

    /// All positions (own included) in the local frame.
    pub fn snapshot(&self) -> &Configuration {
        &self.snapshot
    }

    pub fn n(&self) -> usize {
        self.snapshot.len()
    }

    pub fn tolerance(&self) -> Tolerance {
        self.snapshot.tolerance()
    }

    fn my_polar(&self) -> Option<&Polar> {
        self.snapshot.polar(self.me)
    }
}

/// Target of one activation, in the robot's local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveDecision {
    pub target: Point,
    /// Exact polar coordinates of the target about the view's layout
    /// center, when the rule could compute them.
    pub exact: Option<Polar>,
}

impl MoveDecision {
    /// Staying put.
    pub fn stay(view: &View) -> Self {
        MoveDecision {
            target: view.my_position(),
            exact: view.my_polar().cloned(),
        }
    }

    pub fn to(target: Point) -> Self {
        MoveDecision {
            target,
            exact: None,
        }
    }

    fn on(center: Point, polar: Polar) -> Self {
        MoveDecision {
            target: polar.to_point(center),
            exact: Some(polar),
        }
    }

    pub fn is_stay(&self, view: &View) -> bool {
        match (&self.exact, view.my_polar()) {
            (Some(a), Some(b)) => a == b,
            _ => view.tolerance().same_point(self.target, view.my_position()),
        }
    }
}

/// A deterministic decision rule. Implemented for plain functions and
/// closures taking a [`View`].
pub trait Rule: Send + Sync {
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError>;

    fn name(&self) -> &str {
        "custom"
    }
}

impl<F> Rule for F
where
    F: Fn(&View) -> Result<MoveDecision, ProcedureError> + Send + Sync,
{
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
        self(view)
    }
}

fn layout_center(view: &View) -> Option<Point> {
    view.snapshot.exact().map(|l| l.center)
}

// ---------------------------------------------------------------------------
// aQN

/// Robots on `C2` move to their projection on `C1`; robots on `C1` stay.
pub fn aqn_step(view: &View) -> Result<MoveDecision, ProcedureError> {
    match classify(&view.snapshot) {
        ConfigClass::QuasiAligned(q) => Ok(aqn_with(view, &q)),
        _ => Err(ProcedureError::NotAlignedQuasi),
    }
}

fn aqn_with(view: &View, q: &QuasiDescriptor) -> MoveDecision {
    project_outward(view, &q.pair)
}

fn project_outward(view: &View, pair: &ConcentricPair) -> MoveDecision {
    let me = view.me;
    if pair.on_outer.binary_search(&me).is_ok() {
        return MoveDecision::stay(view);
    }
    if let (Some((r1, _)), Some(mine), Some(c)) = (&pair.exact_radii, view.my_polar(), layout_center(view)) {
        return MoveDecision::on(c, mine.with_radius(r1.clone()));
    }
    let c = pair.center();
    let v = view.my_position() - c;
    MoveDecision::to(c + v.scale(pair.outer.radius / v.norm()))
}

// ---------------------------------------------------------------------------
// QaQ

/// A target slot on `C2` inside a sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalPosition {
    pub point: Point,
    /// Clockwise offset from `B1`: a positive multiple of `2π/n`.
    pub offset: ExactAngle,
    pub exact: Option<Polar>,
}

/// The `missing_count` points of `C2` strictly inside `sector` at offsets
/// `k · 2π/n` from `B1`, `k = 1..=missing_count`.
pub fn find_final_pos(sector: &Sector, n: usize) -> Vec<FinalPosition> {
    (1..=sector.missing_count)
        .map(|k| {
            let offset = ExactAngle::from_turns(k as i64, n as i64);
            let (point, exact) = sector.point_at(&offset);
            FinalPosition {
                point,
                offset,
                exact,
            }
        })
        .collect()
}

fn on_some_final(offset: &ExactAngle, finals: &[FinalPosition], tol: Tolerance) -> bool {
    finals.iter().any(|f| f.offset.approx_eq(offset, tol))
}

/// Inner robots of `sector` not sitting on a final position, with their
/// offsets from `B1`, in clockwise order.
pub fn free_robots(sector: &Sector, finals: &[FinalPosition], tol: Tolerance) -> Vec<(usize, ExactAngle)> {
    sector
        .inner_robots
        .iter()
        .zip(&sector.inner_offsets)
        .filter(|(_, o)| !on_some_final(o, finals, tol))
        .map(|(&r, o)| (r, o.clone()))
        .collect()
}

/// Final positions not occupied by any robot of the sector.
pub fn free_positions(sector: &Sector, finals: &[FinalPosition], tol: Tolerance) -> Vec<FinalPosition> {
    finals
        .iter()
        .filter(|f| !sector.inner_offsets.iter().any(|o| o.approx_eq(&f.offset, tol)))
        .cloned()
        .collect()
}

/// The free robot closest to `B1` and the one closest to `B2` (by central
/// angle); one robot when they coincide, none when every robot of the sector
/// already sits on a final position.
pub fn elect_free_robots(sector: &Sector, finals: &[FinalPosition], tol: Tolerance) -> Vec<usize> {
    let free = free_robots(sector, finals, tol);
    let (Some(first), Some(last)) = (free.first(), free.last()) else {
        return vec![];
    };
    // `free` is sorted by offset from B1, so the ends are the two candidates.
    if first.0 == last.0 {
        vec![first.0]
    } else {
        vec![first.0, last.0]
    }
}

/// Assigns a free final position to each elected robot: with two elected
/// robots the one nearer `B1` takes the free position nearer `B1` and the
/// other takes the one nearer `B2`; a single elected robot takes the single
/// remaining free position.
pub fn associate(
    elected: &[usize],
    free_positions: &[FinalPosition],
    sector: &Sector,
) -> Vec<(usize, FinalPosition)> {
    if elected.is_empty() || free_positions.is_empty() {
        return vec![];
    }
    let offset_of = |r: usize| {
        sector
            .inner_robots
            .iter()
            .position(|&x| x == r)
            .map(|i| sector.inner_offsets[i].clone())
            .expect("elected robot belongs to the sector")
    };
    let mut by_offset: Vec<&FinalPosition> = free_positions.iter().collect();
    by_offset.sort_by(|a, b| a.offset.cmp_value(&b.offset));
    let nearest_b1 = by_offset[0].clone();
    let nearest_b2 = by_offset[by_offset.len() - 1].clone();
    match elected {
        [only] => {
            if by_offset.len() == 1 {
                return vec![(*only, nearest_b1)];
            }
            // Not reachable from a valid quasi n-gon (one free robot means one
            // free slot); take the slot closest in angle.
            let mine = offset_of(*only).to_turns_f64();
            let best = by_offset
                .iter()
                .min_by(|a, b| {
                    let da = (a.offset.to_turns_f64() - mine).abs();
                    let db = (b.offset.to_turns_f64() - mine).abs();
                    da.total_cmp(&db)
                })
                .expect("non-empty");
            vec![(*only, (*best).clone())]
        }
        [a, b, ..] => {
            let (near_b1, near_b2) = match offset_of(*a).cmp_value(&offset_of(*b)) {
                Ordering::Greater => (*b, *a),
                _ => (*a, *b),
            };
            vec![(near_b1, nearest_b1), (near_b2, nearest_b2)]
        }
        [] => unreachable!(),
    }
}

/// Procedure for arbitrary quasi n-gons: robots on `C2` move, two per sector
/// at most, onto the lattice slots of their sector.
pub fn qaq_step(view: &View) -> Result<MoveDecision, ProcedureError> {
    match classify(&view.snapshot) {
        ConfigClass::QuasiArbitrary(q) => Ok(qaq_with(view, &q)),
        _ => Err(ProcedureError::NotArbitraryQuasi),
    }
}

fn qaq_with(view: &View, q: &QuasiDescriptor) -> MoveDecision {
    let tol = view.tolerance();
    let me = view.me;
    let Some(sector) = q.sectors.sector_of(me) else {
        // on C1
        return MoveDecision::stay(view);
    };
    let finals = find_final_pos(sector, q.n);
    let elected = elect_free_robots(sector, &finals, tol);
    if !elected.contains(&me) {
        return MoveDecision::stay(view);
    }
    let free = free_positions(sector, &finals, tol);
    match associate(&elected, &free, sector).into_iter().find(|(r, _)| *r == me) {
        Some((_, f)) => match (f.exact, layout_center(view)) {
            (Some(p), Some(c)) => MoveDecision::on(c, p),
            _ => MoveDecision::to(f.point),
        },
        None => MoveDecision::stay(view),
    }
}

// ---------------------------------------------------------------------------
// BQ

/// Procedure for strict biangular circles: move to the concentric circle of
/// twice the radius, rotating away from the neighbour at the smaller angle
/// `α` by `π/n - α/2`.
pub fn bq_step(view: &View) -> Result<MoveDecision, ProcedureError> {
    match classify(&view.snapshot) {
        ConfigClass::StrictBiangular(_) => bq_unchecked(view),
        _ => Err(ProcedureError::NotStrictBiangular),
    }
}

fn bq_unchecked(view: &View) -> Result<MoveDecision, ProcedureError> {
    let tol = view.tolerance();
    let n = view.n();
    let ring = ring_of(&view.snapshot).ok_or(ProcedureError::NotStrictBiangular)?;
    let me = view.me;
    let (_, ccw_gap) = ring.ccw_neighbor(me);
    let (_, cw_gap) = ring.cw_neighbor(me);
    let alpha = match ccw_gap.cmp_value(cw_gap) {
        Ordering::Greater => cw_gap,
        _ => ccw_gap,
    };
    let ccw_is_alpha = ccw_gap.approx_eq(alpha, tol);
    let cw_is_alpha = cw_gap.approx_eq(alpha, tol);
    // rotating away from the α-neighbour
    let sense = match (ccw_is_alpha, cw_is_alpha) {
        (true, false) => -1,
        (false, true) => 1,
        (a, b) => return Err(ProcedureError::AmbiguousNeighbor(a as usize + b as usize)),
    };
    let shift = &ExactAngle::from_turns(1, 2 * n as i64) - &alpha.scale(&rat(1, 2));
    let my_angle = ring.angle(me);
    let new_angle = if sense > 0 { my_angle + &shift } else { my_angle - &shift };
    match (&ring.radius, &new_angle, layout_center(view)) {
        (Magnitude::Exact(r), ExactAngle::Turns(t), Some(c)) if ring.exact => {
            Ok(MoveDecision::on(c, Polar::new(r * rat(2, 1), t.clone())))
        }
        _ => Ok(MoveDecision::to(Point::polar(
            ring.circle.center,
            2.0 * ring.circle.radius,
            new_angle.to_radians(),
        ))),
    }
}

// ---------------------------------------------------------------------------
// Dispatcher

/// Cohort sizes the protocol does not handle.
pub fn is_excluded_n(n: usize) -> bool {
    matches!(n, 4 | 6 | 8)
}

/// Top-level protocol: odd cohorts and unrecognised configurations go to
/// `ab_rule`; regular n-gons are terminal; quasi n-gons run aQN or QaQ;
/// strict biangular circles run BQ.
pub fn ngon_dispatch(view: &View, ab_rule: &dyn Rule) -> Result<MoveDecision, ProcedureError> {
    let n = view.n();
    if is_excluded_n(n) {
        return Err(ProcedureError::UnsupportedN(n));
    }
    if n % 2 == 1 {
        return ab_rule.decide(view);
    }
    match classify(&view.snapshot) {
        ConfigClass::RegularNGon { .. } => Ok(MoveDecision::stay(view)),
        ConfigClass::QuasiAligned(q) => Ok(aqn_with(view, &q)),
        ConfigClass::QuasiArbitrary(q) => Ok(qaq_with(view, &q)),
        ConfigClass::StrictBiangular(_) => bq_unchecked(view),
        ConfigClass::Arbitrary => ab_rule.decide(view),
    }
}

/// Placeholder for the arbitrary-to-biangular procedure: always stays.
pub fn ab_stub(view: &View) -> Result<MoveDecision, ProcedureError> {
    Ok(MoveDecision::stay(view))
}

/// [`ab_stub`] as a [`Rule`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AbStub;

impl Rule for AbStub {
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
        ab_stub(view)
    }
    fn name(&self) -> &str {
        "ab-stub"
    }
}

/// [`ngon_dispatch`] as a [`Rule`], with a pluggable arbitrary-to-biangular
/// procedure.
pub struct Ngon {
    ab: Box<dyn Rule>,
}

impl Ngon {
    pub fn new(ab: Box<dyn Rule>) -> Self {
        Ngon { ab }
    }
}

impl Default for Ngon {
    fn default() -> Self {
        Ngon::new(Box::new(AbStub))
    }
}

impl Rule for Ngon {
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
        ngon_dispatch(view, self.ab.as_ref())
    }
    fn name(&self) -> &str {
        "ngon"
    }
}

macro_rules! named_rule {
    ($ty:ident, $f:path, $name:literal) => {
        #[derive(Debug, Clone, Copy, Default)]
        pub struct $ty;

        impl Rule for $ty {
            fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
                $f(view)
            }
            fn name(&self) -> &str {
                $name
            }
        }
    };
}

named_rule!(Aqn, aqn_step, "aqn");
named_rule!(Qaq, qaq_step, "qaq");
named_rule!(Bq, bq_step, "bq");

/// Names accepted by [`rule_by_name`].
pub const RULE_NAMES: [&str; 5] = ["ngon", "aqn", "qaq", "bq", "ab-stub"];

pub fn rule_by_name(name: &str) -> Option<Box<dyn Rule>> {
    match name {
        "ngon" => Some(Box::new(Ngon::default())),
        "aqn" => Some(Box::new(Aqn)),
        "qaq" => Some(Box::new(Qaq)),
        "bq" => Some(Box::new(Bq)),
        "ab-stub" => Some(Box::new(AbStub)),
        _ => None,
    }
}
