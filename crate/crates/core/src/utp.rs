//! The adversarial schedule against rules that keep every robot on its
//! circle: starting from a special biangular circle, the two interleaved
//! groups are activated so that a regular n-gon never appears.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    biangular_from_ring, classify, is_regular_ngon, regular_from_ring, ring_of, BiangularDescriptor,
    ClassLabel,
};
use crate::config::Configuration;
use crate::generate::{self, GenerateError};
use crate::geometry::{rat, Circle, ExactAngle, Magnitude, Point, Polar};
use crate::procedures::{Handedness, LocalFrame, MoveDecision, ProcedureError, Rule, View};
use crate::simulator::make_view;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtpError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("step {step}, robot {robot}: {source}")]
    Rule {
        step: u64,
        robot: usize,
        #[source]
        source: ProcedureError,
    },
    #[error("step {step}, robot {robot}: target {target} leaves the circle")]
    OffCircle { step: u64, robot: usize, target: Point },
    #[error("step {0}: configuration is not on a single circle")]
    NoCircle(u64),
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("regular n-gon formed at step {step}: the rule escaped the adversary")]
    CertificateViolated { step: u64, certificate: Box<Certificate> },
}

/// A strict biangular circle split into its two interleaved regular
/// `n/2`-gons, with one local frame per robot such that all robots of a group
/// see the same thing.
#[derive(Debug, Clone)]
pub struct SpecialBiangular {
    pub config: Configuration,
    pub circle: Circle,
    pub group_g1: Vec<usize>,
    pub group_g2: Vec<usize>,
    pub alpha: ExactAngle,
    pub beta: ExactAngle,
    pub frames: Vec<LocalFrame>,
}

/// Robots of `G1` get a direct frame centred on the circle and turned so
/// that they sit on the positive x axis; robots of `G2` get the mirror image,
/// which makes their views coincide with those of `G1`.
pub fn make_special_biangular(n: usize, alpha: &ExactAngle) -> Result<SpecialBiangular, UtpError> {
    let config = generate::strict_biangular(n, alpha)?;
    let ring = ring_of(&config).expect("generated on the unit circle");
    let mut frames = Vec::with_capacity(n);
    for r in 0..n {
        let theta = ring.angle(r);
        let (rotation, handedness) = if r % 2 == 0 {
            (theta.neg(), Handedness::Direct)
        } else {
            (theta.clone(), Handedness::Mirrored)
        };
        frames.push(LocalFrame {
            origin: ring.circle.center,
            rotation,
            scale: rat(1, 1),
            handedness,
        });
    }
    let beta = &ExactAngle::from_turns(2, n as i64) - alpha;
    Ok(SpecialBiangular {
        circle: ring.circle,
        group_g1: (0..n).step_by(2).collect(),
        group_g2: (1..n).step_by(2).collect(),
        alpha: alpha.clone(),
        beta,
        frames,
        config,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Group {
    G1,
    G2,
}

impl Group {
    pub fn other(self) -> Group {
        match self {
            Group::G1 => Group::G2,
            Group::G2 => Group::G1,
        }
    }
}

type Move = (usize, Point, Option<Polar>);

/// The adversary's choice for one step.
#[derive(Debug, Clone)]
pub struct Activation {
    pub lead: Group,
    /// Whether the other group was activated as well.
    pub both: bool,
    pub active: Vec<usize>,
    moves: Vec<Move>,
}

impl Activation {
    /// `config` with the chosen moves committed.
    pub fn apply(&self, config: &Configuration) -> Configuration {
        config.relocated(&self.moves)
    }
}

/// Running state of the adversary: the special biangular setup, the
/// current configuration and which group leads next.
#[derive(Debug, Clone)]
pub struct Adversary {
    pub special: SpecialBiangular,
    pub config: Configuration,
    pub next_lead: Group,
}

impl Adversary {
    pub fn new(special: SpecialBiangular) -> Self {
        Adversary {
            config: special.config.clone(),
            special,
            next_lead: Group::G1,
        }
    }

    fn members(&self, g: Group) -> &[usize] {
        match g {
            Group::G1 => &self.special.group_g1,
            Group::G2 => &self.special.group_g2,
        }
    }

    /// Global moves of every robot of `g`, checked against the circle.
    fn group_moves(&self, g: Group, rule: &dyn Rule) -> Result<Vec<Move>, UtpError> {
        let t = self.config.time_index;
        let members = self.members(g);
        let decide = |r: usize, view: &View| {
            rule.decide(view).map_err(|source| UtpError::Rule {
                step: t,
                robot: r,
                source,
            })
        };
        let mut out = Vec::with_capacity(members.len());
        if self.symmetric() {
            // every member sees exactly the same view
            let first = members[0];
            let d = decide(first, &make_view(&self.config, first, &self.special.frames[first]))?;
            for &r in members {
                out.push(self.commit_target(r, &d)?);
            }
            return Ok(out);
        }
        let mut memo: Option<(View, MoveDecision)> = None;
        for &r in members {
            let view = make_view(&self.config, r, &self.special.frames[r]);
            let d = match &memo {
                Some((v, d)) if same_view(v, &view) => d.clone(),
                _ => {
                    let d = decide(r, &view)?;
                    memo = Some((view, d.clone()));
                    d
                }
            };
            out.push(self.commit_target(r, &d)?);
        }
        Ok(out)
    }

    /// Maps a local decision of robot `r` to the global frame and enforces
    /// the on-circle contract.
    fn commit_target(&self, r: usize, d: &MoveDecision) -> Result<Move, UtpError> {
        let t = self.config.time_index;
        let frame = &self.special.frames[r];
        let tol = self.config.tolerance();
        if let (Some(l), Some(q)) = (self.config.exact(), &d.exact) {
            if let Some(g) = frame.polar_to_global(q) {
                // all robots share one exact radius (checked by `symmetric`
                // or by the ring below)
                let radius = &l.polar[0].radius;
                if l.polar.iter().all(|p| &p.radius == radius) {
                    let p = g.to_point(l.center);
                    if &g.radius != radius {
                        return Err(UtpError::OffCircle { step: t, robot: r, target: p });
                    }
                    return Ok((r, p, Some(g)));
                }
            }
        }
        let circle = ring_of(&self.config).ok_or(UtpError::NoCircle(t))?.circle;
        let p = frame.to_global(d.target);
        if !tol.eq(p.dist(circle.center), circle.radius) {
            return Err(UtpError::OffCircle { step: t, robot: r, target: p });
        }
        Ok((r, p, None))
    }

    /// Exact check that turning the configuration by `2/n` maps every
    /// member of each group onto the next member of that group, which (with
    /// the frames built by [`make_special_biangular`]) makes the views of a
    /// group identical.
    fn symmetric(&self) -> bool {
        let Some(l) = self.config.exact() else {
            return false;
        };
        let n = self.config.len();
        let step = ExactAngle::from_turns(2, n as i64);
        let radius = &l.polar[0].radius;
        if l.polar.iter().any(|p| &p.radius != radius) {
            return false;
        }
        [&self.special.group_g1, &self.special.group_g2].iter().all(|g| {
            (0..g.len()).all(|i| {
                let a = l.polar[g[i]].angle();
                let b = l.polar[g[(i + 1) % g.len()]].angle();
                &b - &a == step
            })
        })
    }
}

fn same_view(a: &View, b: &View) -> bool {
    a.me() == b.me()
        && match (a.snapshot().exact(), b.snapshot().exact()) {
            (Some(x), Some(y)) => x == y,
            (None, None) => a.snapshot().positions() == b.snapshot().positions(),
            _ => false,
        }
}

/// Chooses the activation set of the next step: the lead group always
/// moves; the other group moves too exactly when the lead's move alone
/// would complete a regular n-gon. The lead alternates between steps so
/// that the schedule stays fair.
pub fn adversary_step(state: &Adversary, rule: &dyn Rule) -> Result<Activation, UtpError> {
    let lead = state.next_lead;
    let mut moves = state.group_moves(lead, rule)?;
    let alone = state.config.relocated(&moves);
    let both = is_regular_ngon(&alone).is_some();
    if both {
        moves.extend(state.group_moves(lead.other(), rule)?);
    }
    let mut active: Vec<usize> = moves.iter().map(|m| m.0).collect();
    active.sort_unstable();
    Ok(Activation {
        lead,
        both,
        active,
        moves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub step: u64,
    pub lead: Group,
    pub both_groups: bool,
    pub class: ClassLabel,
    pub regular: bool,
    /// The configuration is still a biangular circle whose two halves are
    /// the original groups.
    pub groups_intact: bool,
    pub strict: bool,
    /// `α` after the step, formatted.
    pub alpha: Option<String>,
    /// Some active robot targeted another robot's current position.
    pub merge_hazard: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// No regular n-gon over the whole budget.
    Certified,
    /// The two groups landed on the same points; they can never be told
    /// apart again.
    GroupsMerged { step: u64 },
    /// The configuration stopped being a biangular circle made of the two
    /// groups.
    StructureLost { step: u64 },
    /// A regular n-gon appeared.
    Violated { step: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub rule: String,
    pub n: usize,
    pub alpha: ExactAngle,
    pub budget: u64,
    pub initial: Configuration,
    pub final_config: Configuration,
    pub steps: Vec<StepVerdict>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn merge_hazards(&self) -> usize {
        self.steps.iter().filter(|s| s.merge_hazard).count()
    }
}

fn intact_groups(b: BiangularDescriptor, g1: &[usize], g2: &[usize]) -> Option<(bool, ExactAngle)> {
    let (mut a, mut c) = b.groups();
    a.sort_unstable();
    c.sort_unstable();
    let intact = (a == g1 && c == g2) || (a == g2 && c == g1);
    intact.then_some((b.strict, b.alpha))
}

/// Runs the adversary for `budget` steps (or until the groups merge) and
/// records a verdict per step.
pub fn demonstrate(
    rule: &dyn Rule,
    n: usize,
    alpha: &ExactAngle,
    budget: u64,
) -> Result<Certificate, UtpError> {
    if budget == 0 {
        return Err(UtpError::ZeroBudget);
    }
    let special = make_special_biangular(n, alpha)?;
    let (g1, g2) = (special.group_g1.clone(), special.group_g2.clone());
    let initial = special.config.clone();
    let mut adv = Adversary::new(special);
    let mut steps = Vec::with_capacity(budget.min(1 << 16) as usize);
    let mut verdict = Verdict::Certified;
    for s in 1..=budget {
        let act = adversary_step(&adv, rule)?;
        let before = &adv.config;
        let merge_hazard = act.moves.iter().any(|(r, p, polar)| {
            (0..before.len()).any(|k| {
                k != *r
                    && match (polar, before.polar(k)) {
                        (Some(a), Some(b)) => a == b,
                        _ => before.tolerance().same_point(*p, before.position(k)),
                    }
            })
        });
        let next = before.relocated(&act.moves);
        let tol = next.tolerance();
        let ring = ring_of(&next);
        let regular = ring.as_ref().is_some_and(|r| regular_from_ring(r, tol).is_some());
        let desc = ring.as_ref().and_then(|r| biangular_from_ring(r, tol));
        // on a single circle the quasi branches of the classifier never apply
        let class = match (&ring, &desc) {
            _ if regular => ClassLabel::RegularNGon,
            (Some(_), Some(b)) if b.strict => ClassLabel::StrictBiangular,
            (Some(_), _) => ClassLabel::Arbitrary,
            (None, _) => classify(&next).label(),
        };
        let structure = desc.and_then(|b| intact_groups(b, &g1, &g2));
        let merged = next.first_coincidence().is_some();
        steps.push(StepVerdict {
            step: s,
            lead: act.lead,
            both_groups: act.both,
            class,
            regular,
            groups_intact: structure.is_some(),
            strict: structure.as_ref().is_some_and(|x| x.0),
            alpha: structure.as_ref().map(|x| x.1.to_string()),
            merge_hazard,
        });
        adv.config = next;
        adv.next_lead = act.lead.other();
        if regular {
            verdict = Verdict::Violated { step: s };
            break;
        }
        if merged {
            verdict = Verdict::GroupsMerged { step: s };
            break;
        }
        if structure.is_none() {
            verdict = Verdict::StructureLost { step: s };
            break;
        }
    }
    let cert = Certificate {
        rule: rule.name().to_string(),
        n,
        alpha: alpha.clone(),
        budget,
        initial,
        final_config: adv.config,
        steps,
        verdict,
    };
    match cert.verdict {
        Verdict::Violated { step } => Err(UtpError::CertificateViolated {
            step,
            certificate: Box::new(cert),
        }),
        _ => Ok(cert),
    }
}

// ---------------------------------------------------------------------------
// Reference rules

fn on_ring(view: &View) -> Result<crate::classifier::Ring, ProcedureError> {
    ring_of(view.snapshot()).ok_or_else(|| ProcedureError::Rule("robots are not on one circle".into()))
}

fn move_on_ring(view: &View, ring: &crate::classifier::Ring, angle: ExactAngle) -> MoveDecision {
    let center = view.snapshot().exact().map(|l| l.center);
    match (&ring.radius, &angle, center) {
        (Magnitude::Exact(r), ExactAngle::Turns(t), Some(c)) if ring.exact => {
            let p = Polar::new(r.clone(), t.clone());
            MoveDecision {
                target: p.to_point(c),
                exact: Some(p),
            }
        }
        _ => MoveDecision::to(Point::polar(
            ring.circle.center,
            ring.circle.radius,
            angle.to_radians(),
        )),
    }
}

/// Never moves.
#[derive(Debug, Clone, Copy, Default)]
pub struct StayPut;

impl Rule for StayPut {
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
        Ok(MoveDecision::stay(view))
    }
    fn name(&self) -> &str {
        "stay-put"
    }
}

/// Moves to the midpoint, along the circle, of its two neighbours.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeighborMidpoint;

impl Rule for NeighborMidpoint {
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
        let ring = on_ring(view)?;
        let me = view.me();
        let (_, ccw) = ring.ccw_neighbor(me);
        let (_, cw) = ring.cw_neighbor(me);
        let shift = &(ccw - cw) * &rat(1, 2);
        // (ccw - cw) is taken modulo a turn; undo the wrap for cw > ccw
        let shift = match ccw.cmp_value(cw) {
            Ordering::Less => &shift - &ExactAngle::from_turns(1, 2),
            _ => shift,
        };
        Ok(move_on_ring(view, &ring, ring.angle(me) + &shift))
    }
    fn name(&self) -> &str {
        "midpoint"
    }
}

/// The on-circle counterpart of BQ: rotate away from the neighbour at the
/// smaller angle by a quarter of the difference of the two angles, which is
/// `π/n - α/2` on a biangular circle. Stays when both angles are equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct OnCircleBq;

impl Rule for OnCircleBq {
    fn decide(&self, view: &View) -> Result<MoveDecision, ProcedureError> {
        let ring = on_ring(view)?;
        let me = view.me();
        let tol = view.tolerance();
        let (_, ccw) = ring.ccw_neighbor(me);
        let (_, cw) = ring.cw_neighbor(me);
        if ccw.approx_eq(cw, tol) {
            return Ok(MoveDecision::stay(view));
        }
        let (small, large, sense) = match ccw.cmp_value(cw) {
            Ordering::Less => (ccw, cw, -1),
            _ => (cw, ccw, 1),
        };
        let shift = &(large - small) * &rat(1, 4);
        let angle = if sense > 0 {
            ring.angle(me) + &shift
        } else {
            ring.angle(me) - &shift
        };
        Ok(move_on_ring(view, &ring, angle))
    }
    fn name(&self) -> &str {
        "bq-analogue"
    }
}

pub const RULE_NAMES: [&str; 3] = ["stay-put", "midpoint", "bq-analogue"];

pub fn rule_by_name(name: &str) -> Option<Box<dyn Rule>> {
    match name {
        "stay-put" => Some(Box::new(StayPut)),
        "midpoint" => Some(Box::new(NeighborMidpoint)),
        "bq-analogue" => Some(Box::new(OnCircleBq)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::biangular;

    fn pi10() -> ExactAngle {
        ExactAngle::pi_fraction(1, 10)
    }

    #[test]
    fn special_biangular_construction() {
        let s = make_special_biangular(10, &pi10()).unwrap();
        assert_eq!(s.group_g1.len(), 5);
        assert_eq!(s.group_g2.len(), 5);
        let b = biangular(&s.config).unwrap();
        assert!(b.strict);
        assert_eq!(&b.alpha + &b.beta, ExactAngle::from_turns(2, 10));
        for g in [&s.group_g1, &s.group_g2] {
            assert!(is_regular_ngon(&s.config.select(g)).is_some());
        }
        assert!(is_regular_ngon(&s.config).is_none());
        let views: Vec<View> = (0..10).map(|r| make_view(&s.config, r, &s.frames[r])).collect();
        for v in &views[1..] {
            assert!(same_view(&views[0], v));
        }

        assert!(matches!(
            make_special_biangular(10, &ExactAngle::pi_fraction(2, 10)),
            Err(UtpError::Generate(GenerateError::InvalidAlpha(_)))
        ));
        let s4 = make_special_biangular(4, &ExactAngle::pi_fraction(1, 4)).unwrap();
        let b = biangular(&s4.config).unwrap();
        assert_eq!(b.alpha, ExactAngle::degrees(45, 1));
        assert_eq!(b.beta, ExactAngle::degrees(135, 1));
        assert_eq!(&s4.alpha + &s4.beta, ExactAngle::from_turns(1, 2));
    }

    #[test]
    fn stay_put_activates_lead_only() {
        let adv = Adversary::new(make_special_biangular(10, &pi10()).unwrap());
        let a = adversary_step(&adv, &StayPut).unwrap();
        assert!(!a.both);
        assert_eq!(a.active, adv.special.group_g1);
        assert!(adv.config.relocated(&a.moves).same_positions(&adv.config));
    }

    #[test]
    fn midpoint_lead_alone_would_complete_ngon() {
        // G1 moving to the midpoints of its G2 neighbours makes every gap
        // equal, so the adversary activates both groups; the joint move swaps
        // α and β and stays strict.
        let adv = Adversary::new(make_special_biangular(10, &pi10()).unwrap());
        let a = adversary_step(&adv, &NeighborMidpoint).unwrap();
        let alone = adv.config.relocated(&a.moves[..5]);
        assert!(is_regular_ngon(&alone).is_some());
        assert!(a.both);
        let next = adv.config.relocated(&a.moves);
        let b = biangular(&next).unwrap();
        assert!(b.strict);
        assert_eq!(b.alpha, pi10());
        assert!(is_regular_ngon(&next).is_none());
    }

    #[test]
    fn bq_analogue_lead_alone_stays_biangular() {
        // Rotating G1 alone by π/n - α/2 leaves gaps α/2 + π/(2n)... which is
        // not 2π/n, so only G1 moves; simulating both groups would complete
        // the n-gon.
        let adv = Adversary::new(make_special_biangular(10, &pi10()).unwrap());
        let a = adversary_step(&adv, &OnCircleBq).unwrap();
        assert!(!a.both);
        let next = adv.config.relocated(&a.moves);
        let b = biangular(&next).unwrap();
        assert!(b.strict);
        // α' = α + (π/n - α/2) = 3π/20
        assert_eq!(b.alpha, ExactAngle::pi_fraction(3, 20));
        let mut all = a.moves.clone();
        all.extend(adv.group_moves(Group::G2, &OnCircleBq).unwrap());
        assert!(is_regular_ngon(&adv.config.relocated(&all)).is_some());
    }

    #[test]
    fn group_members_turn_by_the_same_angle() {
        let mut adv = Adversary::new(make_special_biangular(12, &ExactAngle::pi_fraction(1, 9)).unwrap());
        for _ in 0..6 {
            let a = adversary_step(&adv, &OnCircleBq).unwrap();
            let shifts: Vec<ExactAngle> = a
                .moves
                .iter()
                .map(|(r, _, p)| {
                    let before = adv.config.polar(*r).unwrap().angle();
                    &p.as_ref().unwrap().angle() - &before
                })
                .collect();
            let lead = match a.lead {
                Group::G1 => &adv.special.group_g1,
                Group::G2 => &adv.special.group_g2,
            };
            assert_eq!(shifts.len(), lead.len());
            assert!(shifts.iter().all(|s| *s == shifts[0]));
            adv.config = adv.config.relocated(&a.moves);
            adv.next_lead = a.lead.other();
        }
    }

    #[test]
    fn demonstrate_reference_rules() {
        for rule in RULE_NAMES {
            let r = rule_by_name(rule).unwrap();
            let c = demonstrate(r.as_ref(), 10, &pi10(), 200).unwrap();
            assert_eq!(c.verdict, Verdict::Certified, "{rule}");
            assert_eq!(c.steps.len(), 200);
            assert!(c.steps.iter().all(|s| !s.regular && s.groups_intact && s.strict));
        }
        let c = demonstrate(&StayPut, 12, &ExactAngle::pi_fraction(1, 12), 5).unwrap();
        assert!(c.final_config.same_positions(&c.initial));
        assert!(rule_by_name("unknown-rule").is_none());
    }

    #[test]
    fn off_circle_rule_is_rejected() {
        let doubling = |v: &View| {
            let ring = on_ring(v)?;
            let p = v.my_position() - ring.circle.center;
            Ok(MoveDecision::to(ring.circle.center + p.scale(2.0)))
        };
        assert!(matches!(
            demonstrate(&doubling, 10, &pi10(), 10),
            Err(UtpError::OffCircle { step: 0, .. })
        ));
    }

    #[test]
    fn merging_rule_halts() {
        // every active robot lands on its neighbour at the smaller angle
        let jump = |v: &View| {
            let ring = on_ring(v)?;
            let me = v.me();
            let (_, ccw) = ring.ccw_neighbor(me);
            let (_, cw) = ring.cw_neighbor(me);
            let angle = match ccw.cmp_value(cw) {
                Ordering::Less => ring.angle(me) + ccw,
                _ => ring.angle(me) - cw,
            };
            Ok(move_on_ring(v, &ring, angle))
        };
        let c = demonstrate(&jump, 10, &pi10(), 10).unwrap();
        assert_eq!(c.verdict, Verdict::GroupsMerged { step: 1 });
        assert!(c.merge_hazards() >= 1);
    }

    #[test]
    fn escaping_rule_is_flagged() {
        use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
        // Keeps hidden state across activations: stays on its first call,
        // moves to the neighbours' midpoint on the second, stays afterwards.
        let calls = AtomicUsize::new(0);
        let sneaky = |v: &View| match calls.fetch_add(1, AtomicOrdering::SeqCst) {
            1 => NeighborMidpoint.decide(v),
            _ => Ok(MoveDecision::stay(v)),
        };
        match demonstrate(&sneaky, 10, &pi10(), 10) {
            Err(UtpError::CertificateViolated { step, certificate }) => {
                assert_eq!(step, 2);
                assert_eq!(certificate.verdict, Verdict::Violated { step: 2 });
                assert!(certificate.steps[1].both_groups);
            }
            other => panic!("{other:?}"),
        }
    }
}
