//! Semi-synchronous execution: a scheduler picks the active robots, each of
//! them looks at the configuration through a fresh local frame, and all
//! their moves are committed at once.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{classify, ClassLabel};
use crate::config::Configuration;
use crate::geometry::{rat, segments_intersect, ExactAngle, Point, Polar};
use crate::procedures::{Handedness, LocalFrame, MoveDecision, ProcedureError, Rule, View};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("step {step}, robot {robot}: {source}")]
    Rule {
        step: u64,
        robot: usize,
        #[source]
        source: ProcedureError,
    },
    #[error("step {0}: empty activation set")]
    EmptyActivation(u64),
    #[error("robot index {index} out of range for {n} robots")]
    InvalidRobot { index: usize, n: usize },
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("invalid scheduler: {0}")]
    Scheduler(String),
}

/// Expresses `config` in `frame` and marks `robot` as the observer.
pub fn make_view(config: &Configuration, robot: usize, frame: &LocalFrame) -> View {
    let n = config.len();
    assert!(robot < n, "robot {robot} out of range");
    let exact = config.exact().and_then(|l| {
        let center = frame.to_local(l.center);
        let polar: Option<Vec<Polar>> = l.polar.iter().map(|p| frame.polar_to_local(p)).collect();
        polar.map(|p| (center, p))
    });
    let local: Vec<Point> = match &exact {
        Some((c, polar)) => polar.iter().map(|p| p.to_point(*c)).collect(),
        None => config.positions().iter().map(|&p| frame.to_local(p)).collect(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| local[a].total_cmp(&local[b]));
    let me = order.iter().position(|&i| i == robot).expect("robot in order");
    let snapshot = match exact {
        Some((c, polar)) => {
            let sorted = order.iter().map(|&i| polar[i].clone()).collect();
            Configuration::from_polar(c, sorted).expect("n >= 2")
        }
        None => Configuration::new(order.iter().map(|&i| local[i]).collect()).expect("n >= 2"),
    };
    let snapshot = snapshot
        .with_tolerance(config.tolerance())
        .with_time(config.time_index);
    View::new(me, snapshot)
}

/// Maps a decision taken in `frame` back to global coordinates.
fn to_global(config: &Configuration, frame: &LocalFrame, d: &MoveDecision) -> (Point, Option<Polar>) {
    if let (Some(l), Some(p)) = (config.exact(), &d.exact) {
        if let Some(g) = frame.polar_to_global(p) {
            return (g.to_point(l.center), Some(g));
        }
    }
    (frame.to_global(d.target), None)
}

/// Supplies the local frame of each activation.
pub trait FrameSource {
    fn frame(&mut self, robot: usize) -> LocalFrame;
}

/// Every robot shares the global frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityFrames;

impl FrameSource for IdentityFrames {
    fn frame(&mut self, _robot: usize) -> LocalFrame {
        LocalFrame::identity()
    }
}

/// One fixed frame per robot.
#[derive(Debug, Clone)]
pub struct FixedFrames(pub Vec<LocalFrame>);

impl FrameSource for FixedFrames {
    fn frame(&mut self, robot: usize) -> LocalFrame {
        self.0[robot].clone()
    }
}

/// Fresh random similarity per activation: uniform rotation, fair-coin
/// reflection, log-uniform scale in `[0.1, 10]` and a translation in
/// `[-10, 10]²`. Rotation and scale are rational so exact layouts stay exact.
#[derive(Debug, Clone)]
pub struct RandomFrames {
    rng: ChaCha8Rng,
}

impl RandomFrames {
    pub fn new(seed: u64) -> Self {
        RandomFrames {
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6672_616d_6573),
        }
    }
}

pub const ROTATION_STEPS: i64 = 1 << 16;
const SCALE_DENOMINATOR: i64 = 1 << 10;

pub fn random_frame<R: Rng>(rng: &mut R) -> LocalFrame {
    let rotation = ExactAngle::from_turns(rng.random_range(0..ROTATION_STEPS), ROTATION_STEPS);
    let handedness = if rng.random_bool(0.5) {
        Handedness::Mirrored
    } else {
        Handedness::Direct
    };
    let log_scale = rng.random_range(0.1f64.ln()..=10f64.ln());
    let scaled = (log_scale.exp() * SCALE_DENOMINATOR as f64).round() as i64;
    let origin = Point::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
    LocalFrame {
        origin,
        rotation,
        scale: rat(scaled, SCALE_DENOMINATOR),
        handedness,
    }
}

impl FrameSource for RandomFrames {
    fn frame(&mut self, _robot: usize) -> LocalFrame {
        random_frame(&mut self.rng)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchedulerPolicy {
    Synchronous,
    /// Consecutive blocks of `block` robots, cycling through the indices.
    RoundRobin { block: usize },
    /// Each robot is activated with probability 1/2, but never idles for
    /// more than `k` consecutive steps.
    SeededRandomFair { seed: u64, k: usize },
    /// The given activation sets, repeated cyclically.
    Scripted { sets: Vec<Vec<usize>> },
}

impl SchedulerPolicy {
    /// Number of consecutive steps in which every robot is activated at
    /// least once.
    pub fn fairness_window(&self, n: usize) -> usize {
        match self {
            SchedulerPolicy::Synchronous => 1,
            SchedulerPolicy::RoundRobin { block } => n.div_ceil((*block).max(1)),
            SchedulerPolicy::SeededRandomFair { k, .. } => k + 1,
            SchedulerPolicy::Scripted { sets } => sets.len().max(1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    policy: SchedulerPolicy,
    n: usize,
    t: usize,
    idle: Vec<usize>,
    rng: ChaCha8Rng,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy, n: usize) -> Result<Self, SimError> {
        let seed = match &policy {
            SchedulerPolicy::RoundRobin { block: 0 } => {
                return Err(SimError::Scheduler("round-robin block size must be positive".into()))
            }
            SchedulerPolicy::Scripted { sets } => {
                if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
                    return Err(SimError::Scheduler("scripted activation sets must be nonempty".into()));
                }
                if let Some(&index) = sets.iter().flatten().find(|&&i| i >= n) {
                    return Err(SimError::InvalidRobot { index, n });
                }
                0
            }
            SchedulerPolicy::SeededRandomFair { seed, .. } => *seed,
            _ => 0,
        };
        Ok(Scheduler {
            policy,
            n,
            t: 0,
            idle: vec![0; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn policy(&self) -> &SchedulerPolicy {
        &self.policy
    }

    /// Next activation set, sorted and nonempty.
    pub fn next_set(&mut self) -> Vec<usize> {
        let n = self.n;
        let set: Vec<usize> = match &self.policy {
            SchedulerPolicy::Synchronous => (0..n).collect(),
            SchedulerPolicy::RoundRobin { block } => {
                let b = (*block).min(n);
                let start = (self.t * b) % n;
                let s: BTreeSet<usize> = (0..b).map(|i| (start + i) % n).collect();
                s.into_iter().collect()
            }
            SchedulerPolicy::SeededRandomFair { k, .. } => {
                let k = *k;
                let mut s: Vec<usize> = (0..n)
                    .filter(|&i| {
                        let coin = self.rng.random_bool(0.5);
                        coin || self.idle[i] >= k
                    })
                    .collect();
                if s.is_empty() {
                    s.push(self.rng.random_range(0..n));
                }
                s
            }
            SchedulerPolicy::Scripted { sets } => {
                let s: BTreeSet<usize> = sets[self.t % sets.len()].iter().copied().collect();
                s.into_iter().collect()
            }
        };
        let mut it = set.iter().peekable();
        for i in 0..n {
            if it.peek() == Some(&&i) {
                self.idle[i] = 0;
                it.next();
            } else {
                self.idle[i] += 1;
            }
        }
        self.t += 1;
        set
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// Straight-line trajectories of two robots moving in the same step cross.
    Crossing { a: usize, b: usize },
    /// Two robots share a position after the step.
    Coincidence { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub index: u64,
    pub config_before: Configuration,
    pub active: Vec<usize>,
    /// Global target of every active robot, in `active` order.
    pub targets: Vec<(usize, Point)>,
    pub config_after: Configuration,
    pub warnings: Vec<Warning>,
}

impl StepRecord {
    /// Active robots whose target differs from their position.
    pub fn movers(&self) -> Vec<usize> {
        self.active
            .iter()
            .copied()
            .filter(|&r| !self.config_before.same_robot_position(&self.config_after, r))
            .collect()
    }
}

/// One atomic step: views, decisions, simultaneous commit.
pub fn step(
    config: &Configuration,
    active: &[usize],
    rule: &dyn Rule,
    frames: &mut dyn FrameSource,
) -> Result<(Configuration, StepRecord), SimError> {
    let t = config.time_index;
    if active.is_empty() {
        return Err(SimError::EmptyActivation(t));
    }
    let n = config.len();
    if let Some(&index) = active.iter().find(|&&i| i >= n) {
        return Err(SimError::InvalidRobot { index, n });
    }
    let mut moves = Vec::with_capacity(active.len());
    for &r in active {
        let frame = frames.frame(r);
        let view = make_view(config, r, &frame);
        let d = rule.decide(&view).map_err(|source| SimError::Rule {
            step: t,
            robot: r,
            source,
        })?;
        let (p, polar) = to_global(config, &frame, &d);
        moves.push((r, p, polar));
    }
    let after = config.relocated(&moves);
    let targets = moves.iter().map(|(r, p, _)| (*r, *p)).collect();
    let warnings = diagnose(config, &after, active);
    let record = StepRecord {
        index: t,
        config_before: config.clone(),
        active: active.to_vec(),
        targets,
        config_after: after.clone(),
        warnings,
    };
    Ok((after, record))
}

fn diagnose(before: &Configuration, after: &Configuration, active: &[usize]) -> Vec<Warning> {
    let tol = before.tolerance();
    let movers: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&r| !before.same_robot_position(after, r))
        .collect();
    let mut out = Vec::new();
    for (i, &a) in movers.iter().enumerate() {
        for &b in &movers[i + 1..] {
            if segments_intersect(
                before.position(a),
                after.position(a),
                before.position(b),
                after.position(b),
                tol,
            ) {
                out.push(Warning::Crossing { a, b });
            }
        }
    }
    if let Some((a, b)) = after.first_coincidence() {
        out.push(Warning::Coincidence { a, b });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// A regular n-gon after this many steps.
    Formed { step: u64 },
    BudgetExhausted,
    /// Nothing moved for a whole fairness window ending at `step`.
    Quiescent { step: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<StepRecord>,
    /// Class of the initial configuration, then of each `config_after`.
    pub classes: Vec<ClassLabel>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn final_config(&self) -> &Configuration {
        self.steps.last().map_or(&self.initial, |s| &s.config_after)
    }

    /// Class sequence with consecutive repeats collapsed.
    pub fn class_runs(&self) -> Vec<ClassLabel> {
        let mut v = self.classes.clone();
        v.dedup();
        v
    }
}

/// Steps until a regular n-gon forms, the budget runs out, or the
/// configuration stays unchanged for a full fairness window.
pub fn run(
    config: &Configuration,
    policy: &SchedulerPolicy,
    rule: &dyn Rule,
    frames: &mut dyn FrameSource,
    budget: u64,
) -> Result<Trace, SimError> {
    if budget == 0 {
        return Err(SimError::ZeroBudget);
    }
    let n = config.len();
    let mut scheduler = Scheduler::new(policy.clone(), n)?;
    let window = policy.fairness_window(n) as u64;
    let mut current = config.clone();
    let mut classes = vec![classify(&current).label()];
    let mut steps = Vec::new();
    if classes[0] == ClassLabel::RegularNGon {
        return Ok(Trace {
            initial: config.clone(),
            steps,
            classes,
            outcome: Outcome::Formed { step: 0 },
        });
    }
    let mut still = 0u64;
    for s in 1..=budget {
        let active = scheduler.next_set();
        let (next, record) = step(&current, &active, rule, frames)?;
        let moved = !next.same_positions(&current);
        let label = classify(&next).label();
        classes.push(label);
        steps.push(record);
        current = next;
        if label == ClassLabel::RegularNGon {
            return Ok(Trace {
                initial: config.clone(),
                steps,
                classes,
                outcome: Outcome::Formed { step: s },
            });
        }
        still = if moved { 0 } else { still + 1 };
        if still >= window {
            return Ok(Trace {
                initial: config.clone(),
                steps,
                classes,
                outcome: Outcome::Quiescent { step: s },
            });
        }
    }
    Ok(Trace {
        initial: config.clone(),
        steps,
        classes,
        outcome: Outcome::BudgetExhausted,
    })
}

/// Longest stretch of consecutive steps in which `robot` was idle.
pub fn longest_idle(trace: &Trace, robot: usize) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for s in &trace.steps {
        if s.active.contains(&robot) {
            cur = 0;
        } else {
            cur += 1;
            best = best.max(cur);
        }
    }
    best
}

/// True iff no robot stays inactive for more than `k` consecutive steps.
pub fn fairness_check(trace: &Trace, k: usize) -> bool {
    (0..trace.initial.len()).all(|r| longest_idle(trace, r) <= k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::is_regular_ngon;
    use crate::generate;
    use crate::geometry::rat;
    use crate::procedures::{AbStub, Ngon};

    fn fixture10() -> Configuration {
        generate::strict_biangular(10, &ExactAngle::pi_fraction(1, 10)).unwrap()
    }

    #[test]
    fn identity_view_matches_global() {
        let c = fixture10();
        let v = make_view(&c, 3, &LocalFrame::identity());
        assert_eq!(v.my_position(), c.position(3));
        let mut g: Vec<Point> = c.positions().to_vec();
        g.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(v.snapshot().positions(), &g[..]);
    }

    #[test]
    fn mirrored_and_scaled_frames_invert() {
        let c = fixture10().into_real();
        let f = LocalFrame {
            origin: Point::new(1.0, 2.0),
            rotation: ExactAngle::from_turns(1, 4),
            scale: rat(3, 1),
            handedness: Handedness::Mirrored,
        };
        let v = make_view(&c, 0, &f);
        // closed-form similarity: mirror y, rotate by π/2, scale by 3
        let p = c.position(0) - Point::new(1.0, 2.0);
        let expect = Point::new(-3.0 * -p.y, 3.0 * p.x);
        assert!(v.my_position().dist(expect) < 1e-12);
        for q in v.snapshot().positions() {
            let back = f.to_global(*q);
            assert!(c.positions().iter().any(|g| g.dist(back) < 1e-12));
        }
        let mirror = LocalFrame {
            handedness: Handedness::Mirrored,
            ..LocalFrame::identity()
        };
        let m = make_view(&c, 0, &mirror);
        assert!(m.my_position().dist(Point::new(c.position(0).x, -c.position(0).y)) < 1e-15);
    }

    #[test]
    fn synchronous_bq_step_forms_ngon() {
        let c = fixture10();
        let all: Vec<usize> = (0..10).collect();
        let (after, rec) = step(&c, &all, &Ngon::default(), &mut RandomFrames::new(3)).unwrap();
        let (circle, _) = is_regular_ngon(&after).unwrap();
        assert!((circle.radius - 2.0).abs() < 1e-12);
        assert!(after.exact().is_some());
        assert!(rec.warnings.is_empty(), "{:?}", rec.warnings);
    }

    #[test]
    fn partial_bq_step_gives_quasi() {
        let c = fixture10();
        let b = crate::classifier::biangular(&c).unwrap();
        let (g1, _) = b.groups();
        let (after, _) = step(&c, &g1, &Ngon::default(), &mut RandomFrames::new(4)).unwrap();
        let q = crate::classifier::is_quasi_ngon(&after).unwrap().unwrap();
        assert_eq!(q.k, 5);
        assert!(classify(&after).label().is_quasi());
    }

    #[test]
    fn all_stay_step_is_identity() {
        let c = fixture10();
        let (after, rec) = step(&c, &[1, 4], &AbStub, &mut IdentityFrames).unwrap();
        assert!(after.same_positions(&c));
        assert_eq!(rec.movers(), Vec::<usize>::new());
        assert_eq!(step(&c, &[], &AbStub, &mut IdentityFrames), Err(SimError::EmptyActivation(0)));
    }

    #[test]
    fn run_examples() {
        let c = fixture10();
        let t = run(&c, &SchedulerPolicy::Synchronous, &Ngon::default(), &mut IdentityFrames, 10).unwrap();
        assert_eq!(t.outcome, Outcome::Formed { step: 1 });

        let policy = SchedulerPolicy::SeededRandomFair { seed: 1, k: 3 };
        let t = run(&c, &policy, &Ngon::default(), &mut RandomFrames::new(1), 500).unwrap();
        assert!(matches!(t.outcome, Outcome::Formed { .. }), "{:?}", t.outcome);
        assert!(fairness_check(&t, 3));

        let r = generate::regular(12, rat(1, 1)).unwrap();
        let t = run(&r, &policy, &Ngon::default(), &mut IdentityFrames, 5).unwrap();
        assert_eq!(t.outcome, Outcome::Formed { step: 0 });

        let arb = Configuration::new((0..10).map(|i| Point::new(i as f64, (i * i) as f64)).collect()).unwrap();
        let t = run(&arb, &SchedulerPolicy::RoundRobin { block: 3 }, &Ngon::default(), &mut IdentityFrames, 100).unwrap();
        assert_eq!(t.outcome, Outcome::Quiescent { step: 4 });
    }

    #[test]
    fn fairness_examples() {
        let c = fixture10();
        let stay = |v: &View| Ok(MoveDecision::stay(v));
        let t = run(&c, &SchedulerPolicy::Synchronous, &stay, &mut IdentityFrames, 5).unwrap();
        assert!(fairness_check(&t, 1));

        let scripted = SchedulerPolicy::Scripted { sets: vec![vec![0]] };
        let mut sched = Scheduler::new(scripted, 10).unwrap();
        let mut cur = c.clone();
        let mut steps = vec![];
        for _ in 0..6 {
            let (next, rec) = step(&cur, &sched.next_set(), &stay, &mut IdentityFrames).unwrap();
            steps.push(rec);
            cur = next;
        }
        let t = Trace {
            initial: c.clone(),
            classes: vec![],
            steps,
            outcome: Outcome::BudgetExhausted,
        };
        for k in 0..6 {
            assert!(!fairness_check(&t, k));
        }

        let t = run(&c, &SchedulerPolicy::RoundRobin { block: 1 }, &stay, &mut IdentityFrames, 40).unwrap();
        assert!(fairness_check(&t, 10));
        assert!(fairness_check(&t, 9));
        assert!(!fairness_check(&t, 8));
    }

    #[test]
    fn random_fair_respects_window() {
        for k in 0..5 {
            let mut s = Scheduler::new(SchedulerPolicy::SeededRandomFair { seed: k as u64, k }, 13).unwrap();
            let mut idle = [0usize; 13];
            for _ in 0..500 {
                let set = s.next_set();
                assert!(!set.is_empty());
                for (i, x) in idle.iter_mut().enumerate() {
                    *x = if set.contains(&i) { 0 } else { *x + 1 };
                    assert!(*x <= k);
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let c = fixture10();
        let policy = SchedulerPolicy::SeededRandomFair { seed: 9, k: 3 };
        let a = run(&c, &policy, &Ngon::default(), &mut RandomFrames::new(9), 200).unwrap();
        let b = run(&c, &policy, &Ngon::default(), &mut RandomFrames::new(9), 200).unwrap();
        assert_eq!(a, b);
    }
}
