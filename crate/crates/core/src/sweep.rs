//! Experiment descriptions and batch execution of independent runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::ClassLabel;
use crate::config::Configuration;
use crate::generate::{self, GenerateError};
use crate::geometry::{rat, ExactAngle, Tolerance};
use crate::io::{angle_serde, ConfigFile, IoError};
use crate::parallel;
use crate::procedures::{self, is_excluded_n, Rule};
use crate::simulator::{run, FrameSource, IdentityFrames, Outcome, RandomFrames, SchedulerPolicy, SimError, Trace};
use crate::utp::{self, Certificate, UtpError, Verdict};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("the ngon protocol does not handle n = {0} (n in {{4, 6, 8}} is excluded)")]
    UnsupportedN(usize),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("explicit configuration has {got} robots, spec says n = {n}")]
    SizeMismatch { n: usize, got: usize },
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Utp(#[from] UtpError),
}

/// Starting configuration of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialClass {
    /// Regular n-gon of radius 1.
    Regular,
    StrictBiangular {
        #[serde(with = "angle_serde")]
        alpha: ExactAngle,
    },
    QuasiArbitrary { seed: u64 },
    QuasiAligned { seed: u64 },
    Explicit { config: ConfigFile },
}

/// How robots' local frames are drawn each activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FramePolicy {
    Identity,
    Random { seed: u64 },
}

impl FramePolicy {
    pub fn source(self) -> Box<dyn FrameSource> {
        match self {
            FramePolicy::Identity => Box::new(IdentityFrames),
            FramePolicy::Random { seed } => Box::new(RandomFrames::new(seed)),
        }
    }
}

/// Everything needed to reproduce one simulator run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n: usize,
    pub initial: InitialClass,
    pub scheduler: SchedulerPolicy,
    pub frames: FramePolicy,
    pub rule: String,
    pub budget: u64,
    pub epsilon: f64,
}

impl ExperimentSpec {
    /// Ngon rule, random frames, epsilon 1e-9.
    pub fn new(n: usize, initial: InitialClass, scheduler: SchedulerPolicy, seed: u64, budget: u64) -> Self {
        ExperimentSpec {
            n,
            initial,
            scheduler,
            frames: FramePolicy::Random { seed },
            rule: "ngon".into(),
            budget,
            epsilon: Tolerance::default().eps,
        }
    }

    pub fn rule(&self) -> Result<Box<dyn Rule>, SweepError> {
        if self.rule == "ngon" && is_excluded_n(self.n) {
            return Err(SweepError::UnsupportedN(self.n));
        }
        procedures::rule_by_name(&self.rule).ok_or_else(|| SweepError::UnknownRule(self.rule.clone()))
    }

    pub fn initial_config(&self) -> Result<Configuration, SweepError> {
        let n = self.n;
        let c = match &self.initial {
            InitialClass::Regular => generate::regular(n, rat(1, 1))?,
            InitialClass::StrictBiangular { alpha } => generate::strict_biangular(n, alpha)?,
            InitialClass::QuasiArbitrary { seed } => {
                generate::random_quasi_arbitrary(n, &mut ChaCha8Rng::seed_from_u64(*seed))?
            }
            InitialClass::QuasiAligned { seed } => {
                generate::random_quasi_aligned(n, &mut ChaCha8Rng::seed_from_u64(*seed))?
            }
            InitialClass::Explicit { config } => {
                let c = config.to_config()?;
                if c.len() != n {
                    return Err(SweepError::SizeMismatch { n, got: c.len() });
                }
                c
            }
        };
        Ok(c.with_tolerance(Tolerance::new(self.epsilon)))
    }

    pub fn run(&self) -> Result<Trace, SweepError> {
        let rule = self.rule()?;
        let initial = self.initial_config()?;
        let mut frames = self.frames.source();
        Ok(run(&initial, &self.scheduler, rule.as_ref(), frames.as_mut(), self.budget)?)
    }
}

/// Compact result of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub outcome: Outcome,
    pub steps: usize,
    pub class_runs: Vec<ClassLabel>,
    pub warnings: usize,
}

impl RunSummary {
    pub fn of(trace: &Trace) -> Self {
        RunSummary {
            outcome: trace.outcome,
            steps: trace.steps.len(),
            class_runs: trace.class_runs(),
            warnings: trace.steps.iter().map(|s| s.warnings.len()).sum(),
        }
    }
}

fn run_one(spec: &ExperimentSpec) -> Result<RunSummary, SweepError> {
    spec.run().map(|t| RunSummary::of(&t))
}

/// Runs every spec, in parallel when the `parallel` feature is enabled.
pub fn run_all(specs: &[ExperimentSpec]) -> Vec<Result<RunSummary, SweepError>> {
    parallel::map(specs, run_one)
}

pub fn run_all_sequential(specs: &[ExperimentSpec]) -> Vec<Result<RunSummary, SweepError>> {
    parallel::map_sequential(specs, run_one)
}

/// One cell of the adversarial demonstrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtpCell {
    pub rule: String,
    pub n: usize,
    #[serde(with = "angle_serde")]
    pub alpha: ExactAngle,
    pub budget: u64,
}

impl UtpCell {
    pub fn demonstrate(&self) -> Result<Certificate, SweepError> {
        let rule = utp::rule_by_name(&self.rule).ok_or_else(|| SweepError::UnknownRule(self.rule.clone()))?;
        Ok(utp::demonstrate(rule.as_ref(), self.n, &self.alpha, self.budget)?)
    }
}

/// Runs every cell and returns the verdicts, in parallel when enabled.
pub fn demonstrate_all(cells: &[UtpCell]) -> Vec<Result<Verdict, SweepError>> {
    parallel::map(cells, |c| c.demonstrate().map(|cert| cert.verdict))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<ExperimentSpec> {
        (0..6)
            .map(|seed| {
                ExperimentSpec::new(
                    10,
                    InitialClass::StrictBiangular {
                        alpha: ExactAngle::pi_fraction(1, 10),
                    },
                    SchedulerPolicy::SeededRandomFair { seed, k: 3 },
                    seed,
                    500,
                )
            })
            .collect()
    }

    #[test]
    fn parallel_matches_sequential() {
        let specs = grid();
        let a: Vec<_> = run_all(&specs).into_iter().map(Result::unwrap).collect();
        let b: Vec<_> = run_all_sequential(&specs).into_iter().map(Result::unwrap).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| matches!(s.outcome, Outcome::Formed { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        for s in grid() {
            let j = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<ExperimentSpec>(&j).unwrap(), s);
        }
    }

    #[test]
    fn excluded_n_rejected() {
        let spec = ExperimentSpec::new(6, InitialClass::Regular, SchedulerPolicy::Synchronous, 0, 10);
        assert!(matches!(spec.run(), Err(SweepError::UnsupportedN(6))));
        let mut spec = spec;
        spec.rule = "nope".into();
        spec.n = 10;
        assert!(matches!(spec.run(), Err(SweepError::UnknownRule(_))));
    }

    #[test]
    fn regular_start_forms_immediately() {
        let spec = ExperimentSpec::new(12, InitialClass::Regular, SchedulerPolicy::Synchronous, 0, 10);
        assert_eq!(spec.run().unwrap().outcome, Outcome::Formed { step: 0 });
    }
}
