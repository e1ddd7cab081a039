//! Deterministic simulation and verification of the circle formation problem
//! for anonymous, oblivious, disoriented robots under the semi-synchronous
//! model.
//!
//! * [`geometry`]: points, exact angles, circles.
//! * [`classifier`]: regular n-gons, biangular circles, concentric pairs,
//!   sectors and quasi n-gons.
//! * [`procedures`]: the robot decision rules and the top-level dispatcher.
//! * [`simulator`]: local frames, schedulers, atomic steps and runs.
//! * [`utp`]: the adversarial schedule against on-circle transformation rules.
//! * [`generate`], [`io`]: fixture construction and file formats.

pub mod classifier;
pub mod config;
pub mod generate;
pub mod geometry;
pub mod io;
pub mod parallel;
pub mod procedures;
pub mod simulator;
pub mod sweep;
pub mod utp;

pub use classifier::{classify, ClassLabel, ConfigClass};
pub use config::Configuration;
pub use geometry::{rat, Circle, ExactAngle, Point, Polar, Rational, Tolerance};
