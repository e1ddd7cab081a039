//! Builders for configurations of each class, exact whenever the requested
//! angles are rational.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::config::{ConfigError, Configuration};
use crate::geometry::{rat, ExactAngle, Point, Polar, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("a strict biangular circle needs an even number of robots, got {0}")]
    OddBiangular(usize),
    #[error("alpha must lie strictly between 0 and 2π/n (exclusive), got {0}")]
    InvalidAlpha(String),
    #[error("quasi n-gons need n >= 9, got {0}")]
    TooFewForQuasi(usize),
    #[error("invalid quasi layout: {0}")]
    InvalidQuasi(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Regular n-gon of the given radius centred at the origin, vertex 0 on the
/// positive x axis.
pub fn regular(n: usize, radius: Rational) -> Result<Configuration, GenerateError> {
    let polar = (0..n)
        .map(|k| Polar::new(radius.clone(), rat(k as i64, n as i64)))
        .collect();
    Ok(Configuration::from_polar(Point::ORIGIN, polar)?)
}

/// Strict biangular circle on the unit circle: robots at `2πj·2/n` and
/// `2πj·2/n + alpha`, so consecutive gaps alternate `alpha`,
/// `beta = 4π/n - alpha`. Exact when `alpha` is.
pub fn strict_biangular(n: usize, alpha: &ExactAngle) -> Result<Configuration, GenerateError> {
    if n % 2 == 1 {
        return Err(GenerateError::OddBiangular(n));
    }
    check_alpha(n, alpha)?;
    match alpha {
        ExactAngle::Turns(a) => {
            let mut polar = Vec::with_capacity(n);
            for j in 0..n / 2 {
                let base = rat(2 * j as i64, n as i64);
                polar.push(Polar::new(rat(1, 1), base.clone()));
                polar.push(Polar::new(rat(1, 1), base + a));
            }
            Ok(Configuration::from_polar(Point::ORIGIN, polar)?)
        }
        ExactAngle::Radians(a) => {
            let mut pts = Vec::with_capacity(n);
            for j in 0..n / 2 {
                let base = std::f64::consts::TAU * (2 * j) as f64 / n as f64;
                pts.push(Point::polar(Point::ORIGIN, 1.0, base));
                pts.push(Point::polar(Point::ORIGIN, 1.0, base + a));
            }
            Ok(Configuration::new_distinct(pts)?)
        }
    }
}

/// `0 < alpha < 2π/n`: alpha is the smaller of the two alternating angles,
/// and equality with `2π/n` would be a regular n-gon.
pub fn check_alpha(n: usize, alpha: &ExactAngle) -> Result<(), GenerateError> {
    let ok = match alpha {
        ExactAngle::Turns(a) => *a > rat(0, 1) && *a < rat(1, n as i64),
        ExactAngle::Radians(a) => *a > 0.0 && *a < std::f64::consts::TAU / n as f64,
    };
    if ok {
        Ok(())
    } else {
        Err(GenerateError::InvalidAlpha(alpha.to_string()))
    }
}

/// Description of a quasi n-gon on the lattice `rotation + k/n` (turns).
#[derive(Debug, Clone)]
pub struct QuasiLayout {
    pub n: usize,
    pub center: Point,
    pub outer_radius: Rational,
    pub inner_radius: Rational,
    pub rotation: Rational,
    /// Lattice slots left empty on `C1`.
    pub missing: BTreeSet<usize>,
    /// Angles (turns) of the robots on `C2`.
    pub inner_turns: Vec<Rational>,
}

impl QuasiLayout {
    pub fn build(&self) -> Result<Configuration, GenerateError> {
        let n = self.n;
        if n < 9 {
            return Err(GenerateError::TooFewForQuasi(n));
        }
        if self.outer_radius <= self.inner_radius || self.inner_radius <= rat(0, 1) {
            return Err(GenerateError::InvalidQuasi("need 0 < r2 < r1".into()));
        }
        if self.missing.is_empty() || self.missing.len() >= n {
            return Err(GenerateError::InvalidQuasi(
                "both circles must carry a robot".into(),
            ));
        }
        if self.inner_turns.len() != self.missing.len() {
            return Err(GenerateError::InvalidQuasi(format!(
                "{} robots on C2 for {} missing slots",
                self.inner_turns.len(),
                self.missing.len()
            )));
        }
        let mut polar = Vec::with_capacity(n);
        for k in (0..n).filter(|k| !self.missing.contains(k)) {
            polar.push(Polar::new(
                self.outer_radius.clone(),
                &self.rotation + rat(k as i64, n as i64),
            ));
        }
        for t in &self.inner_turns {
            polar.push(Polar::new(self.inner_radius.clone(), t.clone()));
        }
        let c = Configuration::from_polar(self.center, polar)?;
        c.check_distinct()?;
        Ok(c)
    }

    pub fn slot_turns(&self, slot: usize) -> Rational {
        &self.rotation + rat(slot as i64, self.n as i64)
    }
}

/// The 16-robot quasi n-gon used across the test-suite: `C1` radius 2 with
/// slots 1, 5, 6 and 11 empty, `C2` radius 1.
///
/// Aligned: each robot on `C2` sits on the angle of one missing slot.
pub fn quasi16_aligned() -> QuasiLayout {
    let missing: BTreeSet<usize> = [1, 5, 6, 11].into_iter().collect();
    QuasiLayout {
        n: 16,
        center: Point::ORIGIN,
        outer_radius: rat(2, 1),
        inner_radius: rat(1, 1),
        rotation: rat(0, 1),
        inner_turns: missing.iter().map(|&k| rat(k as i64, 16)).collect(),
        missing,
    }
}

/// Same circles and `C1` robots as [`quasi16_aligned`], with the robots on
/// `C2` moved off the lattice inside their sectors.
pub fn quasi16_arbitrary() -> QuasiLayout {
    let mut q = quasi16_aligned();
    // sectors (0,2), (4,7), (10,12) in slot units
    q.inner_turns = vec![rat(13, 160), rat(45, 160), rat(67, 160), rat(105, 160)];
    q
}

fn gap_runs(n: usize, missing: &BTreeSet<usize>) -> Vec<(usize, usize)> {
    // (first present slot, number of slots to the next present slot ccw)
    let present: Vec<usize> = (0..n).filter(|k| !missing.contains(k)).collect();
    let k = present.len();
    (0..k)
        .map(|i| {
            let a = present[i];
            let b = present[(i + 1) % k];
            let steps = if k == 1 { n } else { (b + n - a) % n };
            (a, steps)
        })
        .filter(|&(_, steps)| steps > 1)
        .collect()
}

/// Resolution of the random inner angles: each lattice cell `1/n` is split
/// into this many candidate positions.
const CELL_RESOLUTION: i64 = 1000;

fn random_layout<R: Rng>(n: usize, aligned: bool, rng: &mut R) -> QuasiLayout {
    let m = rng.random_range(1..n);
    let missing: BTreeSet<usize> = sample(rng, n, m).into_iter().collect();
    let rotation = rat(rng.random_range(0..65_536), 65_536);
    let center = Point::new(
        rng.random_range(-40..=40) as f64 / 8.0,
        rng.random_range(-40..=40) as f64 / 8.0,
    );
    let inner_radius = rat(rng.random_range(4..=16), 10);
    let mut inner_turns = Vec::with_capacity(m);
    let runs = gap_runs(n, &missing);
    let forced = rng.random_range(0..runs.len());
    for (ri, &(a, steps)) in runs.iter().enumerate() {
        let count = steps - 1;
        let base = &rotation + rat(a as i64, n as i64);
        let unit = rat(1, n as i64 * CELL_RESOLUTION);
        if aligned {
            for s in 1..steps {
                inner_turns.push(&base + rat(s as i64, n as i64));
            }
            continue;
        }
        let span = steps as i64 * CELL_RESOLUTION;
        let mut chosen = BTreeSet::new();
        while chosen.len() < count {
            let mut u = rng.random_range(1..span);
            let on_lattice = rng.random_bool(0.25);
            if on_lattice {
                u = rng.random_range(1..steps as i64) * CELL_RESOLUTION;
            } else if u % CELL_RESOLUTION == 0 {
                u += 1;
            }
            if ri == forced && chosen.is_empty() && u % CELL_RESOLUTION == 0 {
                continue;
            }
            chosen.insert(u);
        }
        for u in chosen {
            inner_turns.push(&base + &unit * rat(u, 1));
        }
    }
    QuasiLayout {
        n,
        center,
        outer_radius: rat(2, 1),
        inner_radius,
        rotation,
        missing,
        inner_turns,
    }
}

/// Random arbitrary (non-aligned) quasi n-gon with exact angles.
pub fn random_quasi_arbitrary<R: Rng>(n: usize, rng: &mut R) -> Result<Configuration, GenerateError> {
    if n < 9 {
        return Err(GenerateError::TooFewForQuasi(n));
    }
    random_layout(n, false, rng).build()
}

/// Random aligned quasi n-gon with exact angles.
pub fn random_quasi_aligned<R: Rng>(n: usize, rng: &mut R) -> Result<Configuration, GenerateError> {
    if n < 9 {
        return Err(GenerateError::TooFewForQuasi(n));
    }
    random_layout(n, true, rng).build()
}

/// Random real-mode configuration on two concentric circles with arbitrary
/// (float) angles; both circles non-empty.
pub fn random_concentric<R: Rng>(n: usize, rng: &mut R) -> Result<Configuration, GenerateError> {
    let center = Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
    let r1 = rng.random_range(1.0..5.0);
    let r2 = r1 * rng.random_range(0.2..0.9);
    let k = rng.random_range(1..n);
    let pts = (0..n)
        .map(|i| {
            let r = if i < k { r1 } else { r2 };
            Point::polar(center, r, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    Ok(Configuration::new_distinct(pts)?)
}
