//! Snapshots of robot positions.

use thiserror::Error;

use crate::geometry::{Point, Polar, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("a configuration needs at least two robots, got {0}")]
    TooFewRobots(usize),
    #[error("exact layout has {layout} entries but the configuration has {points} robots")]
    LayoutMismatch { layout: usize, points: usize },
    #[error("robots {0} and {1} share a position")]
    Coincident(usize, usize),
}

/// Exact polar coordinates of every robot around one common center.
///
/// When present it is authoritative: the float coordinates of the owning
/// [`Configuration`] are derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLayout {
    pub center: Point,
    pub polar: Vec<Polar>,
}

/// Positions of all robots at one time instant.
///
/// The index of a robot is simulator bookkeeping only; nothing derived from
/// it is shown to the decision rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    positions: Vec<Point>,
    exact: Option<ExactLayout>,
    pub time_index: u64,
    tol: Tolerance,
}

impl Configuration {
    /// Real-mode configuration.
    pub fn new(positions: Vec<Point>) -> Result<Self, ConfigError> {
        if positions.len() < 2 {
            return Err(ConfigError::TooFewRobots(positions.len()));
        }
        Ok(Configuration {
            positions,
            exact: None,
            time_index: 0,
            tol: Tolerance::default(),
        })
    }

    /// Exact-mode configuration: float positions are computed from `polar`.
    pub fn from_polar(center: Point, polar: Vec<Polar>) -> Result<Self, ConfigError> {
        let positions = polar.iter().map(|p| p.to_point(center)).collect();
        let mut c = Self::new(positions)?;
        c.exact = Some(ExactLayout { center, polar });
        Ok(c)
    }

    /// Like [`Configuration::new`] but also rejects coincident robots, as
    /// required of initial configurations.
    pub fn new_distinct(positions: Vec<Point>) -> Result<Self, ConfigError> {
        let c = Self::new(positions)?;
        c.check_distinct()?;
        Ok(c)
    }

    pub fn check_distinct(&self) -> Result<(), ConfigError> {
        if let Some((i, j)) = self.first_coincidence() {
            return Err(ConfigError::Coincident(i, j));
        }
        Ok(())
    }

    /// First pair of robots sharing a position, if any.
    pub fn first_coincidence(&self) -> Option<(usize, usize)> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.same_position(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    fn same_position(&self, i: usize, j: usize) -> bool {
        match &self.exact {
            Some(l) => l.polar[i] == l.polar[j],
            None => self.tol.same_point(self.positions[i], self.positions[j]),
        }
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_time(mut self, t: u64) -> Self {
        self.time_index = t;
        self
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Point {
        self.positions[i]
    }

    pub fn exact(&self) -> Option<&ExactLayout> {
        self.exact.as_ref()
    }

    pub fn polar(&self, i: usize) -> Option<&Polar> {
        self.exact.as_ref().map(|l| &l.polar[i])
    }

    /// Drops the exact layout, turning this into a real-mode configuration.
    pub fn into_real(mut self) -> Self {
        self.exact = None;
        self
    }

    /// Applies `f` to every position; the exact layout is dropped.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Self {
        Configuration {
            positions: self.positions.iter().map(|&p| f(p)).collect(),
            exact: None,
            time_index: self.time_index,
            tol: self.tol,
        }
    }

    /// Robot `i` of the result is robot `pick[i]` of `self`; used both for
    /// permutations and for sub-cohorts.
    pub fn select(&self, pick: &[usize]) -> Self {
        Configuration {
            positions: pick.iter().map(|&i| self.positions[i]).collect(),
            exact: self.exact.as_ref().map(|l| ExactLayout {
                center: l.center,
                polar: pick.iter().map(|&i| l.polar[i].clone()).collect(),
            }),
            time_index: self.time_index,
            tol: self.tol,
        }
    }

    /// Replaces the positions of some robots. When `self` is exact and every
    /// replacement carries polar coordinates the result stays exact;
    /// otherwise it falls back to real mode.
    pub fn relocated(&self, moves: &[(usize, Point, Option<Polar>)]) -> Self {
        let mut positions = self.positions.clone();
        let keep_exact = self.exact.is_some() && moves.iter().all(|m| m.2.is_some());
        let mut exact = if keep_exact { self.exact.clone() } else { None };
        for (i, p, polar) in moves {
            match (&mut exact, polar) {
                (Some(l), Some(pp)) => {
                    l.polar[*i] = pp.clone();
                    positions[*i] = pp.to_point(l.center);
                }
                _ => positions[*i] = *p,
            }
        }
        Configuration {
            positions,
            exact,
            time_index: self.time_index + 1,
            tol: self.tol,
        }
    }

    /// Whether robot `i` is at the same place in `self` and `other`.
    pub fn same_robot_position(&self, other: &Configuration, i: usize) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) if a.center == b.center => a.polar[i] == b.polar[i],
            _ => self.positions[i] == other.positions[i],
        }
    }

    /// Same robots at the same places, ignoring time.
    pub fn same_positions(&self, other: &Configuration) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) if a.center == b.center => a.polar == b.polar,
            _ => self.positions == other.positions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    #[test]
    fn rejects_tiny_and_coincident() {
        assert_eq!(
            Configuration::new(vec![Point::ORIGIN]),
            Err(ConfigError::TooFewRobots(1))
        );
        let p = Point::new(1.0, 1.0);
        assert_eq!(
            Configuration::new_distinct(vec![p, Point::ORIGIN, p]),
            Err(ConfigError::Coincident(0, 2))
        );
    }

    #[test]
    fn exact_relocation_keeps_layout() {
        let polar = vec![
            Polar::new(rat(1, 1), rat(0, 1)),
            Polar::new(rat(1, 1), rat(1, 2)),
        ];
        let c = Configuration::from_polar(Point::ORIGIN, polar).unwrap();
        let target = Polar::new(rat(2, 1), rat(1, 4));
        let moved = c.relocated(&[(0, target.to_point(Point::ORIGIN), Some(target.clone()))]);
        assert_eq!(moved.polar(0), Some(&target));
        assert_eq!(moved.time_index, 1);
        let real = c.relocated(&[(0, Point::new(3.0, 3.0), None)]);
        assert!(real.exact().is_none());
        assert_eq!(real.position(0), Point::new(3.0, 3.0));
    }
}
