use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[0, T]` with `M` subintervals and nodes `t_i = i·h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    t_end: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(t_end: f64, intervals: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid(format!("T must be positive and finite, got {t_end}")));
        }
        if intervals < 2 {
            return Err(Error::InvalidGrid(format!("need M >= 2, got {intervals}")));
        }
        Ok(Grid { t_end, intervals })
    }

    /// Grid with the given step and number of intervals, so `T = h·M`.
    pub fn with_step(h: f64, intervals: usize) -> Result<Self> {
        Grid::new(h * intervals as f64, intervals)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `M + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.intervals as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.len()).map(move |i| i as f64 * h)
    }

    /// Index of the node at `t`, if `t` sits on the grid to within 1e-9 of a step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.step();
        let i = x.round();
        if (x - i).abs() <= 1e-9 && i >= 0.0 && i <= self.intervals as f64 {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Number of steps spanned by the length `len`, if it is a grid multiple.
    pub fn steps_in(&self, len: f64) -> Option<usize> {
        let x = len / self.step();
        let i = x.round();
        ((x - i).abs() <= 1e-9 && i >= 0.0).then_some(i as usize)
    }

    pub fn same_step(&self, other: &Grid) -> bool {
        let (a, b) = (self.step(), other.step());
        (a - b).abs() <= 1e-12 * a.max(b)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.intervals == other.intervals && self.same_step(other)
    }

    /// Grid with the same step and `intervals` subintervals.
    pub fn resized(&self, intervals: usize) -> Result<Grid> {
        Grid::with_step(self.step(), intervals)
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: grids differ (T={}, M={} vs T={}, M={})",
                self.t_end, self.intervals, other.t_end, other.intervals
            )))
        }
    }

    pub(crate) fn check_step(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_step(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!("{what}: steps differ ({} vs {})", self.step(), other.step())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(1.0, 1).is_err());
        assert!(Grid::new(0.0, 8).is_err());
        assert!(Grid::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn step_times_intervals_is_length() {
        let g = Grid::new(2.0, 1024).unwrap();
        assert!((g.step() * 1024.0 - 2.0).abs() <= f64::EPSILON * 2.0);
        assert_eq!(g.index_of(1.5), Some(768));
        assert_eq!(g.index_of(1.5 + g.step() / 3.0), None);
    }
}
