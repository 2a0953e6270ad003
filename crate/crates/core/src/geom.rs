//! Windows and small vector helpers shared by the grid and scanning modules.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Sup norm: `max_i |x_i|`. The norm used for neighborhoods and period bounds.
pub fn sup_norm(p: &[i64]) -> i64 {
    p.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// An axis-aligned box of lattice points with per-axis inclusive bounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    bounds: Vec<(i64, i64)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("axis {axis}: lower bound {lo} exceeds upper bound {hi}")]
    EmptyAxis { axis: usize, lo: i64, hi: i64 },
    #[error("window must have at least one axis")]
    ZeroDim,
}

impl Window {
    /// Builds a window from inclusive `(lo, hi)` bounds, one pair per axis.
    pub fn new(bounds: Vec<(i64, i64)>) -> Result<Self, WindowError> {
        if bounds.is_empty() {
            return Err(WindowError::ZeroDim);
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if lo > hi {
                return Err(WindowError::EmptyAxis {
                    axis: i + 1,
                    lo,
                    hi,
                });
            }
        }
        Ok(Window { bounds })
    }

    /// The symmetric cube `[-r, r]^d`.
    pub fn cube(dim: usize, radius: i64) -> Self {
        assert!(dim > 0 && radius >= 0);
        Window {
            bounds: vec![(-radius, radius); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(i64, i64)] {
        &self.bounds
    }

    pub fn lo(&self, axis: usize) -> i64 {
        self.bounds[axis].0
    }

    pub fn hi(&self, axis: usize) -> i64 {
        self.bounds[axis].1
    }

    /// Extent (number of points) along each axis.
    pub fn extents(&self) -> Vec<usize> {
        self.bounds
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as usize)
            .collect()
    }

    /// Total number of lattice points, saturating on overflow.
    pub fn point_count(&self) -> u128 {
        self.bounds
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1) as u128)
            .product()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(&c, &(lo, hi))| lo <= c && c <= hi)
    }

    /// Largest sup norm attained by any point of the window.
    pub fn max_norm(&self) -> i64 {
        self.bounds
            .iter()
            .map(|&(lo, hi)| lo.abs().max(hi.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Grows every bound away from zero by `pad`.
    pub fn padded(&self, pad: i64) -> Window {
        Window {
            bounds: self
                .bounds
                .iter()
                .map(|&(lo, hi)| (lo - pad, hi + pad))
                .collect(),
        }
    }

    /// Shrinks every bound toward zero by `pad`; `None` if an axis empties.
    pub fn shrunk(&self, pad: i64) -> Option<Window> {
        let bounds: Vec<(i64, i64)> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| (lo + pad, hi - pad))
            .collect();
        if bounds.iter().any(|&(lo, hi)| lo > hi) {
            None
        } else {
            Some(Window { bounds })
        }
    }

    /// Doubles the bounds of the selected axes (both endpoints scale by 2).
    pub fn doubled(&self, grow: &[bool]) -> Window {
        Window {
            bounds: self
                .bounds
                .iter()
                .zip(grow)
                .map(|(&(lo, hi), &g)| if g { (lo * 2, hi * 2) } else { (lo, hi) })
                .collect(),
        }
    }

    /// Iterates all points in lexicographic order (first axis slowest).
    pub fn points(&self) -> PointIter {
        PointIter {
            window: self.clone(),
            next: Some(self.bounds.iter().map(|&(lo, _)| lo).collect()),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| format!("{lo}..{hi}"))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Lexicographic point iterator over a window.
pub struct PointIter {
    window: Window,
    next: Option<Vec<i64>>,
}

impl Iterator for PointIter {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for axis in (0..succ.len()).rev() {
            if succ[axis] < self.window.hi(axis) {
                succ[axis] += 1;
                self.next = Some(succ);
                return Some(current);
            }
            succ[axis] = self.window.lo(axis);
        }
        // wrapped around on every axis: done
        Some(current)
    }
}
