//! A uniform interface over symbolic, procedural, and explicit point sets.

mod examples;
mod fibonacci;
mod semilinear;

pub use examples::{
    checkerboard, example31, example31_strict, example32, example_by_name, example_names,
    fibonacci_set, singleton_origin, toeplitz_set,
};
pub use fibonacci::{fibonacci_word_prefix, two_sided_digit};
pub use semilinear::{LinearComponent, SemiLinearSet};

use crate::qe::qfnf::CompiledQfnf;
use crate::qe::{Qfnf, QeConfig, QeError};
use crate::raster::Grid;
use std::sync::Arc;

/// A deterministic membership procedure for a subset of `Z^d`.
///
/// Implementations must be pure: the same point always yields the same
/// answer, and concurrent invocation is safe.
pub trait MembershipOracle: Send + Sync {
    fn contains(&self, p: &[i64]) -> bool;
}

#[derive(Clone)]
enum Backing {
    Symbolic(Arc<Qfnf>),
    Oracle(Arc<dyn MembershipOracle>),
    Grid(Arc<Grid>, bool),
}

/// A subset of `Z^d` with a symbolic, procedural, or grid backing.
#[derive(Clone)]
pub struct PointSet {
    dim: usize,
    name: String,
    recurrence_radius_hint: Option<i64>,
    backing: Backing,
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PointSet({}, dim {})", self.name, self.dim)
    }
}

impl PointSet {
    pub fn symbolic(name: &str, qfnf: Qfnf) -> PointSet {
        PointSet {
            dim: qfnf.dim(),
            name: name.to_string(),
            recurrence_radius_hint: None,
            backing: Backing::Symbolic(Arc::new(qfnf)),
        }
    }

    pub fn oracle(name: &str, dim: usize, oracle: Arc<dyn MembershipOracle>) -> PointSet {
        PointSet {
            dim,
            name: name.to_string(),
            recurrence_radius_hint: None,
            backing: Backing::Oracle(oracle),
        }
    }

    /// Wraps a grid; points outside the grid's window answer `default_outside`.
    pub fn from_grid(name: &str, grid: Grid, default_outside: bool) -> PointSet {
        PointSet {
            dim: grid.dim(),
            name: name.to_string(),
            recurrence_radius_hint: None,
            backing: Backing::Grid(Arc::new(grid), default_outside),
        }
    }

    /// Sets the radius beyond which observed blocks are expected to recur.
    /// Used as a default escape radius by estimation routines.
    pub fn with_recurrence_radius_hint(mut self, hint: i64) -> PointSet {
        self.recurrence_radius_hint = Some(hint);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn recurrence_radius_hint(&self) -> Option<i64> {
        self.recurrence_radius_hint
    }

    /// The symbolic backing, when there is one.
    pub fn qfnf(&self) -> Option<&Qfnf> {
        match &self.backing {
            Backing::Symbolic(q) => Some(q),
            _ => None,
        }
    }

    /// Membership of `p`; `p` must have the set's dimension.
    pub fn membership(&self, p: &[i64]) -> bool {
        assert_eq!(p.len(), self.dim, "point dimension mismatch");
        self.evaluator().contains(p)
    }

    /// A reusable per-point evaluator (symbolic cells are compiled once).
    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator(match &self.backing {
            Backing::Symbolic(q) => EvaluatorInner::Symbolic(CompiledQfnf::new(q)),
            Backing::Oracle(o) => EvaluatorInner::Oracle(o.as_ref()),
            Backing::Grid(g, d) => EvaluatorInner::Grid(g, *d),
        })
    }

    /// The section with coordinate `axis` (1-based) fixed to `c`.
    pub fn section(&self, axis: usize, c: i64, config: &QeConfig) -> Result<PointSet, QeError> {
        if axis < 1 || axis > self.dim {
            return Err(QeError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        if self.dim < 2 {
            return Err(QeError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let name = format!("{}[{}={}]", self.name, axis_label(axis), c);
        let hint = self.recurrence_radius_hint;
        let section = match &self.backing {
            Backing::Symbolic(q) => PointSet::symbolic(&name, q.section(axis, c, config)?),
            Backing::Oracle(o) => PointSet::oracle(
                &name,
                self.dim - 1,
                Arc::new(SectionOracle {
                    inner: Arc::clone(o),
                    axis: axis - 1,
                    value: c,
                }),
            ),
            Backing::Grid(g, d) => PointSet::oracle(
                &name,
                self.dim - 1,
                Arc::new(SectionedGrid {
                    grid: Arc::clone(g),
                    default: *d,
                    axis: axis - 1,
                    value: c,
                }),
            ),
        };
        Ok(match hint {
            Some(h) => section.with_recurrence_radius_hint(h),
            None => section,
        })
    }

    /// The set shifted by `t`: membership(p) of the result equals
    /// membership(p - t) of the original.
    pub fn translated(&self, t: &[i64], config: &QeConfig) -> Result<PointSet, QeError> {
        if t.len() != self.dim {
            return Err(QeError::VectorDimension);
        }
        let name = format!("{}+{t:?}", self.name);
        Ok(match &self.backing {
            Backing::Symbolic(q) => PointSet::symbolic(&name, q.translate(t, config)?),
            Backing::Oracle(o) => PointSet::oracle(
                &name,
                self.dim,
                Arc::new(TranslatedOracle {
                    inner: Arc::clone(o),
                    shift: t.to_vec(),
                }),
            ),
            Backing::Grid(g, d) => {
                let grid = Arc::clone(g);
                let default = *d;
                let shift = t.to_vec();
                PointSet::oracle(
                    &name,
                    self.dim,
                    Arc::new(TranslatedGrid {
                        grid,
                        default,
                        shift,
                    }),
                )
            }
        })
    }
}

fn axis_label(axis: usize) -> String {
    format!("axis{axis}")
}

/// Per-point membership evaluation for any backing.
pub struct Evaluator<'a>(EvaluatorInner<'a>);

enum EvaluatorInner<'a> {
    Symbolic(CompiledQfnf),
    Oracle(&'a dyn MembershipOracle),
    Grid(&'a Grid, bool),
}

impl Evaluator<'_> {
    pub fn contains(&self, p: &[i64]) -> bool {
        match &self.0 {
            EvaluatorInner::Symbolic(q) => q.evaluate(p),
            EvaluatorInner::Oracle(o) => o.contains(p),
            EvaluatorInner::Grid(g, default) => {
                if g.contains_point(p) {
                    g.get(p)
                } else {
                    *default
                }
            }
        }
    }
}

struct SectionOracle {
    inner: Arc<dyn MembershipOracle>,
    axis: usize,
    value: i64,
}

impl MembershipOracle for SectionOracle {
    fn contains(&self, p: &[i64]) -> bool {
        let mut full = Vec::with_capacity(p.len() + 1);
        full.extend_from_slice(&p[..self.axis]);
        full.push(self.value);
        full.extend_from_slice(&p[self.axis..]);
        self.inner.contains(&full)
    }
}

struct SectionedGrid {
    grid: Arc<Grid>,
    default: bool,
    axis: usize,
    value: i64,
}

impl MembershipOracle for SectionedGrid {
    fn contains(&self, p: &[i64]) -> bool {
        let mut full = Vec::with_capacity(p.len() + 1);
        full.extend_from_slice(&p[..self.axis]);
        full.push(self.value);
        full.extend_from_slice(&p[self.axis..]);
        if self.grid.contains_point(&full) {
            self.grid.get(&full)
        } else {
            self.default
        }
    }
}

struct TranslatedOracle {
    inner: Arc<dyn MembershipOracle>,
    shift: Vec<i64>,
}

impl MembershipOracle for TranslatedOracle {
    fn contains(&self, p: &[i64]) -> bool {
        let back: Vec<i64> = p.iter().zip(&self.shift).map(|(&a, &s)| a - s).collect();
        self.inner.contains(&back)
    }
}

struct TranslatedGrid {
    grid: Arc<Grid>,
    default: bool,
    shift: Vec<i64>,
}

impl MembershipOracle for TranslatedGrid {
    fn contains(&self, p: &[i64]) -> bool {
        let back: Vec<i64> = p.iter().zip(&self.shift).map(|(&a, &s)| a - s).collect();
        if self.grid.contains_point(&back) {
            self.grid.get(&back)
        } else {
            self.default
        }
    }
}
