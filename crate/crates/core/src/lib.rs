//! Symbolic and procedural subsets of `Z^d`.
//!
//! The crate models subsets of the integer lattice three ways: as first-order
//! formulas over the integers with order and addition ([`formula`]), as
//! quantifier-free disjunctions of cells produced by quantifier elimination
//! ([`qe`]), and as membership procedures or finite bit grids ([`set`],
//! [`raster`]). On top of those it counts distinct and recurrent blocks
//! ([`complexity`]) and searches for and certifies local periodicity
//! ([`periodicity`]).

pub mod complexity;
pub mod formula;
pub mod geom;
pub mod periodicity;
pub mod qe;
pub mod raster;
pub mod set;

pub use formula::{Formula, ParseError, Term, VarName};
pub use geom::Window;
pub use qe::{Cell, Qfnf, QeConfig, QeError};
pub use raster::Grid;
pub use set::PointSet;

/// Exact rational numbers, re-exported for period-search parameters.
pub use num::rational::Ratio;

/// Caps the number of worker threads used by parallel scans for the rest of
/// the process. Call at most once, before any parallel work.
pub fn set_thread_cap(threads: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}
