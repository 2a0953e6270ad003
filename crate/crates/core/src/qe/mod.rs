//! Quantifier elimination to a disjunction-of-cells normal form, and the
//! boolean/geometric algebra on that form.
//!
//! A [`Qfnf`] is a finite union of [`Cell`]s over a fixed variable order.
//! Every cell is a conjunction of inequalities `u·x >= c` and congruences
//! `u·x = e (mod J)` where the modulus `J` is shared by the whole form.

mod cooper;
mod linexpr;
mod nnf;
pub(crate) mod qfnf;

pub use cooper::eliminate;
pub use linexpr::LinExpr;
pub use qfnf::{Cell, CellSpec, Congruence, LinearInequality, Qfnf};

/// Resource limits for elimination and cell algebra.
#[derive(Clone, Debug)]
pub struct QeConfig {
    /// Maximum number of cells any intermediate or final form may hold.
    pub max_cells: usize,
    /// Total budget, in bits, for coefficient magnitudes across a form.
    pub coeff_bit_budget: u64,
}

impl Default for QeConfig {
    fn default() -> Self {
        QeConfig {
            max_cells: 20_000,
            coeff_bit_budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum QeError {
    #[error("free variable '{0}' is not in the elimination variable order")]
    UnlistedFreeVariable(String),
    #[error("resource limit exceeded ({limit}) while processing {subformula}")]
    ResourceLimit { limit: String, subformula: String },
    #[error("operands have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("operands have different variable orders")]
    VariableOrderMismatch,
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("translation/border vector has wrong dimension")]
    VectorDimension,
    #[error("border direction must be nonzero")]
    ZeroVector,
    #[error("point has wrong dimension ({got} for dimension {dim})")]
    PointDimension { got: usize, dim: usize },
}
