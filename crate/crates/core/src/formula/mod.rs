//! First-order formulas of Presburger arithmetic over `Z` with order.
//!
//! Terms are linear: sums, differences, negations, integer constants and
//! scalar multiples `c*x`. Atoms compare two terms or constrain a term to a
//! residue class. All integers are arbitrary precision.

mod ast;
mod eval;
mod parse;
mod render;

pub use ast::{CmpOp, Formula, Term, VarName};
pub use eval::EvalError;
pub use parse::ParseError;
