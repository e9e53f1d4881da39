//! Revised simplex machinery.
//!
//! [`SimplexState`] is the basis bookkeeping used by column generation, where
//! entering columns come from an external pricing oracle. [`solve_dense_lp`]
//! is a self-contained two-phase revised simplex for LPs whose columns are
//! all known up front.

mod basis;
mod dense;
mod revised;

use thiserror::Error;

pub use basis::BasisInverse;
pub use dense::{solve_dense_lp, Bound, Constraint, LinearProgram, LpSolution, Relation, Sense};
pub use revised::{ColumnDescriptor, PivotOutcome, SimplexState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not terminate within {0} iterations")]
    Cycling(usize),
    #[error("basis matrix is singular")]
    SingularBasis,
    #[error("numerical failure: {0}")]
    NumericFailure(String),
}

/// Every numerical threshold used by the simplex code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility slack; basic values above `-feasibility` count as
    /// non-negative.
    pub feasibility: f64,
    /// A column prices out when its reduced cost is below `-optimality`.
    pub optimality: f64,
    /// Smallest admissible pivot element in the ratio test.
    pub pivot: f64,
    /// Full refactorization period, in pivots.
    pub refactor_every: usize,
    /// Refactorize when `|B x_B - g|_inf` exceeds this.
    pub refactor_residual: f64,
    /// Bland's rule activates after `bland_factor * m` consecutive
    /// degenerate pivots.
    pub bland_factor: usize,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-9,
            optimality: 1e-9,
            pivot: 1e-10,
            refactor_every: 50,
            refactor_residual: 1e-8,
            bland_factor: 3,
            max_iterations: 500_000,
        }
    }
}
