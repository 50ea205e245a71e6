//! Floating-point SDP feasibility, exact/float LP, and symmetric eigenvalues.

mod linalg;
pub mod lp;
pub mod sdp;

use thiserror::Error;

pub use linalg::{min_eigenpair, min_eigenvalue, min_eigenvalue_blocks};
pub use lp::{lp_feasible, strict_positive_direction, LpProblem, LpRow, LpSolution, Relation};
pub use sdp::{sdp_feasible, sdp_minimize, SdpConstraint, SdpEntry, SdpOptimum, SdpOptions, SdpProblem, SdpResult, SdpStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("constraint {constraint}: entry ({row}, {col}) outside block {block}")]
    BadEntry { constraint: usize, block: usize, row: usize, col: usize },
    #[error("constraint {constraint}: right-hand side is not finite")]
    NonFinite { constraint: usize },
    #[error("block side {side} exceeds the limit {limit}")]
    TooLarge { side: usize, limit: usize },
    #[error("objective has {got} blocks, problem has {expected}")]
    BlockMismatch { expected: usize, got: usize },
}
