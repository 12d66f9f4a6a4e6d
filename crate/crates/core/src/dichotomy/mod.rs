//! Divide-and-conquer ("dichotomy") solver for one tridiagonal matrix and
//! many right-hand sides on `p` ranks.
//!
//! Preparation ([`DichotomyPlan::build`]) is local to each rank: two rows of
//! `A⁻¹` (the `G` vectors) and the boundary responses `Z` of the leading and
//! trailing blocks. A solve then resolves the first and last unknown of one
//! rank per tree node from tree reductions of weighted `Z` sums, folds the
//! effect of the resolved rank into its neighbours, and recurses on the two
//! halves. Once every rank knows its two boundary values it finishes with a
//! local Thomas solve of its interior rows.

mod cost;
mod partition;
mod plan;
mod solve;
mod trace;

pub use cost::{predict_time_cyclic, predict_time_dichotomy};
pub use partition::Partition;
pub use plan::{DichotomyPlan, Node, RankPlan, Tree};
pub use solve::{rank_solve, solve_systems, Solution};
pub use trace::{messages_to_csv, trace_rows, trace_to_csv, Role, TraceRow};

use thiserror::Error;

use crate::comm::CommError;
use crate::tridiag::TridiagError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DichotomyError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("singular plan: boundary ratio denominator vanishes on rank {rank}")]
    SingularPlan { rank: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("plans in one batch must share a partition")]
    PlanMismatch,
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
    #[error(transparent)]
    Comm(#[from] CommError),
}
