//! Exact verification and classification of multidimensional Poisson
//! brackets of hydrodynamic type
//!
//! ```text
//! {u^i(x), u^j(y)} = g^{ijα}(u) ∂_α δ(x − y) + b^{ijα}_k(u) u^k_α δ(x − y)
//! ```
//!
//! All coefficient data are [`Expr`] values, exact rational functions of the
//! field coordinates, and every verdict is an identity test rather than a
//! numerical comparison. The [`oracle`] module holds the floating-point
//! cross-checks.

pub mod bracket;
pub mod classify;
pub mod compat;
pub mod geometry;
pub mod liealg;
pub mod oracle;
pub mod tensor;

pub use bracket::{HydroBracket, ObstructionSet, RelationReport, Verdict, Violation};
pub use classify::{ClassificationVerdict, CoordinateChange, VerdictKind};
pub use compat::{MetricPair, PencilAnalysis};
pub use geometry::Metric;
pub use liealg::{CocycleReport, LinearBracketData};
pub use symexpr::{Expr, Rational};
pub use tensor::{Range, Slot, Tensor, Variance};

use symexpr::ExprError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("slot {slot} does not exist on a rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slots {a} and {b} cannot be combined: {reason}")]
    SlotMismatch { a: usize, b: usize, reason: &'static str },
    #[error("tensor shapes do not match")]
    ShapeMismatch,
    #[error("matrix is not square")]
    NotSquare,
    #[error("{}", degenerate_message(*.direction))]
    DegenerateMetric { direction: Option<usize> },
    #[error("metric in direction {} is not flat", .direction + 1)]
    NonFlatMetric { direction: usize },
    #[error("not a Poisson bracket: {0}")]
    NotAPoissonBracket(String),
    #[error("coordinate change has identically vanishing Jacobian determinant")]
    NonInvertibleChange,
    #[error("pencil λ1·g1 + λ2·g2 is identically degenerate")]
    DegeneratePencil,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn degenerate_message(direction: Option<usize>) -> String {
    match direction {
        Some(a) => format!("metric in direction {} is degenerate (det ≡ 0)", a + 1),
        None => "metric is degenerate (det ≡ 0)".to_string(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Formats a zero-based index tuple in the usual compact notation: one-based
/// digits run together, e.g. `[0, 0, 1]` becomes `"112"`.
pub fn index_label(indices: &[usize]) -> String {
    indices.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(if indices.iter().any(|&i| i >= 9) {
        ","
    } else {
        ""
    })
}
