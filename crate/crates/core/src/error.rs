use alloc::string::String;

use crate::bundle::BundleKind;
use crate::geometry::ConnectionKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("retraction is singular at the requested step")]
    DegenerateRetraction,

    #[error("point lies outside the injectivity region of the inverse retraction")]
    OutOfInjectivityRegion,

    #[error("manifold provides no inverse retraction")]
    NoInverseRetraction,

    #[error("retraction derivative is not invertible on the tangent space")]
    SingularTransport,

    #[error("connection kind {connection:?} does not act on {bundle:?} bundles")]
    UnsupportedKind {
        connection: ConnectionKind,
        bundle: BundleKind,
    },

    #[error("problem evaluation failed: {0}")]
    EvaluationFailure(String),

    #[error("projector has numerical rank {rank}, expected {expected}")]
    RankDeficiency { rank: usize, expected: usize },

    #[error("Newton operator is singular (condition estimate {condition:e})")]
    SingularNewtonOperator { condition: f64 },

    #[error("Newton direction is zero")]
    ZeroNewtonDirection,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
