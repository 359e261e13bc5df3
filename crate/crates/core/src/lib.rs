//! Newton's method for zeros of sections of vector bundles over embedded
//! manifolds.
//!
//! A problem is a map `F: X -> E` into a vector bundle `p: E -> M`. Since
//! `F(x)` lives in a fibre that moves with `x`, the Newton equation needs a
//! connection map to be well defined, and comparing residuals at different
//! iterates needs a vector back-transport. This crate provides both for
//! finite-dimensional manifolds embedded in `R^n`, together with
//!
//! - the local Newton iteration with a retraction update,
//! - the affine covariant damped Newton method that follows the Newton path
//!   and monitors contraction through simplified Newton directions,
//! - built-in tangent, cotangent and linear-space problems with known zeros,
//! - finite-difference consistency diagnostics for connection/transport pairs.
//!
//! All geometry is expressed in ambient coordinates; tangent spaces are
//! realised by orthonormal bases and every Newton system is a small dense
//! solve in reduced coordinates.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod bundle;
pub mod diagnostics;
mod error;
pub mod geometry;
pub mod linalg;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};

/// Dense column vector in ambient coordinates.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

pub use bundle::{BundleKind, FibreElement, LagrangeData, NewtonOperator, NewtonProblem};
pub use geometry::{
    ConnectionKind, ConnectionMap, Covector, Manifold, Point, TangentVector, TransportKind,
};
pub use linalg::TangentBasis;
pub use solver::{IterationRecord, SolveOutcome, SolveStatus, SolverConfig, Trial};
