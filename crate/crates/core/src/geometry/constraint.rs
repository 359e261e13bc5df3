use alloc::sync::Arc;
use core::fmt;

use super::{is_zero, Manifold};
use crate::{Error, Matrix, Result, Vector};

/// Maximum Gauss–Newton iterations of the feasibility restoration.
pub const RESTORATION_MAX_ITER: usize = 20;
/// Constraint residual at which the restoration stops.
pub const RESTORATION_TOL: f64 = 1e-12;

/// A smooth constraint map `c: R^n -> R^m` with surjective derivative on the
/// zero set.
pub trait Constraint: Send + Sync + fmt::Debug {
    fn ambient_dim(&self) -> usize;

    fn codim(&self) -> usize;

    fn value(&self, x: &Vector) -> Vector;

    /// `c'(x)` as an `m × n` matrix.
    fn jacobian(&self, x: &Vector) -> Matrix;

    /// `Σ_i μ_i c_i''(x) dx`, the multiplier-weighted second derivative.
    fn hessian_action(&self, x: &Vector, multiplier: &Vector, dx: &Vector) -> Vector;
}

/// `c(x) = ‖x‖² - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereConstraint {
    pub dim: usize,
}

impl Constraint for SphereConstraint {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn codim(&self) -> usize {
        1
    }

    fn value(&self, x: &Vector) -> Vector {
        Vector::from_element(1, x.norm_squared() - 1.0)
    }

    fn jacobian(&self, x: &Vector) -> Matrix {
        Matrix::from_row_slice(1, x.len(), (x * 2.0).as_slice())
    }

    fn hessian_action(&self, _x: &Vector, multiplier: &Vector, dx: &Vector) -> Vector {
        dx * (2.0 * multiplier[0])
    }
}

/// The zero set `{x : c(x) = 0}` of a user-supplied constraint.
///
/// The retraction is Gauss–Newton feasibility restoration started at
/// `x + v`: `z ← z - c'(z)^+ c(z)`, with step halving whenever the residual
/// does not decrease.
#[derive(Clone, Debug)]
pub struct ConstraintManifold {
    constraint: Arc<dyn Constraint>,
}

impl ConstraintManifold {
    pub fn new(constraint: Arc<dyn Constraint>) -> Self {
        ConstraintManifold { constraint }
    }

    fn restore(&self, start: Vector) -> Result<Vector> {
        let c = &self.constraint;
        let mut z = start;
        for _ in 0..RESTORATION_MAX_ITER {
            let r = c.value(&z);
            let rn = r.norm();
            let step = pinv(&c.jacobian(&z)) * &r;
            if rn <= RESTORATION_TOL {
                // one undamped polishing step, kept if it does not hurt
                let trial = &z - step;
                return Ok(if c.value(&trial).norm() <= rn {
                    trial
                } else {
                    z
                });
            }
            let mut t = 1.0;
            loop {
                let trial = &z - &step * t;
                if c.value(&trial).norm() < rn {
                    z = trial;
                    break;
                }
                t *= 0.5;
                if t < 1e-10 {
                    return Err(Error::DegenerateRetraction);
                }
            }
        }
        if c.value(&z).norm() <= RESTORATION_TOL {
            Ok(z)
        } else {
            Err(Error::DegenerateRetraction)
        }
    }
}

fn pinv(j: &Matrix) -> Matrix {
    // Jacobians have full row rank on the manifold; a zero map stands in
    // for the inverse when they do not.
    crate::linalg::right_inverse(j).unwrap_or_else(|| Matrix::zeros(j.ncols(), j.nrows()))
}

impl Manifold for ConstraintManifold {
    fn ambient_dim(&self) -> usize {
        self.constraint.ambient_dim()
    }

    fn intrinsic_dim(&self) -> usize {
        self.constraint.ambient_dim() - self.constraint.codim()
    }

    fn membership_residual(&self, x: &Vector) -> f64 {
        self.constraint.value(x).norm()
    }

    fn projector(&self, x: &Vector) -> Matrix {
        let j = self.constraint.jacobian(x);
        let n = j.ncols();
        Matrix::identity(n, n) - pinv(&j) * j
    }

    fn retract(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        if is_zero(v) {
            return Ok(x.clone());
        }
        self.restore(x + v)
    }

    fn project_point(&self, x: &Vector) -> Result<Vector> {
        self.restore(x.clone())
    }

    fn constraint(&self) -> Option<&dyn Constraint> {
        Some(self.constraint.as_ref())
    }
}
