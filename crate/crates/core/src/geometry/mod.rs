//! Embedded-manifold primitives.
//!
//! Points, tangent vectors and covectors are all stored in ambient
//! coordinates of `R^n`. A [`Manifold`] supplies membership, the orthogonal
//! tangent projector `P(x)`, a retraction and (optionally) its inverse; the
//! transports and connection maps in the submodules are built from those.

mod connection;
mod constraint;
mod euclidean;
pub(crate) mod fd;
mod product;
mod sphere;
pub(crate) mod transport;

use core::fmt;

pub use connection::{connection_apply, ConnectionKind, ConnectionMap};
pub use constraint::{Constraint, ConstraintManifold, SphereConstraint};
pub use euclidean::Euclidean;
pub use product::ProductManifold;
pub use sphere::Sphere;
pub use transport::{
    back_transport_covector, back_transport_tangent, forward_transport_covector,
    forward_transport_tangent, TransportKind,
};

use crate::{Error, Matrix, Result, Vector};

/// Absolute tolerance for manifold membership on unit-scale problems.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Absolute tolerance for tangency of vectors and canonical covectors.
pub const TANGENCY_TOL: f64 = 1e-10;

/// A finite-dimensional submanifold of `R^n`.
///
/// Only the membership residual, projector and retraction are mandatory.
/// Derivatives of the projector and of the retraction fall back to finite
/// differences when a manifold has no closed form.
pub trait Manifold: Send + Sync + fmt::Debug {
    fn ambient_dim(&self) -> usize;

    fn intrinsic_dim(&self) -> usize;

    fn membership_tol(&self) -> f64 {
        MEMBERSHIP_TOL
    }

    /// Constraint violation at `x`; zero on the manifold.
    fn membership_residual(&self, x: &Vector) -> f64;

    /// Orthogonal projector onto `T_x X`.
    fn projector(&self, x: &Vector) -> Matrix;

    /// Directional derivative `P'(x)[dx]`.
    fn projector_derivative(&self, x: &Vector, dx: &Vector) -> Matrix {
        let scale = dx.norm();
        if scale == 0.0 {
            let n = self.ambient_dim();
            return Matrix::zeros(n, n);
        }
        let u = dx / scale;
        let h = 1e-5 * (1.0 + x.norm());
        let plus = self.projector(&(x + &u * h));
        let minus = self.projector(&(x - &u * h));
        (plus - minus) * (scale / (2.0 * h))
    }

    /// `R_x(v)` for `v` tangent at `x`.
    fn retract(&self, x: &Vector, v: &Vector) -> Result<Vector>;

    /// `R_x^{-1}(z)`, when the manifold provides one.
    fn inverse_retract(&self, _x: &Vector, _z: &Vector) -> Result<Vector> {
        Err(Error::NoInverseRetraction)
    }

    /// `R_x'(v) w`, the differential of the retraction at `v` applied to `w`.
    fn retract_differential(&self, x: &Vector, v: &Vector, w: &Vector) -> Result<Vector> {
        let scale = w.norm();
        if scale == 0.0 {
            return Ok(Vector::zeros(self.ambient_dim()));
        }
        let u = w / scale;
        let d = fd::derivative(1e-3, |t| self.retract(x, &(v + &u * t)))?;
        Ok(d * scale)
    }

    /// `R_x''(0_x)(a, b)`, the symmetric second derivative of the retraction
    /// at the origin of `T_x X`.
    fn retract_second_derivative(&self, x: &Vector, a: &Vector, b: &Vector) -> Result<Vector> {
        // polarisation: 4 R''(a, b) = R''(a + b, a + b) - R''(a - b, a - b)
        let sum = a + b;
        let diff = a - b;
        let along = |dir: &Vector| -> Result<Vector> {
            let scale = dir.norm();
            if scale == 0.0 {
                return Ok(Vector::zeros(self.ambient_dim()));
            }
            let u = dir / scale;
            let d2 = fd::second_derivative(1e-3, |t| self.retract(x, &(&u * t)))?;
            Ok(d2 * (scale * scale))
        };
        Ok((along(&sum)? - along(&diff)?) * 0.25)
    }

    /// Nearest-point style map from ambient space back onto the manifold,
    /// used to sanitise user-supplied starting points.
    fn project_point(&self, x: &Vector) -> Result<Vector>;

    /// Constraint data for manifolds of the form `{c(x) = 0}`.
    fn constraint(&self) -> Option<&dyn Constraint> {
        None
    }
}

/// A point of a manifold, in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vector);

impl Point {
    pub fn new(coords: Vector) -> Self {
        Point(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Point(Vector::from_column_slice(coords))
    }

    /// Builds a point and checks membership against `m`.
    pub fn on(m: &dyn Manifold, coords: Vector) -> Result<Self> {
        check_dim(m.ambient_dim(), coords.len())?;
        let residual = m.membership_residual(&coords);
        if !(residual <= m.membership_tol()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "point is off the manifold (membership residual {residual:e})"
            )));
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &Vector {
        &self.0
    }

    pub fn into_coords(self) -> Vector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A tangent vector `v ∈ T_x X` stored with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub vec: Vector,
}

impl TangentVector {
    pub fn new(base: Point, vec: Vector) -> Self {
        TangentVector { base, vec }
    }

    pub fn zero(base: Point) -> Self {
        let n = base.dim();
        TangentVector {
            base,
            vec: Vector::zeros(n),
        }
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            base: self.base.clone(),
            vec: &self.vec * s,
        }
    }
}

/// A covector `ℓ ∈ T*_x X`, acting by Euclidean pairing. The stored row has
/// no normal component.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector {
    pub base: Point,
    pub row: Vector,
}

impl Covector {
    /// Canonicalises an ambient row by removing its normal component.
    pub fn canonical(m: &dyn Manifold, base: Point, row: &Vector) -> Result<Self> {
        check_dim(m.ambient_dim(), row.len())?;
        let row = m.projector(base.coords()) * row;
        Ok(Covector { base, row })
    }

    pub fn pair(&self, v: &TangentVector) -> f64 {
        self.row.dot(&v.vec)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `P(x) v` as a tangent vector at `x`.
pub fn project_tangent(m: &dyn Manifold, x: &Point, v: &Vector) -> Result<TangentVector> {
    check_dim(m.ambient_dim(), x.dim())?;
    check_dim(m.ambient_dim(), v.len())?;
    let vec = m.projector(x.coords()) * v;
    Ok(TangentVector {
        base: x.clone(),
        vec,
    })
}

pub fn retract(m: &dyn Manifold, v: &TangentVector) -> Result<Point> {
    check_dim(m.ambient_dim(), v.base.dim())?;
    check_dim(m.ambient_dim(), v.vec.len())?;
    m.retract(v.base.coords(), &v.vec).map(Point)
}

pub fn inverse_retract(m: &dyn Manifold, x: &Point, z: &Point) -> Result<TangentVector> {
    check_dim(m.ambient_dim(), x.dim())?;
    check_dim(m.ambient_dim(), z.dim())?;
    if x == z {
        return Ok(TangentVector::zero(x.clone()));
    }
    let vec = m.inverse_retract(x.coords(), z.coords())?;
    Ok(TangentVector {
        base: x.clone(),
        vec,
    })
}

/// True when every entry is exactly zero. Retractions return `x` itself in
/// that case so that `R_x(0) = x` holds bit for bit.
pub(crate) fn is_zero(v: &Vector) -> bool {
    v.iter().all(|&c| c == 0.0)
}
