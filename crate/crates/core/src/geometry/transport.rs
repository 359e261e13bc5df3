//! Vector and covector transports between tangent spaces.
//!
//! Two families are provided:
//!
//! - `Projection`: `V_x(ξ) = P(ξ) E(x)` forward and `V_x^{-1}(ξ) = P(x) E(ξ)`
//!   backward,
//! - `Retraction`: `V_x(ξ) = R_x'(R_x^{-1}(ξ))` forward and its inverse on
//!   the tangent spaces backward.
//!
//! Covector transports are pointwise adjoints: the covector back-transport is
//! the adjoint of the vector forward transport and vice versa.

use super::{check_dim, Covector, Manifold, Point, TangentVector};
use crate::linalg::basis_matrix;
use crate::{Error, Matrix, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransportKind {
    Projection,
    Retraction,
}

/// The retraction differential at `v = R_x^{-1}(ξ)` expressed between
/// orthonormal bases of `T_x X` and `T_ξ X`.
struct RetractionFrame {
    basis_x: Matrix,
    basis_xi: Matrix,
    /// `B_ξ^T R_x'(v) B_x`
    reduced: Matrix,
}

impl RetractionFrame {
    fn new(m: &dyn Manifold, x: &Vector, xi: &Vector) -> Result<Self> {
        let v = m.inverse_retract(x, xi)?;
        let basis_x = basis_matrix(m, x)?;
        let basis_xi = basis_matrix(m, xi)?;
        let d = basis_x.ncols();
        let mut image = Matrix::zeros(m.ambient_dim(), d);
        for j in 0..d {
            let col = m.retract_differential(x, &v, &basis_x.column(j).into_owned())?;
            image.set_column(j, &col);
        }
        let reduced = basis_xi.transpose() * image;
        Ok(RetractionFrame {
            basis_x,
            basis_xi,
            reduced,
        })
    }

    fn solve(&self, rhs: &Vector) -> Result<Vector> {
        let lu = self.reduced.clone().lu();
        lu.solve(rhs).ok_or(Error::SingularTransport)
    }

    fn solve_transpose(&self, rhs: &Vector) -> Result<Vector> {
        let lu = self.reduced.transpose().lu();
        lu.solve(rhs).ok_or(Error::SingularTransport)
    }
}

pub(crate) fn vector_back(
    m: &dyn Manifold,
    kind: TransportKind,
    x: &Vector,
    xi: &Vector,
    w: &Vector,
) -> Result<Vector> {
    if x == xi {
        return Ok(w.clone());
    }
    match kind {
        TransportKind::Projection => Ok(m.projector(x) * w),
        TransportKind::Retraction => {
            let frame = RetractionFrame::new(m, x, xi)?;
            let coeffs = frame.solve(&(frame.basis_xi.transpose() * w))?;
            Ok(frame.basis_x * coeffs)
        }
    }
}

pub(crate) fn vector_forward(
    m: &dyn Manifold,
    kind: TransportKind,
    x: &Vector,
    xi: &Vector,
    v: &Vector,
) -> Result<Vector> {
    if x == xi {
        return Ok(v.clone());
    }
    match kind {
        TransportKind::Projection => Ok(m.projector(xi) * v),
        TransportKind::Retraction => {
            let step = m.inverse_retract(x, xi)?;
            let tangent = m.projector(x) * v;
            m.retract_differential(x, &step, &tangent)
        }
    }
}

pub(crate) fn covector_back(
    m: &dyn Manifold,
    kind: TransportKind,
    x: &Vector,
    xi: &Vector,
    row: &Vector,
) -> Result<Vector> {
    if x == xi {
        return Ok(row.clone());
    }
    match kind {
        TransportKind::Projection => Ok(m.projector(x) * (m.projector(xi) * row)),
        TransportKind::Retraction => {
            let frame = RetractionFrame::new(m, x, xi)?;
            let coeffs = frame.reduced.transpose() * (frame.basis_xi.transpose() * row);
            Ok(frame.basis_x * coeffs)
        }
    }
}

pub(crate) fn covector_forward(
    m: &dyn Manifold,
    kind: TransportKind,
    x: &Vector,
    xi: &Vector,
    row: &Vector,
) -> Result<Vector> {
    if x == xi {
        return Ok(row.clone());
    }
    match kind {
        TransportKind::Projection => Ok(m.projector(xi) * (m.projector(x) * row)),
        TransportKind::Retraction => {
            let frame = RetractionFrame::new(m, x, xi)?;
            let coeffs = frame.solve_transpose(&(frame.basis_x.transpose() * row))?;
            Ok(frame.basis_xi * coeffs)
        }
    }
}

/// `V_x^{-1}(ξ) w`: carries `w ∈ T_ξ X` into `T_x X`.
pub fn back_transport_tangent(
    m: &dyn Manifold,
    kind: TransportKind,
    x: &Point,
    w: &TangentVector,
) -> Result<TangentVector> {
    check_dim(m.ambient_dim(), x.dim())?;
    check_dim(m.ambient_dim(), w.vec.len())?;
    let vec = vector_back(m, kind, x.coords(), w.base.coords(), &w.vec)?;
    Ok(TangentVector::new(x.clone(), vec))
}

/// `V_x(ξ) v`: carries `v ∈ T_x X` into `T_ξ X`.
pub fn forward_transport_tangent(
    m: &dyn Manifold,
    kind: TransportKind,
    v: &TangentVector,
    xi: &Point,
) -> Result<TangentVector> {
    check_dim(m.ambient_dim(), xi.dim())?;
    check_dim(m.ambient_dim(), v.vec.len())?;
    let vec = vector_forward(m, kind, v.base.coords(), xi.coords(), &v.vec)?;
    Ok(TangentVector::new(xi.clone(), vec))
}

/// `V*_x(ξ) ℓ = ℓ ∘ V_x(ξ)`: carries `ℓ ∈ T*_ξ X` into `T*_x X`.
pub fn back_transport_covector(
    m: &dyn Manifold,
    kind: TransportKind,
    x: &Point,
    l: &Covector,
) -> Result<Covector> {
    check_dim(m.ambient_dim(), x.dim())?;
    check_dim(m.ambient_dim(), l.row.len())?;
    let row = covector_back(m, kind, x.coords(), l.base.coords(), &l.row)?;
    Ok(Covector {
        base: x.clone(),
        row,
    })
}

/// `ℓ ∘ V_x^{-1}(ξ)`: carries `ℓ ∈ T*_x X` into `T*_ξ X`.
pub fn forward_transport_covector(
    m: &dyn Manifold,
    kind: TransportKind,
    l: &Covector,
    xi: &Point,
) -> Result<Covector> {
    check_dim(m.ambient_dim(), xi.dim())?;
    check_dim(m.ambient_dim(), l.row.len())?;
    let row = covector_forward(m, kind, l.base.coords(), xi.coords(), &l.row)?;
    Ok(Covector {
        base: xi.clone(),
        row,
    })
}
