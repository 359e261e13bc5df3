//! Connection maps in ambient coordinates.
//!
//! Every connection is written as `Q(δe) = Π(δe - B_x(e) δx)` where `δe` is
//! the ambient directional derivative of the section, `e` its ambient value
//! and `Π` the canonical projection onto the fibre. The bilinear term `B` is
//! the ambient surrogate of the Christoffel-type correction:
//!
//! | kind               | bundle    | `B_x(e) δx`                         |
//! |--------------------|-----------|-------------------------------------|
//! | `Tangential`       | tangent   | `0` (projection of `δe`)            |
//! | `RetractionDerived`| tangent   | `R_x''(0)(δx, e)`                   |
//! | `DualRetraction`   | cotangent | `-(e ∘ R_x''(0)(δx, ·))`            |
//! | `DualTangential`   | cotangent | `-P'(x)[δx] e`, or `-λ c''(x) δx`   |
//!
//! On trivial (linear-space) bundles every kind reduces to `Q(δe) = δe`.

use super::{Manifold, Point, TangentVector};
use crate::bundle::{BundleKind, FibreElement, LagrangeData, NewtonProblem};
use crate::linalg::basis_matrix;
use crate::{Error, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConnectionKind {
    /// Projected Euclidean derivative; the Levi-Civita connection of the
    /// embedding.
    Tangential,
    /// Derived from the retraction-based vector back-transport.
    RetractionDerived,
    /// Dual of the retraction-derived connection, on covector fields.
    DualRetraction,
    /// Dual of the tangential connection, on covector fields.
    DualTangential,
}

impl ConnectionKind {
    pub fn supports(self, bundle: BundleKind) -> bool {
        match bundle {
            BundleKind::Trivial => true,
            BundleKind::Tangent => {
                matches!(
                    self,
                    ConnectionKind::Tangential | ConnectionKind::RetractionDerived
                )
            }
            BundleKind::Cotangent => {
                matches!(
                    self,
                    ConnectionKind::DualRetraction | ConnectionKind::DualTangential
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConnectionMap {
    kind: ConnectionKind,
    forced: bool,
}

impl ConnectionMap {
    pub fn new(kind: ConnectionKind) -> Self {
        ConnectionMap {
            kind,
            forced: false,
        }
    }

    /// A connection map that is applied to any bundle kind with its own
    /// formula, skipping the compatibility check. Used to build deliberately
    /// inconsistent pairings for diagnostics.
    pub fn forced(kind: ConnectionKind) -> Self {
        ConnectionMap { kind, forced: true }
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn is_forced(&self) -> bool {
        self.forced
    }

    pub fn check_bundle(&self, bundle: BundleKind) -> Result<()> {
        if self.forced || self.kind.supports(bundle) {
            Ok(())
        } else {
            Err(Error::UnsupportedKind {
                connection: self.kind,
                bundle,
            })
        }
    }

    /// The correction term `B_x(e) δx` in ambient coordinates.
    pub fn christoffel_action(
        &self,
        m: &dyn Manifold,
        x: &Vector,
        value: &Vector,
        dx: &Vector,
        lagrange: Option<&LagrangeData>,
    ) -> Result<Vector> {
        match self.kind {
            ConnectionKind::Tangential => Ok(Vector::zeros(m.ambient_dim())),
            ConnectionKind::RetractionDerived => m.retract_second_derivative(x, dx, value),
            ConnectionKind::DualRetraction => {
                let basis = basis_matrix(m, x)?;
                let mut row = Vector::zeros(m.ambient_dim());
                for j in 0..basis.ncols() {
                    let bj = basis.column(j).into_owned();
                    let pairing = value.dot(&m.retract_second_derivative(x, dx, &bj)?);
                    row -= bj * pairing;
                }
                Ok(row)
            }
            ConnectionKind::DualTangential => match (m.constraint(), lagrange) {
                (Some(c), Some(l)) => Ok(-c.hessian_action(x, &l.multiplier, dx)),
                _ => Ok(-(m.projector_derivative(x, dx) * value)),
            },
        }
    }

    /// `Q_{F(x)}(F'(x) dx)` given the ambient value and derivative of the
    /// section at `x`.
    pub(crate) fn apply_ambient(
        &self,
        m: &dyn Manifold,
        bundle: BundleKind,
        x: &Vector,
        value: &Vector,
        dx: &Vector,
        derivative: &Vector,
        lagrange: Option<&LagrangeData>,
    ) -> Result<Vector> {
        self.check_bundle(bundle)?;
        if bundle == BundleKind::Trivial {
            return Ok(derivative.clone());
        }
        let correction = self.christoffel_action(m, x, value, dx, lagrange)?;
        Ok(m.projector(x) * (derivative - correction))
    }
}

/// Applies `Q_{F(x)} ∘ F'(x)` to `direction`, where `fibre_derivative` is
/// the ambient directional derivative of the problem's section at `x` along
/// `direction`.
pub fn connection_apply(
    q: &ConnectionMap,
    pb: &dyn NewtonProblem,
    x: &Point,
    direction: &TangentVector,
    fibre_derivative: &Vector,
) -> Result<FibreElement> {
    let kind = pb.kind();
    q.check_bundle(kind)?;
    let m = pb.domain();
    let value = pb.ambient_value(x.coords())?;
    let lagrange = crate::bundle::lagrange_data(pb, x.coords(), &value);
    let out = q.apply_ambient(
        m,
        kind,
        x.coords(),
        &value,
        &direction.vec,
        fibre_derivative,
        lagrange.as_ref(),
    )?;
    Ok(FibreElement::new(pb.base_map(x), out, kind))
}
