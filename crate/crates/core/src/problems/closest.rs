use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bundle::{consistent_connection, BundleKind, NewtonProblem};
use crate::geometry::{
    ConnectionMap, ConstraintManifold, Manifold, Point, SphereConstraint, TransportKind,
};
use crate::{Error, Result, Vector};

/// `min ½‖x - b‖²` subject to `‖x‖² = 1`, posed as the covector field
/// `f'` on the constraint manifold `{c(x) = ‖x‖² - 1 = 0}`.
///
/// With the default projection transport the Newton operator is the
/// Lagrange-Newton form `P(x)(f_H''(x) + λ(x) c''(x))` on `T_x X`.
#[derive(Clone, Debug)]
pub struct ClosestPoint {
    b: Vector,
    manifold: ConstraintManifold,
    transport: TransportKind,
}

pub fn closest_point_constrained(b: Vector) -> Result<ClosestPoint> {
    let n = b.len();
    if n == 0 || b.norm() == 0.0 {
        return Err(Error::InvalidConfig(
            "closest_point needs a nonzero target b".into(),
        ));
    }
    let manifold = ConstraintManifold::new(Arc::new(SphereConstraint { dim: n }));
    Ok(ClosestPoint {
        b,
        manifold,
        transport: TransportKind::Projection,
    })
}

impl ClosestPoint {
    pub fn with_transport(mut self, transport: TransportKind) -> Self {
        self.transport = transport;
        self
    }

    pub fn target(&self) -> &Vector {
        &self.b
    }

    /// `b / ‖b‖`, the nearest point of the sphere.
    pub fn nearest(&self) -> Point {
        Point::new(&self.b / self.b.norm())
    }

    /// Multiplier at a stationary point `x`: `½(⟨b, x⟩ - 1)`.
    pub fn multiplier_at_zero(&self, x: &Vector) -> f64 {
        0.5 * (self.b.dot(x) - 1.0)
    }
}

impl NewtonProblem for ClosestPoint {
    fn name(&self) -> &str {
        "closest_point"
    }

    fn domain(&self) -> &dyn Manifold {
        &self.manifold
    }

    fn kind(&self) -> BundleKind {
        BundleKind::Cotangent
    }

    fn transport(&self) -> TransportKind {
        self.transport
    }

    fn default_connection(&self) -> ConnectionMap {
        ConnectionMap::new(consistent_connection(BundleKind::Cotangent, self.transport))
    }

    fn ambient_value(&self, x: &Vector) -> Result<Vector> {
        Ok(x - &self.b)
    }

    fn ambient_derivative(&self, _x: &Vector, dx: &Vector) -> Result<Vector> {
        Ok(dx.clone())
    }

    fn known_zeros(&self) -> Vec<Point> {
        let near = self.nearest();
        let far = Point::new(-near.coords());
        vec![near, far]
    }
}
