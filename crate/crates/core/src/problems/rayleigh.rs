use alloc::vec::Vec;

use crate::bundle::{consistent_connection, BundleKind, NewtonProblem};
use crate::geometry::{ConnectionMap, Manifold, Point, Sphere, TransportKind};
use crate::{Matrix, Result, Vector};

use super::{check_symmetric, eigen_zeros};

/// The vector field `ν(x) = P(x) A x` on `S^{n-1}`, whose zeros are the unit
/// eigenvectors of `A`.
#[derive(Clone, Debug)]
pub struct RayleighVectorField {
    a: Matrix,
    sphere: Sphere,
    transport: TransportKind,
}

pub fn rayleigh_vector_field(a: Matrix) -> Result<RayleighVectorField> {
    check_symmetric(&a)?;
    let sphere = Sphere::new(a.nrows());
    Ok(RayleighVectorField {
        a,
        sphere,
        transport: TransportKind::Projection,
    })
}

impl RayleighVectorField {
    pub fn with_transport(mut self, transport: TransportKind) -> Self {
        self.transport = transport;
        self
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
}

impl NewtonProblem for RayleighVectorField {
    fn name(&self) -> &str {
        "rayleigh_vf"
    }

    fn domain(&self) -> &dyn Manifold {
        &self.sphere
    }

    fn kind(&self) -> BundleKind {
        BundleKind::Tangent
    }

    fn transport(&self) -> TransportKind {
        self.transport
    }

    fn default_connection(&self) -> ConnectionMap {
        ConnectionMap::new(consistent_connection(BundleKind::Tangent, self.transport))
    }

    fn ambient_value(&self, x: &Vector) -> Result<Vector> {
        let ax = &self.a * x;
        let rho = x.dot(&ax);
        Ok(ax - x * rho)
    }

    fn ambient_derivative(&self, x: &Vector, dx: &Vector) -> Result<Vector> {
        let ax = &self.a * x;
        let adx = &self.a * dx;
        let rho = x.dot(&ax);
        Ok(&adx - x * (2.0 * x.dot(&adx)) - dx * rho)
    }

    fn known_zeros(&self) -> Vec<Point> {
        eigen_zeros(&self.a)
    }
}

/// The covector field `f'(x)` of `f(x) = ½ xᵀ A x` on `S^{n-1}`.
///
/// The ambient value is the Euclidean gradient `A x`; stationary points are
/// the unit eigenvectors of `A`.
#[derive(Clone, Debug)]
pub struct RayleighFunctional {
    a: Matrix,
    sphere: Sphere,
    transport: TransportKind,
}

pub fn rayleigh_functional(a: Matrix) -> Result<RayleighFunctional> {
    check_symmetric(&a)?;
    let sphere = Sphere::new(a.nrows());
    Ok(RayleighFunctional {
        a,
        sphere,
        transport: TransportKind::Retraction,
    })
}

impl RayleighFunctional {
    pub fn with_transport(mut self, transport: TransportKind) -> Self {
        self.transport = transport;
        self
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn objective(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.a * x))
    }
}

impl NewtonProblem for RayleighFunctional {
    fn name(&self) -> &str {
        "rayleigh_fn"
    }

    fn domain(&self) -> &dyn Manifold {
        &self.sphere
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
        Ok(&self.a * x)
    }

    fn ambient_derivative(&self, _x: &Vector, dx: &Vector) -> Result<Vector> {
        Ok(&self.a * dx)
    }

    fn known_zeros(&self) -> Vec<Point> {
        eigen_zeros(&self.a)
    }
}
