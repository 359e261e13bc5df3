use alloc::vec::Vec;

use crate::bundle::{consistent_connection, BundleKind, NewtonProblem};
use crate::geometry::{ConnectionMap, Manifold, Point, Sphere, TransportKind};
use crate::{Matrix, Result, Vector};

use super::{check_symmetric, eigen_zeros};

/// `ν(x) = P(x)(A x + max(0, x - s))` on `S^{n-1}` with the componentwise
/// maximum. The Newton derivative uses the indicator of `x_i > s` as the
/// derivative of the maximum.
#[derive(Clone, Debug)]
pub struct SemismoothSphereField {
    a: Matrix,
    shift: f64,
    sphere: Sphere,
    transport: TransportKind,
}

pub fn semismooth_sphere_field(a: Matrix, shift: f64) -> Result<SemismoothSphereField> {
    check_symmetric(&a)?;
    let sphere = Sphere::new(a.nrows());
    Ok(SemismoothSphereField {
        a,
        shift,
        sphere,
        transport: TransportKind::Projection,
    })
}

impl SemismoothSphereField {
    pub fn with_transport(mut self, transport: TransportKind) -> Self {
        self.transport = transport;
        self
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn inner(&self, x: &Vector) -> Vector {
        &self.a * x + x.map(|c| (c - self.shift).max(0.0))
    }

    fn inner_derivative(&self, x: &Vector, dx: &Vector) -> Vector {
        let mut active = dx.clone();
        for (a, &c) in active.iter_mut().zip(x.iter()) {
            if c <= self.shift {
                *a = 0.0;
            }
        }
        &self.a * dx + active
    }
}

impl NewtonProblem for SemismoothSphereField {
    fn name(&self) -> &str {
        "semismooth_vf"
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
        let g = self.inner(x);
        let rho = x.dot(&g);
        Ok(g - x * rho)
    }

    fn ambient_derivative(&self, x: &Vector, dx: &Vector) -> Result<Vector> {
        let g = self.inner(x);
        let dg = self.inner_derivative(x, dx);
        let rho = x.dot(&g);
        let drho = dx.dot(&g) + x.dot(&dg);
        Ok(dg - x * drho - dx * rho)
    }

    /// Unit eigenvectors of `A` at which the field vanishes.
    fn known_zeros(&self) -> Vec<Point> {
        eigen_zeros(&self.a)
            .into_iter()
            .filter(|z| {
                self.ambient_value(z.coords())
                    .map(|v| v.norm() <= 1e-12)
                    .unwrap_or(false)
            })
            .collect()
    }
}
