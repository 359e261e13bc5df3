use super::{is_zero, Manifold};
use crate::{Error, Matrix, Result, Vector};

/// Smallest `⟨x, z⟩` for which the inverse retraction is considered well
/// conditioned.
pub const SPHERE_INJECTIVITY_MIN_COSINE: f64 = 0.1;

/// The unit sphere `S^{n-1} ⊂ R^n` with the metric-projection retraction
/// `R_x(v) = (x + v) / ‖x + v‖`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sphere {
    ambient: usize,
}

impl Sphere {
    /// Sphere in `R^ambient_dim`. Panics when `ambient_dim == 0`.
    pub fn new(ambient_dim: usize) -> Self {
        assert!(ambient_dim > 0, "sphere needs a non-empty ambient space");
        Sphere {
            ambient: ambient_dim,
        }
    }
}

impl Manifold for Sphere {
    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn intrinsic_dim(&self) -> usize {
        self.ambient - 1
    }

    fn membership_residual(&self, x: &Vector) -> f64 {
        (x.norm_squared() - 1.0).abs()
    }

    fn projector(&self, x: &Vector) -> Matrix {
        Matrix::identity(self.ambient, self.ambient) - x * x.transpose()
    }

    fn projector_derivative(&self, x: &Vector, dx: &Vector) -> Matrix {
        -(dx * x.transpose() + x * dx.transpose())
    }

    fn retract(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        if is_zero(v) {
            return Ok(x.clone());
        }
        let y = x + v;
        let n = y.norm();
        if !(n > 1e-14) {
            return Err(Error::DegenerateRetraction);
        }
        Ok(y / n)
    }

    fn inverse_retract(&self, x: &Vector, z: &Vector) -> Result<Vector> {
        let c = x.dot(z);
        if !(c > SPHERE_INJECTIVITY_MIN_COSINE) {
            return Err(Error::OutOfInjectivityRegion);
        }
        Ok(z / c - x)
    }

    fn retract_differential(&self, x: &Vector, v: &Vector, w: &Vector) -> Result<Vector> {
        let y = x + v;
        let s = y.norm();
        if !(s > 1e-14) {
            return Err(Error::DegenerateRetraction);
        }
        let u = y / s;
        Ok((w - &u * u.dot(w)) / s)
    }

    fn retract_second_derivative(&self, x: &Vector, a: &Vector, b: &Vector) -> Result<Vector> {
        // R_x(v) = (x + v) g(v) with g(v) = ‖x + v‖^{-1}
        let s = x.norm();
        let s3 = s * s * s;
        let xa = x.dot(a);
        let xb = x.dot(b);
        let g_a = -xa / s3;
        let g_b = -xb / s3;
        let g_ab = -a.dot(b) / s3 + 3.0 * xa * xb / (s3 * s * s);
        Ok(a * g_b + b * g_a + x * g_ab)
    }

    fn project_point(&self, x: &Vector) -> Result<Vector> {
        let n = x.norm();
        if !(n > 1e-14) {
            return Err(Error::DegenerateRetraction);
        }
        Ok(x / n)
    }
}
