use super::Manifold;
use crate::{Matrix, Result, Vector};

/// The flat manifold `R^n` with `R_x(v) = x + v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Self {
        Euclidean { dim }
    }
}

impl Manifold for Euclidean {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn intrinsic_dim(&self) -> usize {
        self.dim
    }

    fn membership_residual(&self, _x: &Vector) -> f64 {
        0.0
    }

    fn projector(&self, _x: &Vector) -> Matrix {
        Matrix::identity(self.dim, self.dim)
    }

    fn projector_derivative(&self, _x: &Vector, _dx: &Vector) -> Matrix {
        Matrix::zeros(self.dim, self.dim)
    }

    fn retract(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        Ok(x + v)
    }

    fn inverse_retract(&self, x: &Vector, z: &Vector) -> Result<Vector> {
        Ok(z - x)
    }

    fn retract_differential(&self, _x: &Vector, _v: &Vector, w: &Vector) -> Result<Vector> {
        Ok(w.clone())
    }

    fn retract_second_derivative(&self, _x: &Vector, _a: &Vector, _b: &Vector) -> Result<Vector> {
        Ok(Vector::zeros(self.dim))
    }

    fn project_point(&self, x: &Vector) -> Result<Vector> {
        Ok(x.clone())
    }
}
