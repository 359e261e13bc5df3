use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{is_zero, Manifold};
use crate::{Matrix, Result, Vector};

/// Cartesian product `X_1 × … × X_k`, acting blockwise on stacked ambient
/// coordinates.
#[derive(Clone, Debug)]
pub struct ProductManifold {
    factors: Vec<Arc<dyn Manifold>>,
    offsets: Vec<usize>,
    ambient: usize,
}

impl ProductManifold {
    pub fn new(factors: Vec<Arc<dyn Manifold>>) -> Self {
        let mut offsets = Vec::with_capacity(factors.len());
        let mut ambient = 0;
        for f in &factors {
            offsets.push(ambient);
            ambient += f.ambient_dim();
        }
        ProductManifold {
            factors,
            offsets,
            ambient,
        }
    }

    /// Product of spheres with the given ambient dimensions, e.g. `[2, 2]`
    /// for the torus `S^1 × S^1 ⊂ R^4`.
    pub fn spheres(ambient_dims: &[usize]) -> Self {
        let factors = ambient_dims
            .iter()
            .map(|&n| Arc::new(super::Sphere::new(n)) as Arc<dyn Manifold>)
            .collect();
        Self::new(factors)
    }

    pub fn factors(&self) -> &[Arc<dyn Manifold>] {
        &self.factors
    }

    fn block<'a>(&self, i: usize, v: &'a Vector) -> nalgebra::DVectorView<'a, f64> {
        v.rows(self.offsets[i], self.factors[i].ambient_dim())
    }

    fn stack<F>(&self, mut per_factor: F) -> Result<Vector>
    where
        F: FnMut(usize, &dyn Manifold) -> Result<Vector>,
    {
        let mut out = Vector::zeros(self.ambient);
        for (i, f) in self.factors.iter().enumerate() {
            let part = per_factor(i, f.as_ref())?;
            out.rows_mut(self.offsets[i], f.ambient_dim())
                .copy_from(&part);
        }
        Ok(out)
    }

    fn block_diag<F>(&self, mut per_factor: F) -> Matrix
    where
        F: FnMut(usize, &dyn Manifold) -> Matrix,
    {
        let mut out = Matrix::zeros(self.ambient, self.ambient);
        for (i, f) in self.factors.iter().enumerate() {
            let n = f.ambient_dim();
            let o = self.offsets[i];
            out.view_mut((o, o), (n, n))
                .copy_from(&per_factor(i, f.as_ref()));
        }
        out
    }
}

impl Manifold for ProductManifold {
    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn intrinsic_dim(&self) -> usize {
        self.factors.iter().map(|f| f.intrinsic_dim()).sum()
    }

    fn membership_residual(&self, x: &Vector) -> f64 {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| f.membership_residual(&self.block(i, x).into_owned()))
            .fold(0.0, f64::max)
    }

    fn projector(&self, x: &Vector) -> Matrix {
        self.block_diag(|i, f| f.projector(&self.block(i, x).into_owned()))
    }

    fn projector_derivative(&self, x: &Vector, dx: &Vector) -> Matrix {
        self.block_diag(|i, f| {
            f.projector_derivative(
                &self.block(i, x).into_owned(),
                &self.block(i, dx).into_owned(),
            )
        })
    }

    fn retract(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        if is_zero(v) {
            return Ok(x.clone());
        }
        self.stack(|i, f| {
            f.retract(
                &self.block(i, x).into_owned(),
                &self.block(i, v).into_owned(),
            )
        })
    }

    fn inverse_retract(&self, x: &Vector, z: &Vector) -> Result<Vector> {
        self.stack(|i, f| {
            let xi = self.block(i, x).into_owned();
            let zi = self.block(i, z).into_owned();
            if xi == zi {
                Ok(Vector::zeros(xi.len()))
            } else {
                f.inverse_retract(&xi, &zi)
            }
        })
    }

    fn retract_differential(&self, x: &Vector, v: &Vector, w: &Vector) -> Result<Vector> {
        self.stack(|i, f| {
            f.retract_differential(
                &self.block(i, x).into_owned(),
                &self.block(i, v).into_owned(),
                &self.block(i, w).into_owned(),
            )
        })
    }

    fn retract_second_derivative(&self, x: &Vector, a: &Vector, b: &Vector) -> Result<Vector> {
        self.stack(|i, f| {
            f.retract_second_derivative(
                &self.block(i, x).into_owned(),
                &self.block(i, a).into_owned(),
                &self.block(i, b).into_owned(),
            )
        })
    }

    fn project_point(&self, x: &Vector) -> Result<Vector> {
        self.stack(|i, f| f.project_point(&self.block(i, x).into_owned()))
    }
}
