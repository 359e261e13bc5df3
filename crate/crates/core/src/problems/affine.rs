use alloc::vec;
use alloc::vec::Vec;

use crate::bundle::{BundleKind, NewtonProblem};
use crate::geometry::{ConnectionKind, ConnectionMap, Euclidean, Manifold, Point, TransportKind};
use crate::linalg::{condition_estimate, SINGULARITY_CONDITION};
use crate::{Error, Matrix, Result, Vector};

/// `F(x) = M x - b` on `R^n` with values in a fixed copy of `R^n`.
#[derive(Clone, Debug)]
pub struct AffineTrivial {
    m: Matrix,
    b: Vector,
    space: Euclidean,
}

pub fn affine_trivial(m: Matrix, b: Vector) -> Result<AffineTrivial> {
    if !m.is_square() || m.nrows() != b.len() || b.is_empty() {
        return Err(Error::InvalidConfig(alloc::format!(
            "affine needs a square M matching b, got {}x{} and {}",
            m.nrows(),
            m.ncols(),
            b.len()
        )));
    }
    if !(condition_estimate(&m) <= SINGULARITY_CONDITION) {
        return Err(Error::InvalidConfig("affine needs an invertible M".into()));
    }
    let space = Euclidean::new(b.len());
    Ok(AffineTrivial { m, b, space })
}

impl AffineTrivial {
    /// The problem `S F`, for an invertible `S` acting on the fibre.
    pub fn left_scaled(&self, s: &Matrix) -> Result<AffineTrivial> {
        affine_trivial(s * &self.m, s * &self.b)
    }

    pub fn solution(&self) -> Vector {
        self.m.clone().lu().solve(&self.b).expect("M is invertible")
    }
}

impl NewtonProblem for AffineTrivial {
    fn name(&self) -> &str {
        "affine"
    }

    fn domain(&self) -> &dyn Manifold {
        &self.space
    }

    fn kind(&self) -> BundleKind {
        BundleKind::Trivial
    }

    fn transport(&self) -> TransportKind {
        TransportKind::Projection
    }

    fn default_connection(&self) -> ConnectionMap {
        ConnectionMap::new(ConnectionKind::Tangential)
    }

    fn fibre_dim(&self) -> usize {
        self.b.len()
    }

    fn ambient_value(&self, x: &Vector) -> Result<Vector> {
        Ok(&self.m * x - &self.b)
    }

    fn ambient_derivative(&self, _x: &Vector, dx: &Vector) -> Result<Vector> {
        Ok(&self.m * dx)
    }

    fn known_zeros(&self) -> Vec<Point> {
        vec![Point::new(self.solution())]
    }
}
