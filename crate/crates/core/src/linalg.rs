//! Tangent bases and the reduced dense Newton solve.

use nalgebra::{Dyn, LU};

use crate::bundle::{FibreElement, NewtonOperator};
use crate::geometry::{check_dim, Manifold, Point, TangentVector};
use crate::{Error, Matrix, Result, Vector};

/// Reduced matrices with a condition estimate above this are treated as
/// singular.
pub const SINGULARITY_CONDITION: f64 = 1e12;
/// Reduced matrices whose smallest singular value is at or below this are
/// treated as singular whatever their condition; on unit-scale problems
/// such values are rounding noise.
pub const SINGULARITY_FLOOR: f64 = 1e-14;

/// Orthonormal basis of `T_x X`, stored as the columns of an `n × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentBasis {
    pub base: Point,
    pub columns: Matrix,
}

impl TangentBasis {
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    /// Reduced coordinates `B^T v` of an ambient vector.
    pub fn coordinates(&self, v: &Vector) -> Vector {
        self.columns.transpose() * v
    }

    pub fn embed(&self, coeffs: &Vector) -> Vector {
        &self.columns * coeffs
    }
}

/// Orthonormal basis of `T_x X` from the singular value decomposition of
/// `P(x)`, computed as its symmetric eigendecomposition.
///
/// Columns are ordered by descending singular value and each is signed so
/// that its first entry of magnitude above `1e-12` is positive.
pub fn tangent_basis(m: &dyn Manifold, x: &Point) -> Result<TangentBasis> {
    check_dim(m.ambient_dim(), x.dim())?;
    let columns = basis_from_projector(&m.projector(x.coords()), m.intrinsic_dim())?;
    Ok(TangentBasis {
        base: x.clone(),
        columns,
    })
}

pub(crate) fn basis_matrix(m: &dyn Manifold, x: &Vector) -> Result<Matrix> {
    basis_from_projector(&m.projector(x), m.intrinsic_dim())
}

/// Extracts `expected` orthonormal columns spanning the range of a projector.
pub fn basis_from_projector(p: &Matrix, expected: usize) -> Result<Matrix> {
    let n = p.nrows();
    if expected == n {
        // flat case: skip the decomposition so the basis is exactly I
        let deviation = (p - Matrix::identity(n, n)).amax();
        if deviation < 1e-14 {
            return Ok(Matrix::identity(n, n));
        }
    }
    // P is symmetric positive semidefinite, so its eigenpairs are its
    // singular pairs; nalgebra's SVD loses accuracy on block-diagonal
    // projectors with tiny entries.
    let eig = p.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let values = &eig.eigenvalues;
    let rank = values.iter().filter(|&&s| s > 0.5).count();
    if rank != expected {
        return Err(Error::RankDeficiency { rank, expected });
    }
    let mut order: alloc::vec::Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut columns = Matrix::zeros(n, expected);
    for (j, &idx) in order.iter().take(expected).enumerate() {
        let mut col = u.column(idx).into_owned();
        if let Some(first) = col.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                col = -col;
            }
        }
        columns.set_column(j, &col);
    }
    Ok(columns)
}

/// Singular values of a square matrix, read off the eigenvalues `±σ_i` of
/// the symmetric embedding `[[0, M], [Mᵀ, 0]]`.
pub fn singular_values(matrix: &Matrix) -> Vector {
    let n = matrix.nrows();
    let mut embedded = Matrix::zeros(2 * n, 2 * n);
    embedded.view_mut((0, n), (n, n)).copy_from(matrix);
    embedded
        .view_mut((n, 0), (n, n))
        .copy_from(&matrix.transpose());
    let mut values: alloc::vec::Vec<f64> = embedded
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    // each σ appears twice
    Vector::from_iterator(n, values.chunks(2).map(|pair| pair[1]))
}

/// `J⁺ = Jᵀ (J Jᵀ)⁻¹` for a Jacobian of full row rank.
pub(crate) fn right_inverse(j: &Matrix) -> Option<Matrix> {
    let gram = j * j.transpose();
    gram.lu().try_inverse().map(|g| j.transpose() * g)
}

/// Ratio of extreme singular values; infinite when the matrix is singular.
pub fn condition_estimate(matrix: &Matrix) -> f64 {
    if matrix.is_empty() {
        return 1.0;
    }
    let values = singular_values(matrix);
    let max = values.max();
    let min = values.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// A reduced Newton system `matrix · c = rhs` in basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSystem {
    pub matrix: Matrix,
    pub rhs: Vector,
    pub condition_estimate: f64,
}

/// LU factorization of a reduced Newton matrix, kept for repeated solves at
/// the same iterate.
#[derive(Clone, Debug)]
pub struct Factorization {
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
    smallest: f64,
}

impl Factorization {
    pub fn new(matrix: &Matrix) -> Self {
        let (condition, smallest) = if matrix.is_empty() {
            (1.0, f64::INFINITY)
        } else {
            let values = singular_values(matrix);
            let (max, min) = (values.max(), values.min());
            (if min > 0.0 { max / min } else { f64::INFINITY }, min)
        };
        Factorization {
            lu: matrix.clone().lu(),
            condition,
            smallest,
        }
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// True when the condition estimate exceeds [`SINGULARITY_CONDITION`] or
    /// the smallest singular value is at most [`SINGULARITY_FLOOR`].
    pub fn is_singular(&self) -> bool {
        !(self.condition <= SINGULARITY_CONDITION) || !(self.smallest > SINGULARITY_FLOOR)
    }

    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        if self.is_singular() {
            return Err(Error::SingularNewtonOperator {
                condition: self.condition,
            });
        }
        self.lu.solve(rhs).ok_or(Error::SingularNewtonOperator {
            condition: self.condition,
        })
    }
}

impl ReducedSystem {
    pub fn solve(&self) -> Result<Vector> {
        Factorization::new(&self.matrix).solve(&self.rhs)
    }
}

/// Solves `op(δx) + b = 0` for `δx ∈ T_x X`.
pub fn solve_newton_system(op: &NewtonOperator, b: &FibreElement) -> Result<TangentVector> {
    op.solve(b)
}
