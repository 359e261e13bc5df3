//! Built-in problems with known zeros, and a registry keyed by name.

mod affine;
mod closest;
mod rayleigh;
mod semismooth;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

pub use affine::{affine_trivial, AffineTrivial};
pub use closest::{closest_point_constrained, ClosestPoint};
pub use rayleigh::{
    rayleigh_functional, rayleigh_vector_field, RayleighFunctional, RayleighVectorField,
};
pub use semismooth::{semismooth_sphere_field, SemismoothSphereField};

use crate::bundle::{BundleKind, NewtonProblem};
use crate::geometry::{Point, TransportKind};
use crate::{Error, Matrix, Result, Vector};

/// Registry entry describing a built-in problem family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemInfo {
    pub name: &'static str,
    pub kind: BundleKind,
    /// Accepted parameters and their defaults.
    pub parameters: &'static str,
    pub summary: &'static str,
}

pub const REGISTRY: &[ProblemInfo] = &[
    ProblemInfo {
        name: "rayleigh_vf",
        kind: BundleKind::Tangent,
        parameters: "A: symmetric n x n (default diag:3,2,1)",
        summary: "vector field P(x)Ax on the unit sphere; zeros are unit eigenvectors",
    },
    ProblemInfo {
        name: "rayleigh_fn",
        kind: BundleKind::Cotangent,
        parameters: "A: symmetric n x n (default diag:3,2,1)",
        summary: "derivative of f(x) = x'Ax/2 on the unit sphere; retraction transport",
    },
    ProblemInfo {
        name: "closest_point",
        kind: BundleKind::Cotangent,
        parameters: "b: nonzero n-vector (default 2,0,0)",
        summary: "nearest point to b on {|x|^2 = 1} in Lagrange-Newton form",
    },
    ProblemInfo {
        name: "affine",
        kind: BundleKind::Trivial,
        parameters: "M: invertible n x n (default 4,1,0;1,3,1;0,1,2), b: n-vector (default 1,2,3)",
        summary: "F(x) = Mx - b on R^n",
    },
    ProblemInfo {
        name: "semismooth_vf",
        kind: BundleKind::Tangent,
        parameters: "A: symmetric n x n (default diag:3,2,1), shift: real (default 0.5)",
        summary: "P(x)(Ax + max(0, x - shift)) on the unit sphere with a Newton derivative",
    },
];

/// Registry entries whose name contains `filter`, in registry order.
pub fn list(filter: &str) -> Vec<&'static ProblemInfo> {
    REGISTRY
        .iter()
        .filter(|p| p.name.contains(filter))
        .collect()
}

/// Problem data; unset fields take the registry defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemParams {
    pub a: Option<Matrix>,
    pub b: Option<Vector>,
    pub m: Option<Matrix>,
    pub shift: Option<f64>,
    pub transport: Option<TransportKind>,
}

pub fn default_symmetric() -> Matrix {
    Matrix::from_diagonal(&Vector::from_column_slice(&[3.0, 2.0, 1.0]))
}

/// Builds a registered problem by name.
pub fn build(name: &str, params: &ProblemParams) -> Result<Box<dyn NewtonProblem>> {
    let a = || params.a.clone().unwrap_or_else(default_symmetric);
    let problem: Box<dyn NewtonProblem> = match name {
        "rayleigh_vf" => {
            let mut pb = rayleigh_vector_field(a())?;
            if let Some(t) = params.transport {
                pb = pb.with_transport(t);
            }
            Box::new(pb)
        }
        "rayleigh_fn" => {
            let mut pb = rayleigh_functional(a())?;
            if let Some(t) = params.transport {
                pb = pb.with_transport(t);
            }
            Box::new(pb)
        }
        "closest_point" => {
            let b = params
                .b
                .clone()
                .unwrap_or_else(|| Vector::from_column_slice(&[2.0, 0.0, 0.0]));
            let mut pb = closest_point_constrained(b)?;
            if let Some(t) = params.transport {
                pb = pb.with_transport(t);
            }
            Box::new(pb)
        }
        "affine" => {
            let m = params.m.clone().unwrap_or_else(|| {
                Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0])
            });
            let b = params
                .b
                .clone()
                .unwrap_or_else(|| Vector::from_column_slice(&[1.0, 2.0, 3.0]));
            Box::new(affine_trivial(m, b)?)
        }
        "semismooth_vf" => {
            let mut pb = semismooth_sphere_field(a(), params.shift.unwrap_or(0.5))?;
            if let Some(t) = params.transport {
                pb = pb.with_transport(t);
            }
            Box::new(pb)
        }
        other => return Err(Error::InvalidConfig(format!("unknown problem '{other}'"))),
    };
    Ok(problem)
}

pub(crate) fn check_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() || a.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "A must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.amax().max(1.0);
    if (a - a.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidConfig("A must be symmetric".into()));
    }
    Ok(())
}

/// `±v` for each unit eigenvector `v` of a symmetric matrix, ordered by
/// descending eigenvalue, each `v` signed so its first nonzero entry is
/// positive.
pub fn eigen_zeros(a: &Matrix) -> Vec<Point> {
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut zeros = Vec::with_capacity(2 * order.len());
    for i in order {
        let mut v = eig.eigenvectors.column(i).into_owned();
        v /= v.norm();
        if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                v = -v;
            }
        }
        zeros.push(Point::new(v.clone()));
        zeros.push(Point::new(-v));
    }
    zeros
}
