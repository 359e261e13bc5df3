//! Sections of vector bundles and their Newton operators.
//!
//! A [`NewtonProblem`] describes a section `F: X → E` through its ambient
//! value and ambient directional derivative. Three bundle kinds are
//! supported: the tangent bundle `TX`, the cotangent bundle `T*X` and the
//! trivial bundle `X × R^m`. For the first two the base map is the identity
//! on `X`; for the trivial bundle every fibre is the same linear space and
//! the base is a single point.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::transport::{covector_back, covector_forward, vector_back, vector_forward};
use crate::geometry::{
    ConnectionKind, ConnectionMap, Manifold, Point, TangentVector, TransportKind,
};
use crate::linalg::{basis_matrix, Factorization, ReducedSystem};
use crate::{Error, Matrix, Result, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BundleKind {
    Tangent,
    Cotangent,
    Trivial,
}

impl fmt::Display for BundleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BundleKind::Tangent => "tangent",
            BundleKind::Cotangent => "cotangent",
            BundleKind::Trivial => "trivial",
        })
    }
}

/// A value of `F` in the fibre over `base_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct FibreElement {
    pub base_y: Point,
    pub value: Vector,
    pub kind: BundleKind,
}

impl FibreElement {
    pub fn new(base_y: Point, value: Vector, kind: BundleKind) -> Self {
        FibreElement {
            base_y,
            value,
            kind,
        }
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.value.iter().all(|&c| c == 0.0)
    }
}

/// A section `F: X → E` together with the geometry used to solve `F(x) = 0`.
///
/// Implementors supply the ambient value `F_H(x)` and a (possibly
/// generalised) directional derivative. For cotangent problems the ambient
/// value is the Euclidean gradient row `ℓ_H(x)`; its normal component is
/// removed by [`evaluate`].
pub trait NewtonProblem: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn domain(&self) -> &dyn Manifold;

    fn kind(&self) -> BundleKind;

    /// Back-transport used for fibre comparisons.
    fn transport(&self) -> TransportKind;

    /// The connection map consistent with [`NewtonProblem::transport`].
    fn default_connection(&self) -> ConnectionMap;

    /// Dimension of the fibre. Must equal the intrinsic dimension of the
    /// domain for the Newton operator to be square.
    fn fibre_dim(&self) -> usize {
        self.domain().intrinsic_dim()
    }

    /// `y(x) = p(F(x))`.
    fn base_map(&self, x: &Point) -> Point {
        match self.kind() {
            BundleKind::Trivial => Point::new(Vector::zeros(0)),
            _ => x.clone(),
        }
    }

    /// `F_H(x)` in ambient coordinates.
    fn ambient_value(&self, x: &Vector) -> Result<Vector>;

    /// `F_H'(x) dx` in ambient coordinates; any Newton derivative is allowed.
    fn ambient_derivative(&self, x: &Vector, dx: &Vector) -> Result<Vector>;

    /// Known zeros of `F`, used as oracles and for start presets.
    fn known_zeros(&self) -> Vec<Point> {
        Vec::new()
    }
}

/// Lagrange multiplier of a cotangent problem on a constraint manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangeData {
    pub multiplier: Vector,
}

impl LagrangeData {
    /// Normal part of `f_H'(x) + λ c'(x)`, which the multiplier annihilates.
    pub fn stationarity_residual(&self, m: &dyn Manifold, x: &Vector, gradient: &Vector) -> f64 {
        let Some(c) = m.constraint() else {
            return 0.0;
        };
        let full = gradient + c.jacobian(x).transpose() * &self.multiplier;
        let n = m.ambient_dim();
        let normal = (Matrix::identity(n, n) - m.projector(x)) * full;
        normal.norm()
    }
}

/// Least-squares multiplier `λ = -(J J^T)^{-1} J ℓ_H` for cotangent problems
/// on constraint manifolds; `None` otherwise.
pub fn lagrange_data(
    pb: &dyn NewtonProblem,
    x: &Vector,
    gradient: &Vector,
) -> Option<LagrangeData> {
    if pb.kind() != BundleKind::Cotangent {
        return None;
    }
    let c = pb.domain().constraint()?;
    let j = c.jacobian(x);
    let pinv = crate::linalg::right_inverse(&j)?.transpose();
    Some(LagrangeData {
        multiplier: -(pinv * gradient),
    })
}

/// `F(x)` as an element of the fibre over `y(x)`.
pub fn evaluate(pb: &dyn NewtonProblem, x: &Point) -> Result<FibreElement> {
    let m = pb.domain();
    crate::geometry::check_dim(m.ambient_dim(), x.dim())?;
    let raw = pb.ambient_value(x.coords())?;
    let value = canonical_value(pb, x.coords(), raw)?;
    Ok(FibreElement::new(pb.base_map(x), value, pb.kind()))
}

pub(crate) fn canonical_value(pb: &dyn NewtonProblem, x: &Vector, raw: Vector) -> Result<Vector> {
    match pb.kind() {
        BundleKind::Trivial => {
            crate::geometry::check_dim(pb.fibre_dim(), raw.len())?;
            Ok(raw)
        }
        _ => {
            let m = pb.domain();
            crate::geometry::check_dim(m.ambient_dim(), raw.len())?;
            Ok(m.projector(x) * raw)
        }
    }
}

/// `‖F(x)‖` in the ambient norm of the fibre.
pub fn residual_norm(pb: &dyn NewtonProblem, x: &Point) -> Result<f64> {
    evaluate(pb, x).map(|f| f.norm())
}

/// `V_{y}^{-1}(y') e'`: carries a fibre element into the fibre over `y`.
pub fn back_transport_fibre(
    pb: &dyn NewtonProblem,
    y: &Point,
    e: &FibreElement,
) -> Result<FibreElement> {
    let value = match pb.kind() {
        BundleKind::Trivial => e.value.clone(),
        BundleKind::Tangent => vector_back(
            pb.domain(),
            pb.transport(),
            y.coords(),
            e.base_y.coords(),
            &e.value,
        )?,
        BundleKind::Cotangent => covector_back(
            pb.domain(),
            pb.transport(),
            y.coords(),
            e.base_y.coords(),
            &e.value,
        )?,
    };
    Ok(FibreElement::new(y.clone(), value, e.kind))
}

/// `V_{y}(y') e`: carries a fibre element over `y` into the fibre over `y'`;
/// inverse of [`back_transport_fibre`].
pub fn forward_transport_fibre(
    pb: &dyn NewtonProblem,
    e: &FibreElement,
    target: &Point,
) -> Result<FibreElement> {
    let value = match pb.kind() {
        BundleKind::Trivial => e.value.clone(),
        BundleKind::Tangent => vector_forward(
            pb.domain(),
            pb.transport(),
            e.base_y.coords(),
            target.coords(),
            &e.value,
        )?,
        BundleKind::Cotangent => covector_forward(
            pb.domain(),
            pb.transport(),
            e.base_y.coords(),
            target.coords(),
            &e.value,
        )?,
    };
    Ok(FibreElement::new(target.clone(), value, e.kind))
}

/// `Q_{F(x)} ∘ F'(x): T_x X → E_{y(x)}` as a dense matrix between
/// orthonormal bases, with its factorization.
#[derive(Clone, Debug)]
pub struct NewtonOperator {
    pub x: Point,
    pub base_y: Point,
    pub kind: BundleKind,
    /// Orthonormal basis of `T_x X`, `n × d`.
    pub basis: Matrix,
    /// Orthonormal basis of the fibre `E_{y(x)}`.
    pub fibre_basis: Matrix,
    /// `fibre_basis^T · Q F'(x) · basis`.
    pub matrix: Matrix,
    factorization: Factorization,
}

impl NewtonOperator {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn condition(&self) -> f64 {
        self.factorization.condition()
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    /// Action on an ambient tangent vector at `x`.
    pub fn apply(&self, v: &Vector) -> Vector {
        &self.fibre_basis * (&self.matrix * (self.basis.transpose() * v))
    }

    pub fn reduced_system(&self, b: &FibreElement) -> ReducedSystem {
        ReducedSystem {
            matrix: self.matrix.clone(),
            rhs: -(self.fibre_basis.transpose() * &b.value),
            condition_estimate: self.condition(),
        }
    }

    /// Solves `op(δx) + b = 0` with the stored factorization.
    pub fn solve(&self, b: &FibreElement) -> Result<TangentVector> {
        crate::geometry::check_dim(self.fibre_basis.nrows(), b.value.len())?;
        let rhs = -(self.fibre_basis.transpose() * &b.value);
        let coeffs = self.factorization.solve(&rhs)?;
        Ok(TangentVector::new(self.x.clone(), &self.basis * coeffs))
    }
}

/// Assembles the Newton operator of `pb` at `x` under the connection `q`.
pub fn newton_operator(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x: &Point,
) -> Result<NewtonOperator> {
    let kind = pb.kind();
    q.check_bundle(kind)?;
    let m = pb.domain();
    crate::geometry::check_dim(m.ambient_dim(), x.dim())?;
    let basis = basis_matrix(m, x.coords())?;
    let d = basis.ncols();
    let fibre_basis = match kind {
        BundleKind::Trivial => {
            let f = pb.fibre_dim();
            if f != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: f,
                });
            }
            Matrix::identity(f, f)
        }
        _ => basis.clone(),
    };
    let value = pb.ambient_value(x.coords())?;
    let lagrange = lagrange_data(pb, x.coords(), &value);
    let mut matrix = Matrix::zeros(fibre_basis.ncols(), d);
    for j in 0..d {
        let dx = basis.column(j).into_owned();
        let derivative = pb.ambient_derivative(x.coords(), &dx)?;
        let image = q.apply_ambient(
            m,
            kind,
            x.coords(),
            &value,
            &dx,
            &derivative,
            lagrange.as_ref(),
        )?;
        matrix.set_column(j, &(fibre_basis.transpose() * image));
    }
    let factorization = Factorization::new(&matrix);
    Ok(NewtonOperator {
        x: x.clone(),
        base_y: pb.base_map(x),
        kind,
        basis,
        fibre_basis,
        matrix,
        factorization,
    })
}

/// Connection kind that is consistent with `transport` for `bundle`.
pub fn consistent_connection(bundle: BundleKind, transport: TransportKind) -> ConnectionKind {
    match (bundle, transport) {
        (BundleKind::Cotangent, TransportKind::Projection) => ConnectionKind::DualTangential,
        (BundleKind::Cotangent, TransportKind::Retraction) => ConnectionKind::DualRetraction,
        (_, TransportKind::Projection) => ConnectionKind::Tangential,
        (_, TransportKind::Retraction) => ConnectionKind::RetractionDerived,
    }
}
