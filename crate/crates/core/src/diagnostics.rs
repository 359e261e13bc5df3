//! Finite-difference checks of connection/transport consistency and of the
//! geometric axioms, evaluated at a single point.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bundle::{back_transport_fibre, evaluate, newton_operator, BundleKind, NewtonProblem};
use crate::geometry::{fd, ConnectionMap, Manifold, Point, TangentVector};
use crate::linalg::basis_matrix;
use crate::{Error, Matrix, Result, Vector};

/// Step of the central difference in the consistency check.
pub const CONSISTENCY_STEP: f64 = 1e-5;
/// Largest accepted deviation in the consistency check.
pub const CONSISTENCY_TOL: f64 = 1e-5;
/// Largest accepted relative deviation `‖δx^λ - λ δx‖ / ‖λ δx‖`.
pub const TANGENCY_TOL: f64 = 1e-10;
/// Coarse step of the extrapolated stencil that assembles the path operator.
pub const TANGENCY_STEP: f64 = 4e-3;
/// Largest accepted error of the retraction derivative at the origin.
pub const RETRACTION_FD_TOL: f64 = 1e-6;
/// Largest accepted defect of the projector laws.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        CheckReport {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    fn failed(name: &'static str, tolerance: f64) -> Self {
        CheckReport {
            name,
            value: f64::INFINITY,
            tolerance,
            passed: false,
        }
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "{verdict} {}: {:.3e} (tolerance {:.0e})",
            self.name, self.value, self.tolerance
        )
    }
}

/// `t ↦ V_{y(x)}^{-1}(y(γ(t))) F(γ(t))` with `γ(t) = R_x(t v)`.
fn transported_section<'a>(
    pb: &'a dyn NewtonProblem,
    x: &'a Point,
    v: &'a Vector,
) -> impl FnMut(f64) -> Result<Vector> + 'a {
    let y = pb.base_map(x);
    move |t| {
        let xt = Point::new(pb.domain().retract(x.coords(), &(v * t))?);
        let f = evaluate(pb, &xt)?;
        Ok(back_transport_fibre(pb, &y, &f)?.value)
    }
}

/// `‖d/dt V^{-1} F(γ(t))|_{t=0} - Q_{F(x)} F'(x) v‖` with a central difference
/// of step `h`.
pub fn connection_consistency(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x: &Point,
    v: &TangentVector,
    h: f64,
) -> Result<f64> {
    let fd = fd::central(h, transported_section(pb, x, &v.vec))?;
    let op = newton_operator(pb, q, x)?;
    Ok((fd - op.apply(&v.vec)).norm())
}

/// The derivative of the back-transported section at `x`, assembled on the
/// tangent basis with an extrapolated fourth-order stencil, in reduced coordinates.
pub fn transported_operator(pb: &dyn NewtonProblem, x: &Point) -> Result<(Matrix, Matrix, Matrix)> {
    let m = pb.domain();
    let basis = basis_matrix(m, x.coords())?;
    let fibre_basis = match pb.kind() {
        BundleKind::Trivial => Matrix::identity(pb.fibre_dim(), pb.fibre_dim()),
        _ => basis.clone(),
    };
    let mut reduced = Matrix::zeros(fibre_basis.ncols(), basis.ncols());
    for j in 0..basis.ncols() {
        let v = basis.column(j).into_owned();
        let col = fd::extrapolated_derivative(TANGENCY_STEP, transported_section(pb, x, &v))?;
        reduced.set_column(j, &(fibre_basis.transpose() * col));
    }
    Ok((reduced, basis, fibre_basis))
}

/// Relative deviation between the first Newton direction of the Newton path
/// problem at damping `lambda` and `lambda` times the Newton direction of
/// `q`.
pub fn tangency_deviation(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x: &Point,
    lambda: f64,
) -> Result<f64> {
    let f = evaluate(pb, x)?;
    let op = newton_operator(pb, q, x)?;
    let damped = op.solve(&f)?.vec * lambda;
    let scale = damped.norm();
    if scale == 0.0 {
        return Err(Error::ZeroNewtonDirection);
    }
    let (reduced, basis, fibre_basis) = transported_operator(pb, x)?;
    let rhs = -(fibre_basis.transpose() * &f.value) * lambda;
    let coeffs = reduced
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularNewtonOperator {
            condition: f64::INFINITY,
        })?;
    Ok(((basis * coeffs) - damped).norm() / scale)
}

/// `R_x(0) = x` (as 0 or ∞) and the error of the fourth-order difference of
/// `t ↦ R_x(t v)` at 0 against `v`, relative to `‖v‖`.
pub fn retraction_axioms(m: &dyn Manifold, x: &Vector, v: &Vector) -> Result<(f64, f64)> {
    let zero = Vector::zeros(x.len());
    let identity = if &m.retract(x, &zero)? == x {
        0.0
    } else {
        f64::INFINITY
    };
    let d = fd::derivative(1e-3, |t| m.retract(x, &(v * t)))?;
    let scale = v.norm().max(f64::MIN_POSITIVE);
    Ok((identity, (d - v).norm() / scale))
}

/// Defects of `P² = P`, `Pᵀ = P` and `trace P = intrinsic_dim`.
pub fn projector_laws(m: &dyn Manifold, x: &Vector) -> (f64, f64, f64) {
    let p = m.projector(x);
    let idempotence = (&p * &p - &p).amax();
    let symmetry = (&p - p.transpose()).amax();
    let rank = (p.trace() - m.intrinsic_dim() as f64).abs();
    (idempotence, symmetry, rank)
}

/// Runs every check at `x` along the tangent basis directions, plus the
/// tangency check at `λ = 1/2` when `F(x) ≠ 0`.
pub fn run_all(pb: &dyn NewtonProblem, q: &ConnectionMap, x: &Point) -> Vec<CheckReport> {
    let m = pb.domain();
    let mut out = Vec::new();

    let (idem, sym, rank) = projector_laws(m, x.coords());
    out.push(CheckReport::new(
        "projector idempotence",
        idem,
        PROJECTOR_TOL,
    ));
    out.push(CheckReport::new("projector symmetry", sym, PROJECTOR_TOL));
    out.push(CheckReport::new("projector rank", rank, PROJECTOR_TOL));

    let basis = match basis_matrix(m, x.coords()) {
        Ok(b) => b,
        Err(_) => {
            out.push(CheckReport::failed("tangent basis", 0.0));
            return out;
        }
    };
    let directions: Vec<Vector> = (0..basis.ncols())
        .map(|j| basis.column(j).into_owned())
        .collect();

    let mut identity: f64 = 0.0;
    let mut derivative: f64 = 0.0;
    let mut axioms_ok = true;
    for v in &directions {
        match retraction_axioms(m, x.coords(), v) {
            Ok((i, d)) => {
                identity = identity.max(i);
                derivative = derivative.max(d);
            }
            Err(_) => axioms_ok = false,
        }
    }
    if axioms_ok {
        out.push(CheckReport::new("retraction at zero", identity, 0.0));
        out.push(CheckReport::new(
            "retraction derivative",
            derivative,
            RETRACTION_FD_TOL,
        ));
    } else {
        out.push(CheckReport::failed("retraction axioms", RETRACTION_FD_TOL));
    }

    let coherence = evaluate(pb, x).map(|f| {
        let y = pb.base_map(x);
        if f.base_y.dim() != y.dim() {
            f64::INFINITY
        } else {
            (f.base_y.coords() - y.coords()).amax()
        }
    });
    match coherence {
        Ok(c) => out.push(CheckReport::new("base coherence", c, m.membership_tol())),
        Err(_) => out.push(CheckReport::failed("base coherence", m.membership_tol())),
    }

    let mut consistency: f64 = 0.0;
    let mut consistency_ok = true;
    for v in &directions {
        let tv = TangentVector::new(x.clone(), v.clone());
        match connection_consistency(pb, q, x, &tv, CONSISTENCY_STEP) {
            Ok(d) => consistency = consistency.max(d),
            Err(_) => consistency_ok = false,
        }
    }
    if consistency_ok {
        out.push(CheckReport::new(
            "connection consistency",
            consistency,
            CONSISTENCY_TOL,
        ));
    } else {
        out.push(CheckReport::failed(
            "connection consistency",
            CONSISTENCY_TOL,
        ));
    }

    match tangency_deviation(pb, q, x, 0.5) {
        Ok(d) => out.push(CheckReport::new("tangency", d, TANGENCY_TOL)),
        Err(Error::ZeroNewtonDirection) => {}
        Err(_) => out.push(CheckReport::failed("tangency", TANGENCY_TOL)),
    }
    out
}
