//! The Newton path and its differential form.

use alloc::vec::Vec;

use crate::bundle::{
    back_transport_fibre, evaluate, newton_operator, BundleKind, FibreElement, NewtonProblem,
};
use crate::geometry::{is_zero, ConnectionMap, Point};
use crate::linalg::basis_matrix;
use crate::{Error, Matrix, Result, Vector};

/// `‖V_{y(x0)}^{-1}(y(x)) F(x) - (1-λ) F(x0)‖`, which vanishes exactly when
/// `x` lies on the Newton path from `x0` at parameter `lambda`.
pub fn newton_path_residual(
    pb: &dyn NewtonProblem,
    x0: &Point,
    x: &Point,
    lambda: f64,
) -> Result<f64> {
    let f0 = evaluate(pb, x0)?;
    let fx = evaluate(pb, x)?;
    let moved = back_transport_fibre(pb, &f0.base_y, &fx)?;
    Ok((moved.value - f0.value * (1.0 - lambda)).norm())
}

/// Integrates the differential Newton path `Q_{F(x)} ∘ F'(x) x' + F(x) = 0`
/// from `x0` with `steps` classical Runge-Kutta steps, and returns the
/// `steps + 1` points of the discrete trajectory.
///
/// The trajectory is parametrised by `λ ∈ [0, 1]` with `F(x(λ)) = (1-λ) e(λ)`,
/// where `e` starts at `F(x0)` and is parallel along the path for the
/// connection `q`. The integrated system is
///
/// ```text
/// Q_{F(x)} ∘ F'(x) x' = -e,    e' = P(x) B_x(e) x' + P'(x)[x'] e,
/// ```
///
/// which is regular up to `λ = 1`, where `x(1)` is a zero of `F`. Each step
/// works in the retraction chart `v ↦ R_{x_k}(v)`: stage velocities are
/// pulled back through `R_{x_k}'(v)^{-1}` and the step ends with
/// `x_{k+1} = R_{x_k}(v)`.
pub fn integrate_differential_newton_path(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x0: &Point,
    steps: usize,
) -> Result<Vec<Point>> {
    if steps == 0 {
        return Err(Error::InvalidConfig(
            "the path integrator needs at least one step".into(),
        ));
    }
    q.check_bundle(pb.kind())?;
    let m = pb.domain();
    let kind = pb.kind();
    let rhs = |xi: &Point, e: &Vector| -> Result<(Vector, Vector)> {
        let op = newton_operator(pb, q, xi)?;
        let target = FibreElement::new(pb.base_map(xi), e.clone(), kind);
        let velocity = op.solve(&target)?.vec;
        let de = match kind {
            BundleKind::Trivial => Vector::zeros(e.len()),
            _ => {
                let b = q.christoffel_action(m, xi.coords(), e, &velocity, None)?;
                m.projector(xi.coords()) * b + m.projector_derivative(xi.coords(), &velocity) * e
            }
        };
        Ok((velocity, de))
    };
    let h = 1.0 / steps as f64;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(x0.clone());
    let mut x = x0.clone();
    let mut e = evaluate(pb, x0)?.value;
    for _ in 0..steps {
        let stage = |v: &Vector, e: &Vector| -> Result<(Vector, Vector)> {
            if is_zero(v) {
                return rhs(&x, e);
            }
            let xi = Point::new(m.retract(x.coords(), v)?);
            let (velocity, de) = rhs(&xi, e)?;
            Ok((pull_back(pb, x.coords(), v, xi.coords(), &velocity)?, de))
        };
        let zero = Vector::zeros(x.dim());
        let (k1, l1) = stage(&zero, &e)?;
        let (k2, l2) = stage(&(&k1 * (0.5 * h)), &(&e + &l1 * (0.5 * h)))?;
        let (k3, l3) = stage(&(&k2 * (0.5 * h)), &(&e + &l2 * (0.5 * h)))?;
        let (k4, l4) = stage(&(&k3 * h), &(&e + &l3 * h))?;
        let v = (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        let next_e = &e + (l1 + (l2 + l3) * 2.0 + l4) * (h / 6.0);
        x = Point::new(m.retract(x.coords(), &v)?);
        e = match kind {
            BundleKind::Trivial => next_e,
            _ => m.projector(x.coords()) * next_e,
        };
        points.push(x.clone());
    }
    Ok(points)
}

/// `R_x'(v)^{-1} w` for `w ∈ T_ξ X`, `ξ = R_x(v)`.
fn pull_back(
    pb: &dyn NewtonProblem,
    x: &Vector,
    v: &Vector,
    xi: &Vector,
    w: &Vector,
) -> Result<Vector> {
    let m = pb.domain();
    let basis_x = basis_matrix(m, x)?;
    let basis_xi = basis_matrix(m, xi)?;
    let d = basis_x.ncols();
    let mut reduced = Matrix::zeros(basis_xi.ncols(), d);
    for j in 0..d {
        let image = m.retract_differential(x, v, &basis_x.column(j).into_owned())?;
        reduced.set_column(j, &(basis_xi.transpose() * image));
    }
    let coeffs = reduced
        .lu()
        .solve(&(basis_xi.transpose() * w))
        .ok_or(Error::SingularTransport)?;
    Ok(basis_x * coeffs)
}
