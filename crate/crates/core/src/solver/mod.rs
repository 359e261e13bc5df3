//! Local and affine covariant damped Newton iterations.

mod path;

use alloc::format;
use alloc::vec::Vec;
use num_traits::Float;

use crate::bundle::{
    back_transport_fibre, evaluate, newton_operator, FibreElement, NewtonOperator, NewtonProblem,
};
use crate::geometry::{retract, ConnectionMap, Point, TangentVector};
use crate::{Error, Result};

pub use path::{integrate_differential_newton_path, newton_path_residual};

/// Parameters of the damped iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Desired contraction `Θ_des`.
    pub theta_des: f64,
    /// Largest accepted contraction `Θ_acc`.
    pub theta_acc: f64,
    pub lambda_fail: f64,
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub initial_lambda: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta_des: 0.5,
            theta_acc: 0.55,
            lambda_fail: 1e-8,
            tol: 1e-10,
            max_outer: 100,
            max_inner: 30,
            initial_lambda: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(self.theta_des > 0.0 && self.theta_des < 1.0) {
            return fail(format!(
                "theta_des must lie in (0, 1), got {}",
                self.theta_des
            ));
        }
        if !(self.theta_acc > self.theta_des) {
            return fail(format!(
                "theta_acc ({}) must be greater than theta_des ({})",
                self.theta_acc, self.theta_des
            ));
        }
        if !(self.lambda_fail > 0.0 && self.lambda_fail < 1.0) {
            return fail(format!(
                "lambda_fail must lie in (0, 1), got {}",
                self.lambda_fail
            ));
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_outer == 0 {
            return fail("max_outer must be at least 1".into());
        }
        if self.max_inner == 0 {
            return fail("max_inner must be at least 1".into());
        }
        if !(self.initial_lambda > 0.0 && self.initial_lambda <= 1.0) {
            return fail(format!(
                "initial_lambda must lie in (0, 1], got {}",
                self.initial_lambda
            ));
        }
        Ok(())
    }

    /// Upper bound on the inner trials needed to push `λ` from
    /// `initial_lambda` below `lambda_fail` when every trial is rejected.
    pub fn inner_trial_bound(&self) -> usize {
        let ratio = Float::ln(self.lambda_fail / self.initial_lambda)
            / Float::ln(self.theta_des / self.theta_acc);
        ratio.ceil().max(1.0) as usize
    }
}

/// One damping trial of the inner loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    pub lambda: f64,
    pub theta: f64,
    /// `min(1, λ Θ_des / θ)`.
    pub next_lambda: f64,
    pub accepted: bool,
}

/// Trace entry of one outer iteration, describing the step taken from
/// `x_snapshot`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Damping factor of the step taken (the last trial).
    pub lambda: f64,
    /// `‖δx‖` of the full Newton direction.
    pub newton_norm: f64,
    pub theta: f64,
    /// `‖F(x_k)‖`.
    pub residual: f64,
    pub inner_trials: usize,
    pub x_snapshot: Point,
    pub trials: Vec<Trial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    /// `λ` dropped below `λ_fail` or the inner loop ran out of trials.
    NewtonFailed,
    SingularOperator,
    MaxIterations,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::NewtonFailed => "NewtonFailed",
            SolveStatus::SingularOperator => "SingularOperator",
            SolveStatus::MaxIterations => "MaxIterations",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub final_point: Point,
    pub trace: Vec<IterationRecord>,
    /// Number of steps actually taken.
    pub iterations: usize,
}

/// Solves the Newton equation `Q_{F(x)} ∘ F'(x) δx + F(x) = 0` at `x`.
pub fn newton_direction(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x: &Point,
) -> Result<TangentVector> {
    let f = evaluate(pb, x)?;
    newton_operator(pb, q, x)?.solve(&f)
}

/// The simplified Newton direction of the Newton path problem at damping
/// `lambda`: solves `op(δx̄) + V_{y}^{-1}(y₊) F(x₊) - (1-λ) F(x) = 0` with the
/// factorization stored in `op`.
pub fn simplified_newton_direction(
    pb: &dyn NewtonProblem,
    op: &NewtonOperator,
    f_x: &FibreElement,
    x_plus: &Point,
    lambda: f64,
) -> Result<TangentVector> {
    let f_plus = evaluate(pb, x_plus)?;
    let moved = back_transport_fibre(pb, &op.base_y, &f_plus)?;
    let rhs = FibreElement::new(
        op.base_y.clone(),
        moved.value - &f_x.value * (1.0 - lambda),
        f_x.kind,
    );
    op.solve(&rhs)
}

/// `θ = ‖δx̄‖ / ‖λ δx‖`.
pub fn theta_estimate(dx: &TangentVector, simplified: &TangentVector, lambda: f64) -> Result<f64> {
    let norm = dx.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNewtonDirection);
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "damping factor must be positive, got {lambda}"
        )));
    }
    Ok(simplified.norm() / (lambda * norm))
}

fn trial_theta(
    pb: &dyn NewtonProblem,
    op: &NewtonOperator,
    f_x: &FibreElement,
    dx: &TangentVector,
    lambda: f64,
) -> Option<(f64, Point)> {
    let x_plus = retract(pb.domain(), &dx.scaled(lambda)).ok()?;
    let bar = simplified_newton_direction(pb, op, f_x, &x_plus, lambda).ok()?;
    let theta = theta_estimate(dx, &bar, lambda).ok()?;
    theta.is_finite().then_some((theta, x_plus))
}

/// Directions at or below this multiple of `ε (1 + ‖x‖)` are rounding noise.
const ROUNDING_FLOOR: f64 = 16.0 * f64::EPSILON;

/// True when `δx` is zero, or within `tol` and at rounding level, so that
/// `θ` would be a quotient of noise.
fn negligible(dx: &TangentVector, x: &Point, tol: f64) -> bool {
    let norm = dx.norm();
    norm == 0.0 || (norm <= tol && norm <= ROUNDING_FLOOR * (1.0 + x.coords().norm()))
}

fn check_start(pb: &dyn NewtonProblem, x0: &Point) -> Result<()> {
    Point::on(pb.domain(), x0.coords().clone()).map(|_| ())
}

fn outcome(
    status: SolveStatus,
    final_point: Point,
    trace: Vec<IterationRecord>,
    iterations: usize,
) -> Result<SolveOutcome> {
    Ok(SolveOutcome {
        status,
        final_point,
        trace,
        iterations,
    })
}

/// Full-step Newton iteration `x_{k+1} = R_{x_k}(δx_k)`, stopped once
/// `‖δx_k‖ ≤ tol`.
///
/// Each record also carries the contraction estimate `θ` of the full step,
/// infinite when it cannot be evaluated.
pub fn local_newton(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x0: &Point,
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutcome> {
    check_start(pb, x0)?;
    let mut x = x0.clone();
    let mut trace = Vec::new();
    for k in 0..max_iter {
        let f = evaluate(pb, &x)?;
        let op = newton_operator(pb, q, &x)?;
        let dx = match op.solve(&f) {
            Ok(dx) => dx,
            Err(Error::SingularNewtonOperator { .. }) => {
                return outcome(SolveStatus::SingularOperator, x, trace, k);
            }
            Err(e) => return Err(e),
        };
        let norm = dx.norm();
        if negligible(&dx, &x, tol) {
            trace.push(zero_record(k, &x, norm, f.norm()));
            return outcome(SolveStatus::Converged, x, trace, k + 1);
        }
        let x_plus = match retract(pb.domain(), &dx) {
            Ok(p) => p,
            Err(_) => return outcome(SolveStatus::NewtonFailed, x, trace, k),
        };
        let theta = simplified_newton_direction(pb, &op, &f, &x_plus, 1.0)
            .and_then(|bar| theta_estimate(&dx, &bar, 1.0))
            .unwrap_or(f64::INFINITY);
        trace.push(IterationRecord {
            k,
            lambda: 1.0,
            newton_norm: norm,
            theta,
            residual: f.norm(),
            inner_trials: 1,
            x_snapshot: x,
            trials: Vec::new(),
        });
        x = x_plus;
        if norm <= tol {
            return outcome(SolveStatus::Converged, x, trace, k + 1);
        }
    }
    outcome(SolveStatus::MaxIterations, x, trace, max_iter)
}

fn zero_record(k: usize, x: &Point, newton_norm: f64, residual: f64) -> IterationRecord {
    IterationRecord {
        k,
        lambda: 1.0,
        newton_norm,
        theta: 0.0,
        residual,
        inner_trials: 0,
        x_snapshot: x.clone(),
        trials: Vec::new(),
    }
}

/// Affine covariant damped Newton iteration along the Newton path.
///
/// The inner loop tries `x₊ = R_x(λ δx)`, measures `θ = ‖δx̄₊‖ / ‖λ δx‖` and
/// updates `λ ← min(1, λ Θ_des / θ)` until `θ ≤ Θ_acc`. A trial whose
/// retraction, transport or evaluation fails counts as
/// `θ = max(2 Θ_acc, 2)`. The accepted `λ`, after its update, seeds the
/// next outer iteration. The iteration stops with `Converged` once the
/// accepted step had `λ = 1` before and after the update, `θ ≤ 1/4` and
/// `‖δx‖ ≤ tol`, or when the Newton direction vanishes to rounding.
pub fn damped_newton(
    pb: &dyn NewtonProblem,
    q: &ConnectionMap,
    x0: &Point,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_start(pb, x0)?;
    let failed_theta = (2.0 * cfg.theta_acc).max(2.0);
    let mut x = x0.clone();
    let mut lambda = cfg.initial_lambda;
    let mut trace = Vec::new();
    let mut steps = 0;
    for k in 0..cfg.max_outer {
        let f = evaluate(pb, &x)?;
        let op = newton_operator(pb, q, &x)?;
        let dx = match op.solve(&f) {
            Ok(dx) => dx,
            Err(Error::SingularNewtonOperator { .. }) => {
                return outcome(SolveStatus::SingularOperator, x, trace, steps);
            }
            Err(e) => return Err(e),
        };
        let norm = dx.norm();
        if negligible(&dx, &x, cfg.tol) {
            trace.push(zero_record(k, &x, norm, f.norm()));
            return outcome(SolveStatus::Converged, x, trace, steps);
        }

        let mut trials: Vec<Trial> = Vec::new();
        let accepted = loop {
            let trial_lambda = lambda;
            let (theta, x_plus) = match trial_theta(pb, &op, &f, &dx, trial_lambda) {
                Some((theta, p)) => (theta, Some(p)),
                None => (failed_theta, None),
            };
            let next = (trial_lambda * cfg.theta_des / theta).min(1.0);
            let ok = x_plus.is_some() && theta <= cfg.theta_acc;
            trials.push(Trial {
                lambda: trial_lambda,
                theta,
                next_lambda: next,
                accepted: ok,
            });
            lambda = next;
            if lambda < cfg.lambda_fail || (!ok && trials.len() >= cfg.max_inner) {
                break None;
            }
            if ok {
                break x_plus.map(|p| (p, trial_lambda, theta));
            }
        };

        let last = *trials.last().expect("inner loop runs at least once");
        let record = IterationRecord {
            k,
            lambda: last.lambda,
            newton_norm: norm,
            theta: last.theta,
            residual: f.norm(),
            inner_trials: trials.len(),
            x_snapshot: x.clone(),
            trials,
        };
        trace.push(record);
        let Some((x_plus, step_lambda, theta)) = accepted else {
            return outcome(SolveStatus::NewtonFailed, x, trace, steps);
        };
        x = x_plus;
        steps += 1;
        if step_lambda == 1.0 && lambda == 1.0 && theta <= 0.25 && norm <= cfg.tol {
            return outcome(SolveStatus::Converged, x, trace, steps);
        }
        lambda = lambda.clamp(cfg.lambda_fail, 1.0);
    }
    outcome(SolveStatus::MaxIterations, x, trace, steps)
}
