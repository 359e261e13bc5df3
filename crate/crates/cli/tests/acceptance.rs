//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};

use bundle_newton::bundle::{
    back_transport_fibre, evaluate, newton_operator, residual_norm, NewtonProblem,
};
use bundle_newton::geometry::{
    inverse_retract, retract, ConnectionKind, ConnectionMap, Sphere, TransportKind,
};
use bundle_newton::linalg::tangent_basis;
use bundle_newton::problems::{
    affine_trivial, closest_point_constrained, rayleigh_functional, rayleigh_vector_field,
};
use bundle_newton::solver::{
    damped_newton, integrate_differential_newton_path, local_newton, newton_direction,
    newton_path_residual,
};
use bundle_newton::{
    BundleKind, Matrix, Point, SolveOutcome, SolveStatus, SolverConfig, TangentVector, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 0x0acc_e97a;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

fn gaussian(r: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| r.sample(StandardNormal))
}

fn sphere_point(r: &mut ChaCha8Rng, n: usize) -> Point {
    let g = gaussian(r, n);
    Point::new(&g / g.norm())
}

fn symmetric(r: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| r.sample(StandardNormal));
    (&g + g.transpose()) * 0.5
}

fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_column_slice(values))
}

/// Unit tangent direction at `x` on the sphere.
fn unit_tangent(r: &mut ChaCha8Rng, x: &Vector) -> Vector {
    let g = gaussian(r, x.len());
    let t = &g - x * x.dot(&g);
    &t / t.norm()
}

/// Point at geodesic distance `angle` from `x` along the unit tangent `u`.
fn geodesic(x: &Vector, u: &Vector, angle: f64) -> Point {
    Point::new(x * angle.cos() + u * angle.sin())
}

fn great_circle(x: &Vector, y: &Vector) -> f64 {
    let c = x.dot(y);
    (x - y * c).norm().atan2(c)
}

/// Second-order central difference of the back-transported section
/// `t ↦ V^{-1} F(R_x(t d))`.
fn transported_difference(pb: &dyn NewtonProblem, x: &Point, d: &Vector, h: f64) -> Vector {
    let y = pb.base_map(x);
    let section = |t: f64| {
        let z = retract(pb.domain(), &TangentVector::new(x.clone(), d * t)).unwrap();
        back_transport_fibre(pb, &y, &evaluate(pb, &z).unwrap())
            .unwrap()
            .value
    };
    (section(h) - section(-h)) / (2.0 * h)
}

/// Newton direction of `z ↦ V^{-1} F(z) - (1 - λ) F(x)` at `x`, with the
/// derivative assembled by a Richardson-extrapolated five-point stencil.
fn path_problem_direction(pb: &dyn NewtonProblem, x: &Point, lambda: f64) -> Vector {
    let m = pb.domain();
    let basis = tangent_basis(m, x).unwrap().columns;
    let y = pb.base_map(x);
    let f0 = evaluate(pb, x).unwrap();
    let section = |d: &Vector, t: f64| {
        let z = retract(m, &TangentVector::new(x.clone(), d * t)).unwrap();
        back_transport_fibre(pb, &y, &evaluate(pb, &z).unwrap())
            .unwrap()
            .value
    };
    let stencil = |d: &Vector, h: f64| {
        ((section(d, h) - section(d, -h)) * 8.0 - (section(d, 2.0 * h) - section(d, -2.0 * h)))
            / (12.0 * h)
    };
    let h = 4e-3;
    let fibre = match pb.kind() {
        BundleKind::Trivial => Matrix::identity(f0.value.len(), f0.value.len()),
        _ => basis.clone(),
    };
    let mut jac = Matrix::zeros(fibre.ncols(), basis.ncols());
    for j in 0..basis.ncols() {
        let d = basis.column(j).into_owned();
        let col = (stencil(&d, 0.5 * h) * 16.0 - stencil(&d, h)) / 15.0;
        jac.set_column(j, &(fibre.transpose() * col));
    }
    let rhs = -(fibre.transpose() * &f0.value) * lambda;
    &basis * jac.lu().solve(&rhs).unwrap()
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

fn connection_consistency() -> Verdict {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = symmetric(&mut r, 10);
        let x = sphere_point(&mut r, 10);
        let d = unit_tangent(&mut r, x.coords());
        let problems: [Box<dyn NewtonProblem>; 2] = [
            Box::new(rayleigh_vector_field(a.clone()).unwrap()),
            Box::new(rayleigh_functional(a).unwrap()),
        ];
        for pb in &problems {
            let fd = transported_difference(pb.as_ref(), &x, &d, 1e-5);
            let op = newton_operator(pb.as_ref(), &pb.default_connection(), &x).unwrap();
            worst = worst.max((fd - op.apply(&d)).norm());
        }
    }
    verdict(
        worst <= 1e-5,
        format!("worst deviation {worst:.2e} over 100 points of S^9 (tolerance 1e-5)"),
    )
}

fn tangency() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < 100 {
        let a = symmetric(&mut r, 3);
        let x = sphere_point(&mut r, 3);
        let lambda = r.random_range(0.01..=1.0);
        let pb: Box<dyn NewtonProblem> = if samples % 2 == 0 {
            Box::new(rayleigh_vector_field(a).unwrap())
        } else {
            Box::new(rayleigh_functional(a).unwrap())
        };
        let op = newton_operator(pb.as_ref(), &pb.default_connection(), &x).unwrap();
        if op.condition() >= 1e3 {
            continue;
        }
        let dx = op.solve(&evaluate(pb.as_ref(), &x).unwrap()).unwrap().vec * lambda;
        worst =
            worst.max((path_problem_direction(pb.as_ref(), &x, lambda) - &dx).norm() / dx.norm());
        samples += 1;
    }
    let inconsistent = rayleigh_functional(diag(&[3.0, 2.0, 1.0]))
        .unwrap()
        .with_transport(TransportKind::Projection);
    let forced = ConnectionMap::forced(ConnectionKind::RetractionDerived);
    let mut contrast = f64::INFINITY;
    for _ in 0..20 {
        let x = sphere_point(&mut r, 3);
        let lambda = r.random_range(0.01..=1.0);
        let dx = newton_direction(&inconsistent, &forced, &x).unwrap().vec * lambda;
        contrast = contrast
            .min((path_problem_direction(&inconsistent, &x, lambda) - &dx).norm() / dx.norm());
    }
    verdict(
        worst <= 1e-10 && contrast >= 1e-4,
        format!(
            "consistent worst {worst:.2e} (tolerance 1e-10), inconsistent smallest {contrast:.2e} (at least 1e-4)"
        ),
    )
}

fn sqp_equivalence() -> Verdict {
    let mut r = rng(3);
    let a = symmetric(&mut r, 5);
    let pb = rayleigh_functional(a.clone()).unwrap();
    let m = pb.domain();
    let f = |y: &Vector| 0.5 * y.dot(&(&a * y));
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = sphere_point(&mut r, 5);
        let op = newton_operator(&pb, &pb.default_connection(), &x).unwrap();
        let basis = &op.basis;
        let d = basis.ncols();
        let g = |c: &Vector| f(&m.retract(x.coords(), &(basis * c)).unwrap());
        let mut hess = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let eval = |si: f64, sj: f64| {
                    let mut c = Vector::zeros(d);
                    c[i] += si * h;
                    c[j] += sj * h;
                    g(&c)
                };
                hess[(i, j)] = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0)
                    + eval(-1.0, -1.0))
                    / (4.0 * h * h);
            }
        }
        let c = gaussian(&mut r, d);
        let dx = basis * &c;
        worst = worst.max((op.apply(&dx) - basis * (hess * c)).norm() / (1.0 + dx.norm()));
    }
    verdict(
        worst <= 1e-5,
        format!("worst deviation {worst:.2e} over 50 points of S^4 (tolerance 1e-5)"),
    )
}

fn superlinear_convergence() -> Verdict {
    let pb = rayleigh_vector_field(diag(&[3.0, 2.0, 1.0])).unwrap();
    let q = pb.default_connection();
    let mut r = rng(4);
    let mut failures = Vec::new();
    let mut smallest_ratio = f64::INFINITY;
    for i in 0..3 {
        for _ in 0..4 {
            let mut e = Vector::zeros(3);
            e[i] = 1.0;
            let u = unit_tangent(&mut r, &e);
            let x0 = geodesic(&e, &u, 1e-2);
            let out = local_newton(&pb, &q, &x0, 1e-15, 8).unwrap();
            let star = if out.final_point.coords().dot(&e) >= 0.0 {
                e.clone()
            } else {
                -e.clone()
            };
            let mut points: Vec<&Point> = out.trace.iter().map(|rec| &rec.x_snapshot).collect();
            points.push(&out.final_point);
            let d: Vec<f64> = points
                .iter()
                .map(|p| great_circle(p.coords(), &star))
                .collect();
            let ratios: Vec<f64> = d
                .windows(2)
                .filter(|w| w[0] > 1e-12)
                .map(|w| w[1] / w[0])
                .collect();
            let thetas: Vec<f64> = out
                .trace
                .iter()
                .filter(|rec| rec.newton_norm > 1e-10)
                .map(|rec| rec.theta)
                .collect();
            let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
            let reached = ratios.iter().take(8).any(|&q| q < 1e-3);
            let theta_tail = thetas.windows(2).all(|w| w[1] < w[0]);
            smallest_ratio =
                smallest_ratio.min(ratios.iter().copied().fold(f64::INFINITY, f64::min));
            if !(decreasing && reached && theta_tail && d[0] > 0.0) {
                failures.push(format!("e{}: ratios {ratios:?} thetas {thetas:?}", i + 1));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("12 starts, ratios strictly decreasing, smallest {smallest_ratio:.1e} (below 1e-3), theta decreasing")
        } else {
            failures.join("; ")
        },
    )
}

fn damped_globalization() -> Verdict {
    let pb = closest_point_constrained(Vector::from_column_slice(&[2.0, 0.0, 0.0])).unwrap();
    let cfg = SolverConfig::default();
    let mut r = rng(5);
    let anti = Vector::from_column_slice(&[-1.0, 0.0, 0.0]);
    let step = unit_tangent(&mut r, &anti) * 0.2;
    let x0 = retract(pb.domain(), &TangentVector::new(Point::new(anti), step)).unwrap();
    let out = damped_newton(&pb, &pb.default_connection(), &x0, &cfg).unwrap();
    let trials: Vec<_> = out.trace.iter().flat_map(|rec| rec.trials.iter()).collect();
    let reductions = trials.iter().filter(|t| !t.accepted).count();
    let converged = out.status == SolveStatus::Converged;
    let above_fail = trials.iter().all(|t| t.lambda >= cfg.lambda_fail);
    let accepted_theta = trials
        .iter()
        .filter(|t| t.accepted)
        .all(|t| t.theta <= cfg.theta_acc);
    let bound = cfg.inner_trial_bound();
    let within_bound = out.trace.iter().all(|rec| rec.inner_trials <= bound);
    verdict(
        converged && reductions >= 1 && above_fail && accepted_theta && within_bound,
        format!(
            "status {}, inner-loop reductions {reductions} (need at least 1), lambda >= lambda_fail {above_fail}, \
             accepted theta <= 0.55 {accepted_theta}, trials within bound {bound} {within_bound}",
            out.status.as_str()
        ),
    )
}

fn update_law() -> Verdict {
    let cfg = SolverConfig::default();
    let mut r = rng(6);
    let mut outcomes: Vec<SolveOutcome> = Vec::new();
    let fun = rayleigh_functional(diag(&[3.0, 2.0, 1.0])).unwrap();
    for _ in 0..100 {
        outcomes.push(
            damped_newton(
                &fun,
                &fun.default_connection(),
                &sphere_point(&mut r, 3),
                &cfg,
            )
            .unwrap(),
        );
    }
    for _ in 0..50 {
        let field = rayleigh_vector_field(symmetric(&mut r, 4)).unwrap();
        outcomes.push(
            damped_newton(
                &field,
                &field.default_connection(),
                &sphere_point(&mut r, 4),
                &cfg,
            )
            .unwrap(),
        );
    }
    let mut rejected = 0;
    let mut mismatches = 0;
    for t in outcomes
        .iter()
        .flat_map(|o| o.trace.iter())
        .flat_map(|rec| rec.trials.iter())
    {
        if !t.accepted {
            rejected += 1;
            if t.next_lambda.to_bits() != (t.lambda * cfg.theta_des / t.theta).min(1.0).to_bits() {
                mismatches += 1;
            }
        }
    }
    verdict(
        rejected > 0 && mismatches == 0,
        format!(
            "{rejected} rejected trials in {} traces, {mismatches} mismatches",
            outcomes.len()
        ),
    )
}

fn affine_covariance() -> Verdict {
    let m = Matrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
    let pb = affine_trivial(m, Vector::from_column_slice(&[1.0, 2.0, 3.0])).unwrap();
    let scaled = pb.left_scaled(&diag(&[10.0, 0.1, 1.0])).unwrap();
    let cfg = SolverConfig::default();
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    let mut lambdas_equal = true;
    for _ in 0..20 {
        let x0 = Point::new(gaussian(&mut r, 3) * 5.0);
        let a = damped_newton(&pb, &pb.default_connection(), &x0, &cfg).unwrap();
        let b = damped_newton(&scaled, &scaled.default_connection(), &x0, &cfg).unwrap();
        lambdas_equal &= a.trace.len() == b.trace.len();
        for (ra, rb) in a.trace.iter().zip(&b.trace) {
            worst = worst.max((ra.x_snapshot.coords() - rb.x_snapshot.coords()).norm());
            lambdas_equal &= ra.lambda.to_bits() == rb.lambda.to_bits();
            let accepted = |rec: &bundle_newton::IterationRecord| -> Vec<u64> {
                rec.trials
                    .iter()
                    .filter(|t| t.accepted)
                    .map(|t| t.lambda.to_bits())
                    .collect()
            };
            lambdas_equal &= accepted(ra) == accepted(rb);
        }
        worst = worst.max((a.final_point.coords() - b.final_point.coords()).norm());
    }
    verdict(
        worst <= 1e-10 && lambdas_equal,
        format!("largest iterate difference {worst:.2e} (tolerance 1e-10), accepted lambdas identical {lambdas_equal}"),
    )
}

fn metric_sandwich() -> Verdict {
    let m = Sphere::new(3);
    let mut r = rng(8);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut triples = 0;
    while triples < 1000 {
        let z = sphere_point(&mut r, 3);
        let mut near = || {
            let u = unit_tangent(&mut r, z.coords());
            let angle = 0.1 * r.random::<f64>();
            geodesic(z.coords(), &u, angle)
        };
        let (x, y) = (near(), near());
        let d = great_circle(x.coords(), y.coords());
        if d <= 1e-9 {
            continue;
        }
        let gap = (inverse_retract(&m, &z, &x).unwrap().vec
            - inverse_retract(&m, &z, &y).unwrap().vec)
            .norm();
        lo = lo.min(gap / d);
        hi = hi.max(gap / d);
        triples += 1;
    }
    verdict(
        lo >= 0.95 && hi <= 1.05,
        format!("ratios in [{lo:.4}, {hi:.4}] over 1000 triples (required [0.95, 1.05])"),
    )
}

fn newton_path_order() -> Verdict {
    let pb = rayleigh_vector_field(diag(&[3.0, 2.0, 1.0])).unwrap();
    let mut r = rng(9);
    let mut worst = f64::INFINITY;
    let lambdas = [0.05, 0.025, 0.0125];
    let mut starts = vec![Point::new(
        Vector::from_column_slice(&[1.0, 0.5, 0.4]).normalize(),
    )];
    while starts.len() < 11 {
        let x0 = sphere_point(&mut r, 3);
        // keep λ ‖δx‖ ≤ 0.1 so the sampled damping factors are in the small-step regime
        if newton_direction(&pb, &pb.default_connection(), &x0)
            .unwrap()
            .norm()
            <= 2.0
        {
            starts.push(x0);
        }
    }
    for x0 in &starts {
        let dx = newton_direction(&pb, &pb.default_connection(), x0).unwrap();
        let residuals: Vec<f64> = lambdas
            .iter()
            .map(|&l| {
                let x = retract(pb.domain(), &dx.scaled(l)).unwrap();
                newton_path_residual(&pb, x0, &x, l).unwrap()
            })
            .collect();
        worst = worst.min(loglog_slope(&lambdas, &residuals));
    }
    verdict(
        worst >= 1.9,
        format!("smallest empirical order {worst:.3} over 11 starts (at least 1.9)"),
    )
}

fn differential_path() -> Verdict {
    let pb = rayleigh_vector_field(diag(&[3.0, 2.0, 1.0])).unwrap();
    let q = pb.default_connection();
    let x0 = Point::new(Vector::from_column_slice(&[1.0, 0.5, 0.4]).normalize());
    let end = |steps| {
        integrate_differential_newton_path(&pb, &q, &x0, steps)
            .unwrap()
            .pop()
            .unwrap()
    };
    let coarse = end(64);
    let residual = residual_norm(&pb, &coarse).unwrap();
    let fine = end(128);
    let reference = end(1024);
    let ratio =
        (coarse.coords() - reference.coords()).norm() / (fine.coords() - reference.coords()).norm();
    verdict(
        residual <= 1e-4 && ratio >= 8.0,
        format!("64-step residual {residual:.2e} (tolerance 1e-4), halving ratio {ratio:.1} (at least 8)"),
    )
}

fn cli_contract() -> Verdict {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_bundle-newton"))
            .args(args)
            .env_remove("BUNDLE_NEWTON_OUTPUT_DIR")
            .output()
            .expect("binary runs")
    };
    let record_fields = [
        "k",
        "lambda",
        "newton_norm",
        "theta",
        "residual",
        "inner_trials",
    ];
    let summary_fields = ["status", "iterations", "final_residual", "final_point"];
    let fields_ok = |stdout: &[u8]| {
        let text = String::from_utf8_lossy(stdout);
        let lines: Vec<&str> = text.lines().collect();
        let Some((summary, records)) = lines.split_last() else {
            return false;
        };
        let has = |line: &str, fields: &[&str]| {
            let Ok(serde_json::Value::Object(map)) =
                serde_json::from_str::<serde_json::Value>(line)
            else {
                return false;
            };
            map.len() == fields.len() && fields.iter().all(|f| map.contains_key(*f))
        };
        !records.is_empty()
            && records.iter().all(|l| has(l, &record_fields))
            && has(summary, &summary_fields)
    };
    let mut problems = Vec::new();
    let local = [
        "solve",
        "--problem",
        "rayleigh_vf",
        "--A",
        "diag:3,2,1",
        "--start",
        "perturb:e1:0.01",
        "--solver",
        "local",
    ];
    let out = run(&local);
    if out.status.code() != Some(0) || !fields_ok(&out.stdout) {
        problems.push("local example");
    }
    let out = run(&["solve", "--problem", "affine", "--solver", "damped"]);
    if out.status.code() != Some(0) || !fields_ok(&out.stdout) {
        problems.push("affine example");
    }
    let out = run(&[
        "solve",
        "--problem",
        "affine",
        "--theta-des",
        "0.5",
        "--theta-acc",
        "0.4",
    ]);
    if out.status.code() != Some(1) || !String::from_utf8_lossy(&out.stderr).contains("theta_acc") {
        problems.push("config error example");
    }
    let replay = [
        "solve",
        "--problem",
        "rayleigh_fn",
        "--start",
        "perturb:e2:0.7",
        "--seed",
        "7",
    ];
    let (a, b) = (run(&replay), run(&replay));
    let (c, d) = (run(&local), run(&local));
    if a.stdout.is_empty() || a.stdout != b.stdout || c.stdout != d.stdout {
        problems.push("replay determinism");
    }
    verdict(
        problems.is_empty(),
        if problems.is_empty() {
            "exit codes 0, 0, 1 with the stated trace fields; replays byte-identical".to_string()
        } else {
            format!("failed: {}", problems.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("connection-transport consistency", connection_consistency),
        ("tangency of the damped step", tangency),
        ("SQP equivalence", sqp_equivalence),
        ("local superlinear convergence", superlinear_convergence),
        ("damped globalization", damped_globalization),
        ("lambda update law", update_law),
        ("affine covariance", affine_covariance),
        ("metric sandwich", metric_sandwich),
        ("Newton path order", newton_path_order),
        ("differential path", differential_path),
        ("CLI contract", cli_contract),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| verdict(false, "panicked".to_string()));
        all &= result.passed;
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name}: {}", i + 1, result.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
