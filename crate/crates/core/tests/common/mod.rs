//! Independent oracles and samplers shared by the integration tests.
#![allow(dead_code)]

use bundle_newton::{Matrix, Point, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(values: &[f64]) -> Vector {
    Vector::from_column_slice(values)
}

pub fn unit(values: &[f64]) -> Point {
    let x = v(values);
    Point::new(&x / x.norm())
}

pub fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&v(values))
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn sphere_point(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let g = gaussian(rng, n);
    Point::new(&g / g.norm())
}

/// Symmetric matrix with standard normal entries, symmetrised.
pub fn symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    (&g + g.transpose()) * 0.5
}

/// `I - x xᵀ`, entry by entry.
pub fn sphere_projector(x: &Vector) -> Matrix {
    let n = x.len();
    Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - x[i] * x[j])
}

/// Tangent vector at `x` on the sphere with standard normal components.
pub fn sphere_tangent(rng: &mut ChaCha8Rng, x: &Vector) -> Vector {
    let g = gaussian(rng, x.len());
    &g - x * x.dot(&g)
}

/// Great-circle distance, computed as `atan2(‖x ∧ y‖, ⟨x, y⟩)`.
pub fn great_circle(x: &Vector, y: &Vector) -> f64 {
    let c = x.dot(y);
    let s = (x - y * c).norm();
    s.atan2(c)
}

/// Second-order central difference `(f(h) - f(-h)) / 2h`.
pub fn central<F: FnMut(f64) -> Vector>(h: f64, mut f: F) -> Vector {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Orthonormal basis of `x^⊥` by Gram-Schmidt on the coordinate vectors.
pub fn sphere_basis(x: &Vector) -> Matrix {
    let n = x.len();
    let mut cols: Vec<Vector> = Vec::new();
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        let mut w = &e - x * x.dot(&e);
        for c in &cols {
            w -= c * c.dot(&w);
        }
        if w.norm() > 1e-6 {
            cols.push(&w / w.norm());
        }
        if cols.len() == n - 1 {
            break;
        }
    }
    Matrix::from_columns(&cols)
}

/// Index and distance of the closest point in `candidates`.
pub fn closest(candidates: &[Point], x: &Point) -> (usize, f64) {
    candidates
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (z.coords() - x.coords()).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one candidate")
}

/// Unit eigenvectors of a symmetric matrix via Jacobi rotations, signed so
/// that the first nonzero entry is positive.
pub fn jacobi_eigenvectors(a: &Matrix) -> Vec<Vector> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut q = Matrix::identity(n, n);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for r in (p + 1)..n {
                off += m[(p, r)] * m[(p, r)];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                if m[(p, r)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(r, r)] - m[(p, p)]) / (2.0 * m[(p, r)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut rot = Matrix::identity(n, n);
                rot[(p, p)] = c;
                rot[(r, r)] = c;
                rot[(p, r)] = s;
                rot[(r, p)] = -s;
                m = rot.transpose() * &m * &rot;
                q = &q * &rot;
            }
        }
    }
    (0..n)
        .map(|j| {
            let mut col = q.column(j).into_owned();
            if let Some(first) = col.iter().find(|c| c.abs() > 1e-12) {
                if *first < 0.0 {
                    col = -col;
                }
            }
            col
        })
        .collect()
}

/// Hessian of `c ↦ f(R_x(B c))` at `c = 0` by second-order central
/// differences with step `h`, where `B` is `basis`.
pub fn pullback_hessian<R, F>(retract: R, f: F, x: &Vector, basis: &Matrix, h: f64) -> Matrix
where
    R: Fn(&Vector, &Vector) -> Vector,
    F: Fn(&Vector) -> f64,
{
    let d = basis.ncols();
    let g = |c: &[f64]| {
        let step = basis * Vector::from_column_slice(c);
        f(&retract(x, &step))
    };
    let mut hess = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut c = vec![0.0; d];
            let mut eval = |si: f64, sj: f64| {
                c.iter_mut().for_each(|v| *v = 0.0);
                c[i] += si * h;
                c[j] += sj * h;
                g(&c)
            };
            hess[(i, j)] = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h * h);
        }
    }
    hess
}

/// Newton direction at `x` of the Newton path problem
/// `z ↦ V_{y(x)}^{-1}(y(z)) F(z) - (1 - λ) F(x)`, with its derivative
/// assembled along tangent basis directions by a five-point stencil at
/// steps `h` and `h/2` combined by Richardson extrapolation.
pub fn path_problem_direction(
    pb: &dyn bundle_newton::NewtonProblem,
    x: &Point,
    lambda: f64,
) -> Vector {
    use bundle_newton::bundle::{back_transport_fibre, evaluate};
    use bundle_newton::geometry::{retract, TangentVector};
    let m = pb.domain();
    let basis = bundle_newton::linalg::tangent_basis(m, x).unwrap().columns;
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
        bundle_newton::BundleKind::Trivial => Matrix::identity(f0.value.len(), f0.value.len()),
        _ => basis.clone(),
    };
    let mut jac = Matrix::zeros(fibre.ncols(), basis.ncols());
    for j in 0..basis.ncols() {
        let d = basis.column(j).into_owned();
        let col = (stencil(&d, 0.5 * h) * 16.0 - stencil(&d, h)) / 15.0;
        jac.set_column(j, &(fibre.transpose() * col));
    }
    // G(x) = F(x) - (1 - λ) F(x) = λ F(x)
    let rhs = -(fibre.transpose() * &f0.value) * lambda;
    &basis * jac.lu().solve(&rhs).unwrap()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Property test configuration with a fixed seed and no failure files, so
/// that runs are reproducible.
pub fn prop_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed_b0d1e),
        ..proptest::test_runner::Config::default()
    }
}
