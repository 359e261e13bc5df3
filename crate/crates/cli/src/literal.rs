//! Parsers for matrix, vector and start-point literals.

use std::fs;

use bundle_newton::geometry::{retract, Manifold, TangentVector};
use bundle_newton::{Matrix, NewtonProblem, Point, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

/// Parses `a,b,c` into a vector.
pub fn parse_vector(text: &str) -> Result<Vector, CliError> {
    let values = parse_list(text)?;
    if values.is_empty() {
        return Err(CliError::config(format!("empty vector literal '{text}'")));
    }
    Ok(Vector::from_vec(values))
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split([',', ' ', '\t'])
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("'{s}' is not a number")))
        })
        .collect()
}

/// Parses `diag:a,b,c` or `file:<path>`; files hold one matrix row per
/// line, entries separated by commas or whitespace, `#` starting a comment.
pub fn parse_matrix(text: &str) -> Result<Matrix, CliError> {
    if let Some(rest) = text.strip_prefix("diag:") {
        return Ok(Matrix::from_diagonal(&parse_vector(rest)?));
    }
    if let Some(path) = text.strip_prefix("file:") {
        let body = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read matrix file '{path}': {e}")))?;
        return parse_rows(&body).map_err(|e| CliError::config(format!("{path}: {}", e.message)));
    }
    Err(CliError::config(format!(
        "matrix literal '{text}' must start with 'diag:' or 'file:'"
    )))
}

fn parse_rows(body: &str) -> Result<Matrix, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in body.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let row = parse_list(content)
            .map_err(|e| CliError::config(format!("line {}: {}", lineno + 1, e.message)))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::config(format!(
                    "line {}: expected {} entries, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::config("matrix file has no rows".into()));
    }
    let ncols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
}

/// Resolves a start literal against a problem:
///
/// - `coords:a,b,c` explicit coordinates, mapped onto the manifold,
/// - `ones` the normalised all-ones point,
/// - `e<i>` the `i`-th coordinate vector (1-based),
/// - `zero<k>` the `k`-th known zero of the problem (1-based),
/// - `perturb:<base>:<magnitude>` a base point moved by `magnitude` along a
///   random unit tangent direction drawn from `seed`.
pub fn parse_start(text: &str, pb: &dyn NewtonProblem, seed: u64) -> Result<Point, CliError> {
    let m = pb.domain();
    if let Some(rest) = text.strip_prefix("coords:") {
        return on_manifold(m, parse_vector(rest)?);
    }
    if let Some(rest) = text.strip_prefix("perturb:") {
        let (base, magnitude) = rest.rsplit_once(':').ok_or_else(|| {
            CliError::config(format!("perturb start '{text}' needs <base>:<magnitude>"))
        })?;
        let magnitude: f64 = magnitude.parse().map_err(|_| {
            CliError::config(format!("'{magnitude}' is not a perturbation magnitude"))
        })?;
        let base = named_point(base, pb)?;
        return perturb(m, &base, magnitude, seed);
    }
    named_point(text, pb)
}

fn named_point(name: &str, pb: &dyn NewtonProblem) -> Result<Point, CliError> {
    let m = pb.domain();
    let n = m.ambient_dim();
    if name == "ones" {
        return on_manifold(m, Vector::from_element(n, 1.0));
    }
    if let Some(k) = name.strip_prefix("zero") {
        let zeros = pb.known_zeros();
        let k: usize = k
            .parse()
            .map_err(|_| CliError::config(format!("bad zero index in '{name}'")))?;
        return zeros.get(k.wrapping_sub(1)).cloned().ok_or_else(|| {
            CliError::config(format!("'{name}': problem has {} known zeros", zeros.len()))
        });
    }
    if let Some(i) = name.strip_prefix('e') {
        let i: usize = i
            .parse()
            .map_err(|_| CliError::config(format!("bad coordinate index in '{name}'")))?;
        if i == 0 || i > n {
            return Err(CliError::config(format!(
                "'{name}': coordinate index must lie in 1..={n}"
            )));
        }
        let mut v = Vector::zeros(n);
        v[i - 1] = 1.0;
        return on_manifold(m, v);
    }
    Err(CliError::config(format!("unknown start '{name}'")))
}

fn on_manifold(m: &dyn Manifold, coords: Vector) -> Result<Point, CliError> {
    if coords.len() != m.ambient_dim() {
        return Err(CliError::config(format!(
            "start has {} coordinates, the problem needs {}",
            coords.len(),
            m.ambient_dim()
        )));
    }
    let projected = m
        .project_point(&coords)
        .map_err(|e| CliError::config(format!("start point: {e}")))?;
    Point::on(m, projected).map_err(|e| CliError::config(format!("start point: {e}")))
}

fn perturb(m: &dyn Manifold, base: &Point, magnitude: f64, seed: u64) -> Result<Point, CliError> {
    if !(magnitude >= 0.0) {
        return Err(CliError::config(format!(
            "perturbation magnitude must be non-negative, got {magnitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = m.projector(base.coords());
    for _ in 0..64 {
        let raw = Vector::from_fn(m.ambient_dim(), |_, _| rng.random_range(-1.0..1.0));
        let dir = &p * raw;
        let norm = dir.norm();
        if norm > 1e-3 {
            let step = TangentVector::new(base.clone(), dir * (magnitude / norm));
            return retract(m, &step)
                .map_err(|e| CliError::config(format!("perturbed start: {e}")));
        }
    }
    Err(CliError::config(
        "could not draw a tangent perturbation".into(),
    ))
}
