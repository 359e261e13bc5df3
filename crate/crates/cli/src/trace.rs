//! JSON-lines trace records.

use bundle_newton::bundle::residual_norm;
use bundle_newton::{IterationRecord, NewtonProblem, Point, Result};
use serde::{Deserialize, Serialize};

/// One line per iteration. Non-finite numbers are written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub k: usize,
    pub lambda: f64,
    pub newton_norm: f64,
    pub theta: Option<f64>,
    pub residual: f64,
    pub inner_trials: usize,
}

/// The closing line of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub status: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_point: Vec<f64>,
}

pub(crate) fn records(trace: &[IterationRecord]) -> Vec<RecordLine> {
    trace
        .iter()
        .map(|r| RecordLine {
            k: r.k,
            lambda: r.lambda,
            newton_norm: r.newton_norm,
            theta: r.theta.is_finite().then_some(r.theta),
            residual: r.residual,
            inner_trials: r.inner_trials,
        })
        .collect()
}

/// Records of a path integration: `lambda` is the path parameter reached by
/// the step, `newton_norm` the ambient length of the step, and `theta` is
/// absent.
pub(crate) fn path_records(pb: &dyn NewtonProblem, points: &[Point]) -> Result<Vec<RecordLine>> {
    let steps = points.len().saturating_sub(1);
    points
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            Ok(RecordLine {
                k,
                lambda: (k + 1) as f64 / steps as f64,
                newton_norm: (pair[1].coords() - pair[0].coords()).norm(),
                theta: None,
                residual: residual_norm(pb, &pair[0])?,
                inner_trials: 0,
            })
        })
        .collect()
}

pub(crate) fn render(records: &[RecordLine], summary: &SummaryLine) -> String {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).expect("records serialise"));
        text.push('\n');
    }
    text.push_str(&serde_json::to_string(summary).expect("summary serialises"));
    text.push('\n');
    text
}
