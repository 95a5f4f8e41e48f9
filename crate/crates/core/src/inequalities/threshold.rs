//! Orderings and thresholds used by the experiment pipelines.

use super::gap::STRICT_REL_MARGIN;
use super::report::{InequalityReport, ReportInputs};
use crate::error::{domain, Result};

fn strict(name: &str, k: Option<usize>, lhs: f64, rhs: f64, i: ReportInputs) -> InequalityReport {
    let slack = -STRICT_REL_MARGIN * lhs.abs().max(rhs.abs());
    InequalityReport::compare(name, k, lhs, rhs, slack, i)
}

/// One `strictly_decreasing` row per consecutive pair; `k` is the index of the later value.
pub fn check_decreasing(values: &[f64]) -> Result<Vec<InequalityReport>> {
    if values.len() < 2 {
        return domain("an ordering check needs at least two values");
    }
    values
        .windows(2)
        .enumerate()
        .map(|(i, w)| super::evaluate("strictly_decreasing", &ReportInputs::new(w.to_vec()).with("index", (i + 1) as f64)))
        .collect()
}

/// `lambda1 > (n-1)^2 kappa^2 / 4`, strictly.
pub fn check_ball_floor(lambda1: f64, n: usize, kappa: f64) -> Result<InequalityReport> {
    super::evaluate(
        "ball_limit_floor",
        &ReportInputs::new(vec![lambda1]).with("n", n as f64).with("kappa", kappa),
    )
}

/// Residual of the drift compatibility condition against `tol`.
pub fn check_eta_residual(residual: f64, tol: f64) -> Result<InequalityReport> {
    super::evaluate("eta_residual", &ReportInputs::new(vec![residual]).with("tol", tol))
}

pub(crate) fn eval_threshold(name: &str, i: &ReportInputs) -> Result<InequalityReport> {
    match (name, i.values.as_slice()) {
        ("strictly_decreasing", [prev, next]) => {
            let k = i.get_index("index")?;
            Ok(strict(name, Some(k), *next, *prev, i.clone()))
        }
        ("ball_limit_floor", [l1]) => {
            let m = i.get_index("n")?.saturating_sub(1) as f64 * i.get("kappa")?;
            Ok(strict(name, None, 0.25 * m * m, *l1, i.clone()))
        }
        ("eta_residual", [r]) => {
            Ok(InequalityReport::compare(name, None, *r, i.get("tol")?, 0.0, i.clone()))
        }
        _ => domain(format!("`{name}` got {} values", i.values.len())),
    }
}
