//! Bound evaluators and pass/fail reports.
//!
//! Every report is produced by [`evaluate`] from the inputs it echoes, so
//! [`InequalityReport::recompute`] reproduces it bit for bit.

mod bounds;
mod gap;
mod report;
mod threshold;
mod weyl;

pub use bounds::{
    check_lambda1, check_recursions, check_pinched, check_universal, lambda1_lower, universal_first_eigenvalue, upsilon,
    upsilon_universal, Branch, Lambda1Bound, PinchedParams, UniversalParams, UpsilonBranch, UpsilonConstants,
    UpsilonSequence, RECURSIONS, UNIVERSAL_REL_TOL, UPSILON_TOL,
};
pub use gap::{check_gap, check_gap_with, GapOptions, STRICT_REL_MARGIN};
pub use report::{reports_to_json, write_reports_csv, InequalityReport, ReportInputs, Status};
pub use threshold::{check_ball_floor, check_decreasing, check_eta_residual};
pub use weyl::{check_weyl, check_weyl_with, weyl_constant, weyl_constant_with, WeylOptions, WEYL_QUADRATURE_CELLS};

use crate::error::{Error, Result};

/// Names accepted by [`evaluate`].
pub const REPORT_NAMES: [&str; 19] = [
    "universal_quadratic",
    "universal_first_eigenvalue",
    "pinched_quadratic",
    "lambda1_lower",
    "recursion_power",
    "recursion_mean",
    "recursion_quadratic_mean",
    "recursion_gap",
    "gap_lower",
    "gap_upper",
    "gap_diameter",
    "gap_path",
    "normalization",
    "weyl_counting",
    "weyl_mean",
    "weyl_second_moment",
    "strictly_decreasing",
    "ball_limit_floor",
    "eta_residual",
];

/// Build the report `name` from its inputs.
pub fn evaluate(name: &str, inputs: &ReportInputs) -> Result<InequalityReport> {
    match name {
        "universal_quadratic" => bounds::eval_universal_quadratic(inputs),
        "universal_first_eigenvalue" => bounds::eval_universal_first(inputs),
        "pinched_quadratic" => bounds::eval_pinched(inputs),
        "lambda1_lower" => bounds::eval_lambda1(inputs),
        n if n.starts_with("recursion_") => bounds::eval_recursion(n, inputs),
        "gap_lower" | "gap_upper" | "gap_diameter" | "gap_path" => gap::eval_gap(name, inputs),
        "normalization" => gap::eval_normalization(inputs),
        n if n.starts_with("weyl_") => weyl::eval_weyl(n, inputs),
        "strictly_decreasing" | "ball_limit_floor" | "eta_residual" => threshold::eval_threshold(name, inputs),
        other => Err(Error::Unsupported(format!("unknown report `{other}`"))),
    }
}
