//! Wedge gap bounds and the normalization of the cross-section eigenfunctions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::report::{InequalityReport, ReportInputs};
use crate::domains::DomainSpec;
use crate::error::{domain, Error, Result};
use crate::sturm_liouville::GapResult;

/// Required relative margin of strict bounds.
pub const STRICT_REL_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    /// The diameter product is a limit statement; by default its row is informational.
    pub diameter_required: bool,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            diameter_required: false,
        }
    }
}

/// Strict bound with the numerical uncertainty `estimate` charged against the margin.
fn strict(name: &str, lhs: f64, rhs: f64, estimate: f64, i: ReportInputs) -> InequalityReport {
    let slack = -(STRICT_REL_MARGIN * lhs.abs().max(rhs.abs()) + estimate);
    InequalityReport::compare(name, None, lhs, rhs, slack, i)
}

pub fn check_gap(dom: &DomainSpec, gap: &GapResult, diameter: f64) -> Result<Vec<InequalityReport>> {
    check_gap_with(dom, gap, diameter, &GapOptions::default())
}

/// Lower and upper gap bounds, the diameter product, the path bound and the
/// normalization at both path ends.
pub fn check_gap_with(
    dom: &DomainSpec,
    gap: &GapResult,
    diameter: f64,
    opts: &GapOptions,
) -> Result<Vec<InequalityReport>> {
    let w = dom
        .wedge()
        .ok_or_else(|| Error::Unsupported("gap checks need a wedge domain".into()))?;
    if !(diameter > 0.0 && diameter.is_finite()) {
        return domain(format!("diameter must be positive, got {diameter}"));
    }
    let base = ReportInputs::new(vec![gap.lambda1, gap.lambda2])
        .with("ell", w.ell)
        .with("eps", w.tensor.eps())
        .with("delta", w.tensor.delta())
        .with("theta_star", w.theta_star())
        .with("estimate", gap.gap_estimate());
    let mut out = vec![
        super::evaluate("gap_lower", &base)?,
        super::evaluate("gap_upper", &base)?,
    ];
    let mut d = super::evaluate("gap_diameter", &base.clone().with("diameter", diameter))?;
    d.required = opts.diameter_required;
    out.push(d);

    let max_norm = gap
        .path_norms
        .iter()
        .map(|p| p.plain_integral)
        .fold(f64::NEG_INFINITY, f64::max);
    if gap.path_norms.is_empty() {
        return domain("gap result carries no path samples");
    }
    out.push(super::evaluate(
        "gap_path",
        &base.clone().with("max_plain_integral", max_norm).with("path_samples", gap.path_norms.len() as f64),
    )?);
    for end in [0.0, 1.0] {
        let p = gap
            .path_norms
            .iter()
            .find(|p| p.s == end)
            .ok_or_else(|| Error::Domain(format!("no path sample at s = {end}")))?;
        let i = ReportInputs::new(vec![p.plain_integral]).with("s", p.s).with("mu", p.mu);
        out.push(super::evaluate("normalization", &i)?);
    }
    Ok(out)
}

pub(crate) fn eval_gap(name: &str, i: &ReportInputs) -> Result<InequalityReport> {
    let (l1, l2) = match i.values.as_slice() {
        [a, b] => (*a, *b),
        _ => return domain("gap reports need the values [lambda1, lambda2]"),
    };
    let gap = l2 - l1;
    let (ell, eps, delta) = (i.get("ell")?, i.get("eps")?, i.get("delta")?);
    let estimate = i.get("estimate")?;
    let l2sq = ell * ell;
    let r = match name {
        "gap_lower" => {
            let lower = 3.0 * eps * i.get("theta_star")?.sin().powi(2) * l2sq;
            strict(name, lower, gap, estimate, i.clone())
        }
        "gap_upper" => strict(name, gap, 3.0 * delta * l2sq, estimate, i.clone()),
        "gap_diameter" => {
            let d = i.get("diameter")?;
            let d2 = d * d;
            let rep = strict(name, gap * d2, 3.0 * PI * PI * delta, estimate * d2, i.clone());
            let ratio = PI * PI / (l2sq * d2);
            rep.noted(format!("pi^2 / (ell^2 D^2) = {ratio}"))
        }
        "gap_path" => {
            let rhs = 3.0 * l2sq * delta * i.get("max_plain_integral")?;
            InequalityReport::compare(name, None, gap, rhs, estimate, i.clone())
                .noted("maximum over the sampled path parameters")
        }
        other => return Err(Error::Unsupported(format!("unknown gap report `{other}`"))),
    };
    Ok(r)
}

pub(crate) fn eval_normalization(i: &ReportInputs) -> Result<InequalityReport> {
    let v = match i.values.as_slice() {
        [v] => *v,
        _ => return domain("normalization report needs one value"),
    };
    let s = i.get("s")?;
    Ok(strict("normalization", v, 1.0, 0.0, i.clone()).noted(format!("s = {s}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{make_wedge, TensorSpec};
    use crate::sturm_liouville::{GapBranch, PathNorm};

    fn example() -> DomainSpec {
        let (t0, t1) = (PI / 3.0, 2.0 * PI / 3.0);
        make_wedge(1.0, t0, t1, TensorSpec::sin_theta(t0, t1).unwrap()).unwrap()
    }

    fn fake(l1: f64, l2: f64, norms: &[(f64, f64)]) -> GapResult {
        GapResult {
            lambda1: l1,
            lambda2: l2,
            branch: GapBranch::FourEllSquared,
            tie: false,
            four_ell_branch: l2,
            second_mode_branch: l2 + 1.0,
            raw: [l1, l2, l2 + 1.0],
            estimates: [0.0; 3],
            path_norms: norms
                .iter()
                .map(|&(s, v)| PathNorm {
                    s,
                    mu: 1.0 + 3.0 * s,
                    lambda: 0.0,
                    plain_integral: v,
                })
                .collect(),
            grid: 64,
        }
    }

    #[test]
    fn example_endpoints() {
        let dom = example();
        let r = check_gap(&dom, &fake(10.0, 12.5, &[(0.0, 0.9), (1.0, 0.7)]), 3.0).unwrap();
        let names: Vec<&str> = r.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            ["gap_lower", "gap_upper", "gap_diameter", "gap_path", "normalization", "normalization"]
        );
        // 3 (sqrt(3)/2) (3/4) = 1.9486
        assert!((r[0].lhs - 3.0 * 3f64.sqrt() / 2.0 * 0.75).abs() < 1e-12);
        assert_eq!(r[1].rhs, 3.0);
        assert!(r.iter().all(|x| x.pass));
        assert!(!r[2].required);
        assert!((r[3].rhs - 3.0 * 0.9).abs() < 1e-15);
    }

    #[test]
    fn strict_bounds_reject_equality() {
        let dom = example();
        let r = check_gap(&dom, &fake(10.0, 13.0, &[(0.0, 1.0), (1.0, 0.5)]), 3.0).unwrap();
        assert!(!r[1].pass, "gap = 3 delta ell^2 is not strictly below");
        assert!(!r[4].pass, "plain integral 1 is not strictly below 1");
        assert!(r[5].pass);
    }

    #[test]
    fn estimate_shrinks_the_margin() {
        let dom = example();
        let mut g = fake(10.0, 12.99, &[(0.0, 0.9), (1.0, 0.7)]);
        assert!(check_gap(&dom, &g, 3.0).unwrap()[1].pass);
        g.estimates = [0.01, 0.01, 0.0];
        assert!(!check_gap(&dom, &g, 3.0).unwrap()[1].pass);
    }

    #[test]
    fn diameter_requirement_is_configurable() {
        let dom = example();
        let g = fake(10.0, 12.5, &[(0.0, 0.9), (1.0, 0.7)]);
        let r = check_gap_with(&dom, &g, 100.0, &GapOptions { diameter_required: true }).unwrap();
        assert!(r[2].required && !r[2].pass && r[2].is_required_failure());
    }

    #[test]
    fn non_wedge_and_missing_ends() {
        let sq = crate::domains::unit_square();
        assert!(check_gap(&sq, &fake(1.0, 2.0, &[(0.0, 0.5), (1.0, 0.5)]), 1.0).is_err());
        assert!(check_gap(&example(), &fake(1.0, 2.0, &[(0.5, 0.5)]), 1.0).is_err());
        assert!(check_gap(&example(), &fake(1.0, 2.0, &[(0.0, 0.5), (1.0, 0.5)]), 0.0).is_err());
    }
}
