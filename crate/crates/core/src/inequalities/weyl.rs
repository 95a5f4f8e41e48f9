//! Phase-space constant and Weyl trend checks.
//!
//! Each trend is fitted with its leading correction, `N(l) ~ c0 l^(n/2) + c1 l^((n-1)/2)`
//! and `y_k ~ L + B k^(-1/n)`, because on a few hundred eigenvalues the
//! boundary term alone shifts a one-parameter fit by several percent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::report::{InequalityReport, ReportInputs};
use crate::assembly2d::conformal_chart;
use crate::domains::{DomainSpec, TensorSpec};
use crate::eigensolve::Spectrum;
use crate::error::{domain, Error, Result};

pub const WEYL_QUADRATURE_CELLS: usize = 1024;

/// `(4 pi)^-1 integral phi^-1 dvol` by midpoint quadrature on the chart.
pub fn weyl_constant(dom: &DomainSpec, tensor: &TensorSpec) -> Result<f64> {
    weyl_constant_with(dom, tensor, WEYL_QUADRATURE_CELLS)
}

pub fn weyl_constant_with(dom: &DomainSpec, tensor: &TensorSpec, cells: usize) -> Result<f64> {
    if cells == 0 {
        return domain("quadrature needs at least one cell");
    }
    let chart = conformal_chart(dom)?;
    let (hu, hv) = ((chart.u.1 - chart.u.0) / cells as f64, (chart.v.1 - chart.v.0) / cells as f64);
    let phi = tensor.phi();
    let mut total = 0.0;
    for i in 0..cells {
        let u = chart.u.0 + (i as f64 + 0.5) * hu;
        let row: f64 = (0..cells)
            .map(|j| {
                let v = chart.v.0 + (j as f64 + 0.5) * hv;
                chart.rho(u, v) / phi.value(u, v)
            })
            .sum();
        total += row;
    }
    Ok(total * hu * hv / (4.0 * PI))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylOptions {
    pub counting_tol: f64,
    pub mean_tol: f64,
    pub second_moment_tol: f64,
    /// Fraction of the usable eigenvalues, from the top, entering each fit.
    pub window: f64,
    /// Eigenvalues whose relative refinement estimate exceeds this are unusable.
    pub reliable_rel: f64,
    pub min_count: usize,
}

impl Default for WeylOptions {
    fn default() -> Self {
        Self {
            counting_tol: 0.05,
            mean_tol: 0.05,
            second_moment_tol: 0.08,
            window: 0.5,
            reliable_rel: 1e-2,
            min_count: 100,
        }
    }
}

impl WeylOptions {
    /// One tolerance for all three trends.
    pub fn uniform(tol: f64) -> Self {
        Self {
            counting_tol: tol,
            mean_tol: tol,
            second_moment_tol: tol,
            ..Self::default()
        }
    }
}

pub fn check_weyl(spec: &Spectrum, c0: f64, n: usize) -> Result<Vec<InequalityReport>> {
    check_weyl_with(spec, c0, n, &WeylOptions::default())
}

/// Counting, mean and second-moment trends against their phase-space limits.
pub fn check_weyl_with(spec: &Spectrum, c0: f64, n: usize, opts: &WeylOptions) -> Result<Vec<InequalityReport>> {
    if !(c0 > 0.0 && c0.is_finite()) || n == 0 {
        return domain(format!("need c0 > 0 and n >= 1, got c0={c0}, n={n}"));
    }
    if !(opts.window > 0.0 && opts.window <= 1.0) {
        return domain(format!("window fraction must lie in (0, 1], got {}", opts.window));
    }
    let usable = match &spec.meta.refinement {
        Some(est) => spec
            .eigenvalues
            .iter()
            .zip(est)
            .take_while(|(l, e)| **e <= opts.reliable_rel * l.abs())
            .count(),
        None => spec.len(),
    };
    if usable < opts.min_count {
        return Err(Error::Insufficient {
            needed: opts.min_count,
            available: usable,
        });
    }
    let start = usable - ((usable as f64 * opts.window).round() as usize).clamp(2, usable);
    let base = ReportInputs::new(spec.eigenvalues[..usable].to_vec())
        .with("c0", c0)
        .with("n", n as f64)
        .with("window_start", start as f64);
    [
        ("weyl_counting", opts.counting_tol),
        ("weyl_mean", opts.mean_tol),
        ("weyl_second_moment", opts.second_moment_tol),
    ]
    .iter()
    .map(|(name, tol)| super::evaluate(name, &base.clone().with("tol", *tol)))
    .collect()
}

/// Least squares `y ~ a x + b z`.
fn fit2(x: &[f64], z: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (mut sxx, mut sxz, mut szz, mut sxy, mut szy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&a, &b), &c) in x.iter().zip(z).zip(y) {
        sxx += a * a;
        sxz += a * b;
        szz += b * b;
        sxy += a * c;
        szy += b * c;
    }
    let det = sxx * szz - sxz * sxz;
    if !(det.abs() > 1e-14 * sxx * szz) {
        return domain("Weyl fit is degenerate on this window");
    }
    Ok(((sxy * szz - szy * sxz) / det, (sxx * szy - sxz * sxy) / det))
}

pub(crate) fn eval_weyl(name: &str, i: &ReportInputs) -> Result<InequalityReport> {
    let c0 = i.get("c0")?;
    let n = i.get_index("n")?;
    let tol = i.get("tol")?;
    let start = i.get_index("window_start")?;
    let lambdas = &i.values;
    if n == 0 || !(c0 > 0.0) || lambdas.len() < start + 2 {
        return domain("Weyl report needs c0 > 0, n >= 1 and at least two values in the window");
    }
    let nf = n as f64;
    let window = start..lambdas.len();
    let (fitted, target) = match name {
        "weyl_counting" => {
            let x: Vec<f64> = lambdas[window.clone()].iter().map(|l| l.powf(nf / 2.0)).collect();
            let z: Vec<f64> = lambdas[window.clone()].iter().map(|l| l.powf((nf - 1.0) / 2.0)).collect();
            // The counting function jumps from k to k + 1 at the (k+1)-th eigenvalue.
            let y: Vec<f64> = window.clone().map(|k| k as f64 + 0.5).collect();
            (fit2(&x, &z, &y)?.0, c0)
        }
        "weyl_mean" | "weyl_second_moment" => {
            let power = if name == "weyl_mean" { 1 } else { 2 };
            let mut acc = 0.0;
            let mut y = Vec::with_capacity(window.len());
            for (idx, l) in lambdas.iter().enumerate() {
                acc += l.powi(power);
                if idx >= start {
                    let k = (idx + 1) as f64;
                    y.push(acc / k / k.powf(2.0 * power as f64 / nf));
                }
            }
            let ones = vec![1.0; y.len()];
            let z: Vec<f64> = window.clone().map(|idx| ((idx + 1) as f64).powf(-1.0 / nf)).collect();
            let p = 2.0 * power as f64;
            (fit2(&ones, &z, &y)?.0, nf / (nf + p) * c0.powf(-p / nf))
        }
        other => return Err(Error::Unsupported(format!("unknown Weyl report `{other}`"))),
    };
    let deviation = (fitted - target).abs() / target.abs();
    Ok(InequalityReport::compare(name, None, deviation, tol, 0.0, i.clone()).noted(format!(
        "fitted {fitted}, limit {target}, window {}..{}",
        start + 1,
        lambdas.len()
    )))
}
