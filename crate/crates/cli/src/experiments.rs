//! One runner per experiment kind.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use spectral_core::assembly2d::{assemble, conformal_chart, richardson_spectrum, spectrum_2d};
use spectral_core::domains::{drift_constants, eta_residual};
use spectral_core::eigensolve::{SolverPath, Spectrum, SpectrumMeta};
use spectral_core::inequalities::{
    check_ball_floor, check_decreasing, check_eta_residual, check_gap_with, check_lambda1, check_recursions,
    check_pinched, check_universal, check_weyl_with, lambda1_lower, universal_first_eigenvalue, upsilon,
    upsilon_universal, weyl_constant, GapOptions, InequalityReport, Status, PinchedParams, UniversalParams,
    WeylOptions,
};
use spectral_core::sturm_liouville::{ball_problem, ball_spectrum, gap_wedge, sl_eigs};
use spectral_core::Result;

use crate::config::{
    BallLimitConfig, Built, EtaCheckConfig, Experiment, GapConfig, SolverDomain, PinchedConfig, UniversalConfig,
    WeylConfig, WeylSource,
};
use crate::error::CliError;

/// Command-line overrides applied to every experiment.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Replaces the grid (1-D), cell count per side (2-D) or sampling intervals.
    pub grid: Option<usize>,
    /// Richardson extrapolation for 2-D spectra even when the config does not ask for it.
    pub refine: bool,
}

/// Eigenvalues of one solved problem.
#[derive(Clone, Debug)]
pub struct EigenTable {
    pub problem: String,
    pub values: Vec<f64>,
    pub estimates: Option<Vec<f64>>,
}

/// A parameter sweep, one row per parameter value.
#[derive(Clone, Debug)]
pub struct PlotTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: &'static str,
    pub pass: bool,
    pub failures: usize,
    pub warnings: usize,
    pub settings: BTreeMap<&'static str, Value>,
    pub summary: BTreeMap<&'static str, Value>,
    pub reports: Vec<InequalityReport>,
    #[serde(skip)]
    pub tables: Vec<EigenTable>,
    #[serde(skip)]
    pub plot: Option<PlotTable>,
}

impl ExperimentResult {
    fn new(exp: &Experiment) -> Self {
        Self {
            name: exp.name().to_owned(),
            kind: exp.kind(),
            pass: true,
            failures: 0,
            warnings: 0,
            settings: BTreeMap::new(),
            summary: BTreeMap::new(),
            reports: Vec::new(),
            tables: Vec::new(),
            plot: None,
        }
    }

    fn table(&mut self, problem: impl Into<String>, values: Vec<f64>, estimates: Option<Vec<f64>>) {
        self.tables.push(EigenTable {
            problem: problem.into(),
            values,
            estimates,
        });
    }

    /// Required failures always fail; warnings (not-applicable rows and
    /// optional failures) fail only under `strict`.
    pub fn grade(&mut self, strict: bool) {
        self.failures = self.reports.iter().filter(|r| r.is_required_failure()).count();
        self.warnings = self
            .reports
            .iter()
            .filter(|r| r.status == Status::NotApplicable || (!r.required && r.status == Status::Fail))
            .count();
        self.pass = self.failures == 0 && !(strict && self.warnings > 0);
    }
}

/// Run one validated experiment.
pub fn run_experiment(exp: &Experiment, built: Option<&Built>, opts: RunOptions) -> std::result::Result<ExperimentResult, CliError> {
    let mut out = ExperimentResult::new(exp);
    let res = match (exp, built) {
        (Experiment::Gap(c), Some(b)) => gap(c, b, opts, &mut out),
        (Experiment::BallLimit(c), _) => ball_limit(c, opts, &mut out),
        (Experiment::Universal(c), Some(b)) => universal(c, b, opts, &mut out),
        (Experiment::Pinched(c), Some(b)) => pinched(c, b, opts, &mut out),
        (Experiment::Weyl(c), Some(b)) => weyl(c, b, opts, &mut out),
        (Experiment::EtaCheck(c), Some(b)) => eta_check(c, b, opts, &mut out),
        _ => unreachable!("validated experiments carry their built domain"),
    };
    res.map_err(|source| CliError::Solver {
        name: exp.name().to_owned(),
        source,
    })?;
    Ok(out)
}

fn gap(c: &GapConfig, b: &Built, opts: RunOptions, out: &mut ExperimentResult) -> Result<()> {
    let grid = opts.grid.unwrap_or(c.grid);
    out.settings.insert("grid", json!(grid));
    out.settings.insert("diameter_samples", json!(c.diameter_samples));
    let g = gap_wedge(&b.domain, grid)?;
    let w = b.domain.wedge().expect("gap experiments are built on wedges");
    let diameter = w.diameter(c.diameter_samples)?;
    out.reports = check_gap_with(&b.domain, &g, diameter, &GapOptions {
        diameter_required: c.diameter_required,
    })?;
    out.summary.insert("lambda1", json!(g.lambda1));
    out.summary.insert("lambda2", json!(g.lambda2));
    out.summary.insert("gap", json!(g.gap()));
    out.summary.insert("gap_estimate", json!(g.gap_estimate()));
    out.summary.insert("second_branch", json!(g.branch));
    out.summary.insert("branch_tie", json!(g.tie));
    out.summary.insert("diameter", json!(diameter));
    out.summary.insert("theta_star", json!(w.theta_star()));
    let e = g.gap_estimate() - g.estimates[0];
    out.table("wedge", vec![g.lambda1, g.lambda2], Some(vec![g.estimates[0], e]));
    Ok(())
}

fn ball_limit(c: &BallLimitConfig, opts: RunOptions, out: &mut ExperimentResult) -> Result<()> {
    let grid = opts.grid.unwrap_or(c.grid);
    out.settings.insert("grid", json!(grid));
    let floor = 0.25 * ((c.n - 1) as f64 * c.kappa).powi(2);
    let mut firsts = Vec::with_capacity(c.radii.len());
    let mut rows = Vec::with_capacity(c.radii.len());
    for &a in &c.radii {
        let sol = sl_eigs(&ball_problem(c.n, c.kappa, a, 0)?, 1, grid)?;
        let (l, e) = (sol.extrapolated[0], sol.refinement_estimate[0]);
        out.reports.push(check_ball_floor(l, c.n, c.kappa)?);
        out.table(format!("a{a}"), vec![l], Some(vec![e]));
        rows.push(vec![a, l, l - floor, (l - floor) * a * a]);
        firsts.push(l);
    }
    out.reports.extend(check_decreasing(&firsts)?);
    out.summary.insert("floor", json!(floor));
    out.summary.insert("last_excess", json!(firsts[firsts.len() - 1] - floor));
    out.plot = Some(PlotTable {
        columns: vec!["radius", "lambda1", "excess", "excess_times_radius_squared"],
        rows,
    });
    Ok(())
}

fn solve(domain: &SolverDomain, b: &Built, count: usize, opts: RunOptions, out: &mut ExperimentResult) -> Result<Spectrum> {
    match *domain {
        SolverDomain::HalfPlaneRectangle { cells, refine, .. } => {
            let n = opts.grid.unwrap_or(cells);
            let refine = refine || opts.refine;
            out.settings.insert("cells", json!(n));
            out.settings.insert("refine", json!(refine));
            solve_2d(b, n, count, refine, out)
        }
        SolverDomain::Ball { n, kappa, radius, max_mode, grid } => {
            let grid = opts.grid.unwrap_or(grid);
            out.settings.insert("grid", json!(grid));
            out.settings.insert("max_mode", json!(max_mode));
            let s = ball_spectrum(n, kappa, radius, max_mode, grid)?;
            out.table("spectrum", s.eigenvalues.clone(), s.meta.refinement.clone());
            Ok(s)
        }
    }
}

fn solve_2d(b: &Built, n: usize, count: usize, refine: bool, out: &mut ExperimentResult) -> Result<Spectrum> {
    let chart = conformal_chart(&b.domain)?;
    let s = if refine {
        richardson_spectrum(&chart, &b.tensor, &b.drift, (n, n), count, SolverPath::Auto)?.to_spectrum()?
    } else {
        spectrum_2d(&assemble(&chart, &b.tensor, &b.drift, (n, n))?, count, SolverPath::Auto)?
    };
    out.table("spectrum", s.eigenvalues.clone(), s.meta.refinement.clone());
    Ok(s)
}

fn universal(c: &UniversalConfig, b: &Built, opts: RunOptions, out: &mut ExperimentResult) -> Result<()> {
    let s = solve(&c.domain, b, c.k_max.max(c.recursion_k) + 1, opts, out)?;
    let p = UniversalParams::new(c.domain.dimension(), b.tensor.eps(), b.tensor.delta(), c.domain.kappa())?;
    out.reports.push(universal_first_eigenvalue(&s, &p)?);
    for k in 1..=c.k_max {
        out.reports.push(check_universal(&s, &p, k)?);
    }
    let ups = upsilon_universal(&s, &p)?;
    for k in 1..=c.recursion_k {
        out.reports.extend(check_recursions(&ups, k)?);
    }
    out.summary.insert("constant", json!(p.constant()));
    out.summary.insert("first_eigenvalue_bound", json!(p.first_eigenvalue_bound()));
    Ok(())
}

fn pinched(c: &PinchedConfig, b: &Built, opts: RunOptions, out: &mut ExperimentResult) -> Result<()> {
    let s = solve(&c.domain, b, c.k_max + 1, opts, out)?;
    let delta = b.tensor.delta();
    let (c0, c1) = if c.drift.is_zero() {
        (0.0, 0.0)
    } else {
        let d = drift_constants(&b.domain, &b.drift, delta)?;
        (d.c0, d.c1)
    };
    let kappa = c.domain.kappa();
    let p = PinchedParams::new(c.domain.dimension(), b.tensor.eps(), delta, kappa, kappa, c.distance, c0, c1)?;
    out.reports.push(check_lambda1(&s, &p)?);
    for k in 1..=c.k_max {
        out.reports.push(check_pinched(&s, &p, k)?);
    }
    let ups = upsilon(&s, &p)?;
    for k in 1..=c.k_max {
        out.reports.extend(check_recursions(&ups, k)?);
    }
    let bound = lambda1_lower(&p);
    out.summary.insert("c0", json!(c0));
    out.summary.insert("c1", json!(c1));
    out.summary.insert("a", json!(p.a()));
    out.summary.insert("branch", json!(p.branch().label()));
    out.summary.insert("constant", json!(p.constant()));
    out.summary.insert("lambda1_bound", json!(bound.value));
    Ok(())
}

/// Lowest `count` Dirichlet eigenvalues of a `width x height` rectangle.
pub fn rectangle_lattice(width: f64, height: f64, count: usize) -> Vec<f64> {
    let value = |p: usize, q: usize| PI * PI * ((p * p) as f64 / (width * width) + (q * q) as f64 / (height * height));
    let mut cutoff = 8.0 * PI * count as f64 / (width * height);
    loop {
        let mut v = Vec::new();
        for p in 1.. {
            if value(p, 1) > cutoff {
                break;
            }
            v.extend((1..).map(|q| value(p, q)).take_while(|&x| x <= cutoff));
        }
        if v.len() >= count {
            v.sort_by(f64::total_cmp);
            v.truncate(count);
            return v;
        }
        cutoff *= 2.0;
    }
}

fn weyl(c: &WeylConfig, b: &Built, opts: RunOptions, out: &mut ExperimentResult) -> Result<()> {
    let c0 = weyl_constant(&b.domain, &b.tensor)?;
    let s = match c.source {
        WeylSource::Lattice => {
            let v = rectangle_lattice(c.width, c.height, c.count);
            out.table("lattice", v.clone(), None);
            Spectrum::from_values(v, SpectrumMeta {
                source: "rectangle lattice".into(),
                ..SpectrumMeta::default()
            })?
        }
        WeylSource::Solver => {
            let n = opts.grid.unwrap_or(c.cells);
            let refine = c.refine || opts.refine;
            out.settings.insert("cells", json!(n));
            out.settings.insert("refine", json!(refine));
            solve_2d(b, n, c.count, refine, out)?
        }
    };
    let wopts = c.tol.map(WeylOptions::uniform).unwrap_or_default();
    out.settings.insert("options", json!(wopts));
    out.reports = check_weyl_with(&s, c0, 2, &wopts)?;
    out.summary.insert("c0", json!(c0));
    Ok(())
}

fn eta_check(c: &EtaCheckConfig, b: &Built, opts: RunOptions, out: &mut ExperimentResult) -> Result<()> {
    let intervals = opts.grid.unwrap_or(c.intervals);
    out.settings.insert("intervals", json!(intervals));
    let r = eta_residual(&b.tensor, &b.drift, &b.domain, intervals)?;
    out.reports.push(check_eta_residual(r, c.tol)?);
    out.summary.insert("residual", json!(r));
    out.summary.insert("drift", json!(b.drift.eta().label()));
    Ok(())
}
