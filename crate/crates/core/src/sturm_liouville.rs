//! One-dimensional Dirichlet problems `-(p h')' + q h = lambda w h`.
//!
//! Discretization is the conservative 3-point scheme with face values of `p`,
//! which gives a symmetric tridiagonal pencil with diagonal weight. Eigenvalues
//! come from Sturm-sequence bisection, eigenvectors from inverse iteration.
//!
//! Radial problems on geodesic balls carry a log-weight `G`: the operator is
//! `-(e^G p h')' e^-G + q h`. The pencil is symmetrized with
//! `u = e^(G/2) h` using only differences of `G`, so `sinh^(n-1)` is never
//! formed and radii of several hundred are safe. Their left end is regular: the
//! grid is cell centred, and no flux enters through `r = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domains::{DomainSpec, Wedge};
use crate::eigensolve::{SpectrumMeta, Spectrum, SymTridiagonal};
use crate::error::{domain, Error, Result};

type Coef = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Behaviour at the left end of the interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftEnd {
    Dirichlet,
    /// Singular endpoint of a radial problem: boundedness replaces the
    /// boundary condition.
    Regular,
}

/// `-(p h')' + q h = lambda w h` on `(a, b)`, Dirichlet at `b`.
#[derive(Clone)]
pub struct SLProblem {
    p: Coef,
    q: Coef,
    w: Coef,
    log_weight: Option<Coef>,
    interval: (f64, f64),
    left: LeftEnd,
    label: String,
}

impl fmt::Debug for SLProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SLProblem")
            .field("label", &self.label)
            .field("interval", &self.interval)
            .field("left", &self.left)
            .field("log_weight", &self.log_weight.is_some())
            .finish()
    }
}

impl SLProblem {
    pub fn new(
        interval: (f64, f64),
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b && a.is_finite() && b.is_finite()) {
            return domain(format!("Sturm-Liouville interval needs a < b, got ({a}, {b})"));
        }
        Ok(Self {
            p: Arc::new(p),
            q: Arc::new(q),
            w: Arc::new(w),
            log_weight: None,
            interval,
            left: LeftEnd::Dirichlet,
            label: String::new(),
        })
    }

    /// Replace the left Dirichlet condition by regularity.
    pub fn with_regular_left(mut self) -> Self {
        self.left = LeftEnd::Regular;
        self
    }

    /// Weight the operator by `e^G`; see the module docs.
    pub fn with_log_weight(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.log_weight = Some(Arc::new(g));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn left(&self) -> LeftEnd {
        self.left
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self, x: f64) -> f64 {
        (self.p)(x)
    }

    pub fn q(&self, x: f64) -> f64 {
        (self.q)(x)
    }

    pub fn w(&self, x: f64) -> f64 {
        (self.w)(x)
    }

    fn g(&self, x: f64) -> f64 {
        self.log_weight.as_ref().map_or(0.0, |g| g(x))
    }

    /// Symmetric pencil `K u = lambda diag(weight) u` on `grid` cells.
    pub fn discretize(&self, grid: usize) -> Result<Discretization> {
        if grid < 2 {
            return domain(format!("grid needs at least 2 cells, got {grid}"));
        }
        let (a, b) = self.interval;
        let h = (b - a) / grid as f64;
        let nodes: Vec<f64> = match self.left {
            LeftEnd::Dirichlet => (1..grid).map(|i| a + i as f64 * h).collect(),
            LeftEnd::Regular => (1..=grid).map(|i| a + (i as f64 - 0.5) * h).collect(),
        };
        let n = nodes.len();
        let face = |i: usize| nodes[i] + 0.5 * h;
        let g_nodes: Vec<f64> = nodes.iter().map(|&x| self.g(x)).collect();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut weight = vec![0.0; n];
        let h2 = h * h;

        let positive = |what: &str, x: f64, v: f64| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Coefficient(format!("{what}({x}) = {v} is not positive")))
            }
        };

        for i in 0..n {
            let x = nodes[i];
            weight[i] = positive("w", x, self.w(x))?;
            let q = self.q(x);
            if !q.is_finite() {
                return Err(Error::Coefficient(format!("q({x}) = {q}")));
            }
            diag[i] = q;
            let left_face = x - 0.5 * h;
            let left_flux = match (i, self.left) {
                (0, LeftEnd::Regular) => 0.0,
                _ => positive("p", left_face, self.p(left_face))? * (self.g(left_face) - g_nodes[i]).exp(),
            };
            diag[i] += left_flux / h2;
            if i + 1 < n {
                let f = face(i);
                let pr = positive("p", f, self.p(f))?;
                let gf = self.g(f);
                diag[i] += pr * (gf - g_nodes[i]).exp() / h2;
                off[i] = -pr * (gf - 0.5 * (g_nodes[i] + g_nodes[i + 1])).exp() / h2;
            } else {
                // Vertex grids meet b at the next node; cell-centred grids
                // after half a cell.
                let (edge, factor) = match self.left {
                    LeftEnd::Dirichlet => (x + 0.5 * h, 1.0),
                    LeftEnd::Regular => (b, 2.0),
                };
                let pe = positive("p", edge, self.p(edge))?;
                diag[i] += factor * pe * (self.g(edge) - g_nodes[i]).exp() / h2;
            }
        }
        Ok(Discretization {
            nodes,
            h,
            diag,
            off,
            weight,
        })
    }
}

/// Tridiagonal stiffness `(diag, off)` and diagonal weight on the nodes.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub nodes: Vec<f64>,
    pub h: f64,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub weight: Vec<f64>,
}

impl Discretization {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// `W^-1/2 K W^-1/2`.
    fn standard_form(&self) -> Result<SymTridiagonal> {
        let s: Vec<f64> = self.weight.iter().map(|w| w.sqrt()).collect();
        let d = self.diag.iter().zip(&self.weight).map(|(k, w)| k / w).collect();
        let e = self.off.iter().enumerate().map(|(i, k)| k / (s[i] * s[i + 1])).collect();
        SymTridiagonal::new(d, e)
    }

    /// `x^T K x`.
    pub fn stiffness_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += self.diag[i] * x[i] * x[i];
            if i + 1 < x.len() {
                acc += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        acc
    }

    /// `x^T W x`.
    pub fn weight_form(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.weight).map(|(v, w)| w * v * v).sum()
    }

    /// Lowest `count` eigenpairs, vectors scaled so `h x^T W x = 1`.
    fn eigenpairs(&self, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let t = self.standard_form()?;
        let values: Vec<f64> = (0..count).map(|k| t.eigenvalue(k)).collect();
        let vectors = values
            .iter()
            .map(|&lam| {
                let y = t.eigenvector(lam);
                let mut x: Vec<f64> = y.iter().zip(&self.weight).map(|(v, w)| v / w.sqrt()).collect();
                let norm = (self.h * self.weight_form(&x)).sqrt();
                x.iter_mut().for_each(|v| *v /= norm);
                x
            })
            .collect();
        Ok((values, vectors))
    }

    fn count_below(&self, x: f64) -> Result<usize> {
        Ok(self.standard_form()?.count_below(x))
    }
}

/// Eigenpairs of an [`SLProblem`] with two-grid refinement data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SLSolution {
    /// Fine-grid eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Richardson extrapolation from grids `grid / 2` and `grid`.
    pub extrapolated: Vec<f64>,
    /// `|fine - coarse| / 3` per eigenvalue.
    pub refinement_estimate: Vec<f64>,
    /// Grid vectors with `integral of w h^2 = 1` (in the variable
    /// `e^(G/2) h` when a log-weight is present).
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
    #[serde(skip)]
    pub nodes: Vec<f64>,
    pub grid_size: usize,
}

impl SLSolution {
    /// Number of strict sign changes of eigenfunction `k` (0-based).
    pub fn sign_changes(&self, k: usize) -> usize {
        let f = &self.eigenfunctions[k];
        let peak = f.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let mut last = 0.0;
        let mut changes = 0;
        for &v in f {
            if v.abs() <= 1e-10 * peak {
                continue;
            }
            if last != 0.0 && v.signum() != last {
                changes += 1;
            }
            last = v.signum();
        }
        changes
    }
}

fn richardson(fine: f64, coarse: f64) -> (f64, f64) {
    (fine + (fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}

/// First `count` eigenpairs on `grid` cells, with Richardson data from
/// `grid / 2`.
pub fn sl_eigs(prob: &SLProblem, count: usize, grid: usize) -> Result<SLSolution> {
    if count == 0 {
        return domain("sl_eigs needs count >= 1");
    }
    if grid < 8 * count || grid % 2 != 0 {
        return domain(format!("sl_eigs needs an even grid >= 8 count, got grid {grid} for {count}"));
    }
    let fine = prob.discretize(grid)?;
    let coarse = prob.discretize(grid / 2)?;
    let (eigenvalues, eigenfunctions) = fine.eigenpairs(count)?;
    let t = coarse.standard_form()?;
    let (extrapolated, refinement_estimate) = eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &f)| richardson(f, t.eigenvalue(k)))
        .unzip();
    Ok(SLSolution {
        eigenvalues,
        extrapolated,
        refinement_estimate,
        eigenfunctions,
        nodes: fine.nodes,
        grid_size: grid,
    })
}

/// Cross-section problem of a wedge for the longitudinal mode `mu`:
/// `p = phi(theta)`, `q = mu phi(theta)`, `w = csc^2(theta)`.
pub fn theta_problem(dom: &DomainSpec, mu: f64) -> Result<SLProblem> {
    let w = wedge_of(dom)?;
    if !(mu >= 0.0 && mu.is_finite()) {
        return domain(format!("theta_problem needs mu >= 0, got {mu}"));
    }
    let phi = w.tensor.phi().clone();
    let phi_q = phi.clone();
    Ok(SLProblem::new(
        (w.theta0, w.theta1),
        move |th| phi.value(0.0, th),
        move |th| mu * phi_q.value(0.0, th),
        |th: f64| 1.0 / th.sin().powi(2),
    )?
    .with_label(format!("theta problem, mu = {mu}")))
}

fn wedge_of(dom: &DomainSpec) -> Result<&Wedge> {
    dom.wedge()
        .ok_or_else(|| Error::Unsupported("expected a wedge domain".into()))
}

/// Longitudinal mode `sin(k ell t)` on `(0, pi/ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialMode {
    pub ell: f64,
    pub k: i64,
    pub mu: f64,
}

impl RadialMode {
    pub fn profile(&self, t: f64) -> f64 {
        (self.k as f64 * self.ell * t).sin()
    }

    pub fn length(&self) -> f64 {
        PI / self.ell
    }
}

pub fn radial_mode(ell: f64, k: i64) -> Result<RadialMode> {
    if !(ell > 0.0 && ell.is_finite()) {
        return domain(format!("radial mode needs ell > 0, got {ell}"));
    }
    if k == 0 {
        return domain("radial mode k = 0 is the trivial mode");
    }
    Ok(RadialMode {
        ell,
        k,
        mu: (k as f64 * ell).powi(2),
    })
}

/// `ln(sinh(x))` for `x > 0` without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

fn angular_eigenvalue(n: usize, m: usize) -> f64 {
    (m * (m + n - 2)) as f64
}

/// Radial problem of the geodesic ball of radius `a` in `H^n(-kappa^2)` for
/// spherical harmonics of degree `m`.
///
/// Eigenvalues are those of the Laplacian restricted to that harmonic degree.
/// See [`ball_potential`] for the equivalent normal-form potential.
pub fn ball_problem(n: usize, kappa: f64, a: f64, m: usize) -> Result<SLProblem> {
    if n < 2 || !(kappa > 0.0) || !(a > 0.0 && a.is_finite()) {
        return domain(format!("ball problem needs n >= 2, kappa > 0, a > 0; got {n}, {kappa}, {a}"));
    }
    let ang = angular_eigenvalue(n, m) * kappa * kappa;
    let dim = (n - 1) as f64;
    Ok(SLProblem::new(
        (0.0, a),
        |_| 1.0,
        move |r: f64| if ang == 0.0 { 0.0 } else { ang / (kappa * r).sinh().powi(2) },
        |_| 1.0,
    )?
    .with_regular_left()
    .with_log_weight(move |r| dim * ln_sinh(kappa * r))
    .with_label(format!("H^{n} ball, kappa = {kappa}, a = {a}, m = {m}")))
}

/// Potential of the normal form `-u'' + V u = lambda u`, `u = sinh^((n-1)/2) f`.
pub fn ball_potential(n: usize, kappa: f64, m: usize) -> impl Fn(f64) -> f64 {
    let k2 = kappa * kappa;
    let dim = (n - 1) as f64;
    let ang = angular_eigenvalue(n, m);
    move |r: f64| {
        let s2 = (kappa * r).sinh().powi(2);
        dim * dim * k2 / 4.0 + (dim * (dim - 2.0) / 4.0 + ang) * k2 / s2
    }
}

/// Radial problem of the Euclidean ball of radius `a` in `R^n`.
pub fn euclidean_ball_problem(n: usize, a: f64, m: usize) -> Result<SLProblem> {
    if n < 2 || !(a > 0.0 && a.is_finite()) {
        return domain(format!("ball problem needs n >= 2 and a > 0; got {n}, {a}"));
    }
    let ang = angular_eigenvalue(n, m);
    let dim = (n - 1) as f64;
    Ok(SLProblem::new((0.0, a), |_| 1.0, move |r: f64| ang / (r * r), |_| 1.0)?
        .with_regular_left()
        .with_log_weight(move |r: f64| dim * r.ln())
        .with_label(format!("R^{n} ball, a = {a}, m = {m}")))
}

/// Which cross-section branch attains the second wedge eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapBranch {
    /// First cross-section eigenvalue with `mu = 4 ell^2`.
    FourEllSquared,
    /// Second cross-section eigenvalue with `mu = ell^2`.
    SecondAtEllSquared,
}

/// Plain `integral h^2` of the first cross-section eigenfunction at
/// `mu = ell^2 (1 + 3 s)`, normalized by `integral csc^2 h^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathNorm {
    pub s: f64,
    pub mu: f64,
    pub lambda: f64,
    pub plain_integral: f64,
}

/// First two wedge eigenvalues from the separated problems.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapResult {
    pub lambda1: f64,
    pub lambda2: f64,
    pub branch: GapBranch,
    /// Both branches agreed to within round-off.
    pub tie: bool,
    /// Extrapolated candidates for the second eigenvalue.
    pub four_ell_branch: f64,
    pub second_mode_branch: f64,
    /// Fine-grid values before extrapolation: `lambda1`, both candidates.
    pub raw: [f64; 3],
    /// Refinement estimates for `lambda1`, both candidates.
    pub estimates: [f64; 3],
    pub path_norms: Vec<PathNorm>,
    pub grid: usize,
}

impl GapResult {
    pub fn gap(&self) -> f64 {
        self.lambda2 - self.lambda1
    }

    pub fn gap_estimate(&self) -> f64 {
        let second = match self.branch {
            GapBranch::FourEllSquared => self.estimates[1],
            GapBranch::SecondAtEllSquared => self.estimates[2],
        };
        self.estimates[0] + second
    }
}

/// Sample points of the normalization path.
pub const PATH_SAMPLES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// `lambda1`, `lambda2` of a wedge by separation of variables.
pub fn gap_wedge(dom: &DomainSpec, grid: usize) -> Result<GapResult> {
    let w = wedge_of(dom)?;
    let l2 = w.ell * w.ell;
    let base = sl_eigs(&theta_problem(dom, l2)?, 2, grid)?;
    let four = sl_eigs(&theta_problem(dom, 4.0 * l2)?, 1, grid)?;
    let (cand4, est4) = (four.extrapolated[0], four.refinement_estimate[0]);
    let (cand2, est2) = (base.extrapolated[1], base.refinement_estimate[1]);
    let diff = cand2 - cand4;
    let tie = diff.abs() <= 1e-9 * cand4.abs().max(cand2.abs());
    let branch = if tie || diff > est4 + est2 {
        GapBranch::FourEllSquared
    } else if -diff > est4 + est2 {
        GapBranch::SecondAtEllSquared
    } else {
        return Err(Error::Refine(format!(
            "branches {cand4} (mu = 4 ell^2) and {cand2} (second, mu = ell^2) are not separated by estimates {est4}, {est2} at grid {grid}"
        )));
    };
    let lambda2 = match branch {
        GapBranch::FourEllSquared => cand4,
        GapBranch::SecondAtEllSquared => cand2,
    };
    let path_norms = PATH_SAMPLES
        .iter()
        .map(|&s| path_norm(dom, s, grid))
        .collect::<Result<_>>()?;
    Ok(GapResult {
        lambda1: base.extrapolated[0],
        lambda2,
        branch,
        tie,
        four_ell_branch: cand4,
        second_mode_branch: cand2,
        raw: [base.eigenvalues[0], four.eigenvalues[0], base.eigenvalues[1]],
        estimates: [base.refinement_estimate[0], est4, est2],
        path_norms,
        grid,
    })
}

/// [`PathNorm`] at path parameter `s` in `[0, 1]`.
pub fn path_norm(dom: &DomainSpec, s: f64, grid: usize) -> Result<PathNorm> {
    let w = wedge_of(dom)?;
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("path parameter must lie in [0, 1], got {s}"));
    }
    let mu = w.ell * w.ell * (1.0 + 3.0 * s);
    let disc = theta_problem(dom, mu)?.discretize(grid)?;
    let (values, vectors) = disc.eigenpairs(1)?;
    // Eigenvectors carry integral csc^2 h^2 = 1 already.
    let plain_integral = disc.h * vectors[0].iter().map(|v| v * v).sum::<f64>();
    Ok(PathNorm {
        s,
        mu,
        lambda: values[0],
        plain_integral,
    })
}

/// `C(top, k)` with `C = 0` for `top < k` and negative `top`.
fn binomial(top: i64, k: i64) -> f64 {
    if top < k || top < 0 {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (top - i) as f64 / (i + 1) as f64)
}

/// Dimension of the degree-`m` spherical harmonics on `S^(n-1)`.
pub fn harmonic_multiplicity(n: usize, m: usize) -> usize {
    let (n, m) = (n as i64, m as i64);
    (binomial(m + n - 1, n - 1) - binomial(m + n - 3, n - 1)).round() as usize
}

/// Spectrum of a geodesic ball in `H^n(-kappa^2)` from the radial problems of
/// degrees `0..=max_mode`, with multiplicities. Values are Richardson
/// extrapolated and truncated below the first eigenvalue of degree
/// `max_mode + 1`, so no eigenvalue of a higher degree can be missing.
pub fn ball_spectrum(n: usize, kappa: f64, a: f64, max_mode: usize, grid: usize) -> Result<Spectrum> {
    let cutoff = sl_eigs(&ball_problem(n, kappa, a, max_mode + 1)?, 1, grid)?.extrapolated[0];
    let mut values = Vec::new();
    let mut estimates = Vec::new();
    for m in 0..=max_mode {
        let prob = ball_problem(n, kappa, a, m)?;
        let count = prob.discretize(grid)?.count_below(cutoff)?;
        if count == 0 {
            continue;
        }
        if grid < 8 * count {
            return Err(Error::Refine(format!(
                "{count} radial eigenvalues below the cutoff need grid >= {}",
                8 * count
            )));
        }
        let sol = sl_eigs(&prob, count, grid)?;
        let mult = harmonic_multiplicity(n, m);
        for (v, e) in sol.extrapolated.iter().zip(&sol.refinement_estimate) {
            if *v < cutoff {
                for _ in 0..mult {
                    values.push(*v);
                    estimates.push(*e);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let refinement = order.iter().map(|&i| estimates[i]).collect();
    let values = order.iter().map(|&i| values[i]).collect();
    Spectrum::from_values(
        values,
        SpectrumMeta {
            source: format!("H^{n} ball radius {a}, kappa {kappa}, degrees <= {max_mode}"),
            dof: grid,
            refinement: Some(refinement),
            ..SpectrumMeta::default()
        },
    )
}
