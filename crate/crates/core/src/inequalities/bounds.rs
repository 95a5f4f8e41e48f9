//! Universal quadratic inequalities, first-eigenvalue bounds, the auxiliary
//! sequence `upsilon_i = (4 delta^2/eps) lambda_i + C` and its recursions.

use serde::{Deserialize, Serialize};

use super::report::{InequalityReport, ReportInputs};
use crate::eigensolve::Spectrum;
use crate::error::{domain, Error, Result};
use crate::geometry::a_const;

/// Relative slack of non-strict bounds.
pub const UNIVERSAL_REL_TOL: f64 = 1e-6;
/// `upsilon_1` below `-UPSILON_TOL * scale` flags a violated hypothesis.
pub const UPSILON_TOL: f64 = 1e-8;

fn check_elliptic(n: usize, eps: f64, delta: f64) -> Result<()> {
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    if !(eps > 0.0 && eps <= delta && delta.is_finite()) {
        return domain(format!("need 0 < eps <= delta, got eps={eps}, delta={delta}"));
    }
    Ok(())
}

/// Hyperbolic space `H^n(-kappa^2)` with tensor bounds `eps <= T <= delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniversalParams {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl UniversalParams {
    pub fn new(n: usize, eps: f64, delta: f64, kappa: f64) -> Result<Self> {
        check_elliptic(n, eps, delta)?;
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return domain(format!("kappa must be a finite magnitude, got {kappa}"));
        }
        Ok(Self { n, eps, delta, kappa })
    }

    /// `-(n-1)^2 eps^2 kappa^2`.
    pub fn constant(&self) -> f64 {
        let m = (self.n - 1) as f64;
        -m * m * self.eps * self.eps * self.kappa * self.kappa
    }

    /// `(eps / 4 delta^2) (n-1)^2 eps^2 kappa^2`.
    pub fn first_eigenvalue_bound(&self) -> f64 {
        -self.eps / (4.0 * self.delta * self.delta) * self.constant()
    }

    fn echo(&self, values: Vec<f64>) -> ReportInputs {
        ReportInputs::new(values)
            .with("n", self.n as f64)
            .with("eps", self.eps)
            .with("delta", self.delta)
            .with("kappa", self.kappa)
    }

    fn from_inputs(i: &ReportInputs) -> Result<Self> {
        Self::new(i.get_index("n")?, i.get("eps")?, i.get("delta")?, i.get("kappa")?)
    }
}

/// Which right-hand side applies, by the sign of `a(n, eps, delta)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `a <= 0`: no distance term.
    NonPositiveA,
    /// `a > 0`: adds `a / d^2`.
    PositiveA,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::NonPositiveA => "a <= 0",
            Branch::PositiveA => "a > 0",
        }
    }
}

/// Pinched-curvature bound inputs. `d` is the distance from the domain to the
/// base point; `f64::INFINITY` gives the limit of a receding base point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchedParams {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub d: f64,
    pub c0: f64,
    pub c1: f64,
}

impl PinchedParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: usize, eps: f64, delta: f64, kappa1: f64, kappa2: f64, d: f64, c0: f64, c1: f64) -> Result<Self> {
        let p = Self {
            n,
            eps,
            delta,
            kappa1,
            kappa2,
            d,
            c0,
            c1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_elliptic(self.n, self.eps, self.delta)?;
        if !(self.kappa2 >= 0.0 && self.kappa2 <= self.kappa1 && self.kappa1.is_finite()) {
            return domain(format!(
                "need 0 <= kappa2 <= kappa1, got kappa1={}, kappa2={}",
                self.kappa1, self.kappa2
            ));
        }
        if !(self.d > 0.0) {
            return Err(Error::Constraint {
                name: "distance to base point d > 0",
                lhs: self.d,
                rhs: 0.0,
            });
        }
        if !(self.c0 >= 0.0 && self.c0.is_finite() && self.c1.is_finite()) {
            return domain(format!("need finite C0 >= 0 and finite C1, got {}, {}", self.c0, self.c1));
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        a_const(self.n, self.eps, self.delta).expect("validated")
    }

    pub fn branch(&self) -> Branch {
        if self.a() > 0.0 {
            Branch::PositiveA
        } else {
            Branch::NonPositiveA
        }
    }

    pub fn inv_d(&self) -> f64 {
        1.0 / self.d
    }

    /// The additive constant `C` of the right-hand side.
    pub fn constant(&self) -> f64 {
        let m = (self.n - 1) as f64;
        let (e2, d2) = (self.eps * self.eps, self.delta * self.delta);
        let (k1, k2) = (self.kappa1, self.kappa2);
        let inv_d = self.inv_d();
        let mut c = -m * m * e2 * k2 * k2 + 2.0 * m * (d2 * k1 * k1 - e2 * k2 * k2)
            + 2.0 * self.c0 * m * (k1 + inv_d)
            + self.c1;
        if self.branch() == Branch::PositiveA {
            c += self.a() * inv_d * inv_d;
        }
        c
    }

    /// The drift contribution `2 C0 (n-1)(kappa1 + 1/d) + C1`.
    pub fn drift_term(&self) -> f64 {
        2.0 * self.c0 * (self.n - 1) as f64 * (self.kappa1 + self.inv_d()) + self.c1
    }

    /// Positivity condition `sqrt(n+1) kappa2 > sqrt(2) kappa1` of the
    /// Laplacian specialization.
    pub fn mckean_condition(&self) -> bool {
        ((self.n + 1) as f64).sqrt() * self.kappa2 > 2f64.sqrt() * self.kappa1
    }

    fn echo(&self, values: Vec<f64>) -> ReportInputs {
        ReportInputs::new(values)
            .with("n", self.n as f64)
            .with("eps", self.eps)
            .with("delta", self.delta)
            .with("kappa1", self.kappa1)
            .with("kappa2", self.kappa2)
            .with("inv_d", self.inv_d())
            .with("c0", self.c0)
            .with("c1", self.c1)
    }

    fn from_inputs(i: &ReportInputs) -> Result<Self> {
        let inv_d = i.get("inv_d")?;
        if !(inv_d >= 0.0 && inv_d.is_finite()) {
            return domain(format!("inv_d must be finite and nonnegative, got {inv_d}"));
        }
        Self::new(
            i.get_index("n")?,
            i.get("eps")?,
            i.get("delta")?,
            i.get("kappa1")?,
            i.get("kappa2")?,
            1.0 / inv_d,
            i.get("c0")?,
            i.get("c1")?,
        )
    }
}

/// Closed-form lower bound for the first eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda1Bound {
    pub value: f64,
    pub branch: Branch,
    /// `sqrt(n+1) kappa2 > sqrt(2) kappa1`.
    pub mckean_condition: bool,
    pub positive: bool,
}

pub fn lambda1_lower(params: &PinchedParams) -> Lambda1Bound {
    let value = -params.eps / (4.0 * params.delta * params.delta) * params.constant();
    Lambda1Bound {
        value,
        branch: params.branch(),
        mckean_condition: params.mckean_condition(),
        positive: value > 0.0,
    }
}

/// `sum (top - lambda_i)^2` and `(1/eps) sum (top - lambda_i)((4 delta^2/eps) lambda_i + c)`.
pub(crate) fn quadratic_sides(lambdas: &[f64], k: usize, eps: f64, delta: f64, c: f64) -> (f64, f64) {
    let top = lambdas[k];
    let scale = 4.0 * delta * delta / eps;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for &l in &lambdas[..k] {
        let g = top - l;
        lhs += g * g;
        rhs += g * (scale * l + c);
    }
    (lhs, rhs / eps)
}

fn leading(spec: &Spectrum, count: usize) -> Result<Vec<f64>> {
    if spec.len() < count {
        return Err(Error::Insufficient {
            needed: count,
            available: spec.len(),
        });
    }
    Ok(spec.eigenvalues[..count].to_vec())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        domain("k must be at least 1")
    } else {
        Ok(())
    }
}

fn values_for_k(i: &ReportInputs) -> Result<usize> {
    let k = i.get_index("k")?;
    check_k(k)?;
    if i.values.len() != k + 1 {
        return domain(format!("expected {} values for k = {k}, got {}", k + 1, i.values.len()));
    }
    Ok(k)
}

/// Universal quadratic inequality on `H^n(-kappa^2)` for index `k`.
pub fn check_universal(spec: &Spectrum, params: &UniversalParams, k: usize) -> Result<InequalityReport> {
    check_k(k)?;
    let inputs = params.echo(leading(spec, k + 1)?).with("k", k as f64);
    eval_universal_quadratic(&inputs)
}

pub(crate) fn eval_universal_quadratic(i: &ReportInputs) -> Result<InequalityReport> {
    let p = UniversalParams::from_inputs(i)?;
    let k = values_for_k(i)?;
    let (lhs, rhs) = quadratic_sides(&i.values, k, p.eps, p.delta, p.constant());
    Ok(InequalityReport::compare("universal_quadratic", Some(k), lhs, rhs, UNIVERSAL_REL_TOL * rhs.abs(), i.clone()))
}

/// `lambda_1 >= (eps / 4 delta^2)(n-1)^2 eps^2 kappa^2`.
pub fn universal_first_eigenvalue(spec: &Spectrum, params: &UniversalParams) -> Result<InequalityReport> {
    eval_universal_first(&params.echo(leading(spec, 1)?))
}

pub(crate) fn eval_universal_first(i: &ReportInputs) -> Result<InequalityReport> {
    let p = UniversalParams::from_inputs(i)?;
    let l1 = single_value(i)?;
    let bound = p.first_eigenvalue_bound();
    Ok(InequalityReport::compare("universal_first_eigenvalue", Some(1), bound, l1, UNIVERSAL_REL_TOL * l1.abs(), i.clone()))
}

fn single_value(i: &ReportInputs) -> Result<f64> {
    match i.values.as_slice() {
        [v] => Ok(*v),
        other => domain(format!("expected one value, got {}", other.len())),
    }
}

/// Pinched-curvature quadratic inequality for index `k`; the note names the branch.
pub fn check_pinched(spec: &Spectrum, params: &PinchedParams, k: usize) -> Result<InequalityReport> {
    params.validate()?;
    check_k(k)?;
    let inputs = params.echo(leading(spec, k + 1)?).with("k", k as f64);
    eval_pinched(&inputs)
}

pub(crate) fn eval_pinched(i: &ReportInputs) -> Result<InequalityReport> {
    let p = PinchedParams::from_inputs(i)?;
    let k = values_for_k(i)?;
    let (lhs, rhs) = quadratic_sides(&i.values, k, p.eps, p.delta, p.constant());
    Ok(
        InequalityReport::compare("pinched_quadratic", Some(k), lhs, rhs, UNIVERSAL_REL_TOL * rhs.abs(), i.clone())
            .noted(format!("branch {}", p.branch().label())),
    )
}

/// Computed `lambda_1` against [`lambda1_lower`].
pub fn check_lambda1(spec: &Spectrum, params: &PinchedParams) -> Result<InequalityReport> {
    params.validate()?;
    eval_lambda1(&params.echo(leading(spec, 1)?))
}

pub(crate) fn eval_lambda1(i: &ReportInputs) -> Result<InequalityReport> {
    let p = PinchedParams::from_inputs(i)?;
    let l1 = single_value(i)?;
    let b = lambda1_lower(&p);
    let note = format!(
        "branch {}; bound {}; sqrt(n+1) kappa2 > sqrt(2) kappa1: {}",
        b.branch.label(),
        if b.positive { "positive" } else { "not positive" },
        b.mckean_condition
    );
    Ok(InequalityReport::compare("lambda1_lower", Some(1), b.value, l1, UNIVERSAL_REL_TOL * l1.abs(), i.clone()).noted(note))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonBranch {
    /// Constant curvature with radially constant drift.
    Universal,
    Pinched(Branch),
}

/// Constants behind an auxiliary sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpsilonConstants {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub d: f64,
    pub c0: f64,
    pub c1: f64,
    /// The shift `C` in `upsilon_i = (4 delta^2/eps) lambda_i + C`.
    pub shift: f64,
}

/// `upsilon_i = (4 delta^2 / eps) lambda_i + C`, non-decreasing with the spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpsilonSequence {
    pub values: Vec<f64>,
    pub branch: UpsilonBranch,
    pub constants: UpsilonConstants,
    /// `upsilon_1` is negative beyond round-off: a hypothesis of the bound
    /// does not hold for this spectrum.
    pub negative_leading: bool,
}

fn build_upsilon(spec: &Spectrum, branch: UpsilonBranch, constants: UpsilonConstants) -> Result<UpsilonSequence> {
    if spec.is_empty() {
        return Err(Error::Insufficient { needed: 1, available: 0 });
    }
    let scale = 4.0 * constants.delta * constants.delta / constants.eps;
    let values: Vec<f64> = spec.eigenvalues.iter().map(|&l| scale * l + constants.shift).collect();
    let size = scale * spec.eigenvalues[0].abs() + constants.shift.abs();
    let negative_leading = values[0] < -UPSILON_TOL * size;
    Ok(UpsilonSequence {
        values,
        branch,
        constants,
        negative_leading,
    })
}

pub fn upsilon(spec: &Spectrum, params: &PinchedParams) -> Result<UpsilonSequence> {
    params.validate()?;
    let c = UpsilonConstants {
        n: params.n,
        eps: params.eps,
        delta: params.delta,
        kappa1: params.kappa1,
        kappa2: params.kappa2,
        d: params.d,
        c0: params.c0,
        c1: params.c1,
        shift: params.constant(),
    };
    build_upsilon(spec, UpsilonBranch::Pinched(params.branch()), c)
}

pub fn upsilon_universal(spec: &Spectrum, params: &UniversalParams) -> Result<UpsilonSequence> {
    let c = UpsilonConstants {
        n: params.n,
        eps: params.eps,
        delta: params.delta,
        kappa1: params.kappa,
        kappa2: params.kappa,
        d: f64::INFINITY,
        c0: 0.0,
        c1: 0.0,
        shift: params.constant(),
    };
    build_upsilon(spec, UpsilonBranch::Universal, c)
}

/// Power, mean, quadratic-mean and gap recursions at index `k`.
pub fn check_recursions(ups: &UpsilonSequence, k: usize) -> Result<Vec<InequalityReport>> {
    check_k(k)?;
    if ups.values.len() < k + 1 {
        return Err(Error::Insufficient {
            needed: k + 1,
            available: ups.values.len(),
        });
    }
    let inputs = ReportInputs::new(ups.values[..=k].to_vec())
        .with("eps", ups.constants.eps)
        .with("delta", ups.constants.delta)
        .with("k", k as f64);
    RECURSIONS.iter().map(|name| super::evaluate(name, &inputs)).collect()
}

pub const RECURSIONS: [&str; 4] = ["recursion_power", "recursion_mean", "recursion_quadratic_mean", "recursion_gap"];

struct Moments {
    k: usize,
    ratio: f64,
    mean: f64,
    bracket: f64,
}

fn moments(i: &ReportInputs) -> Result<Moments> {
    let (eps, delta) = (i.get("eps")?, i.get("delta")?);
    if !(eps > 0.0 && eps <= delta && delta.is_finite()) {
        return domain(format!("need 0 < eps <= delta, got eps={eps}, delta={delta}"));
    }
    let k = values_for_k(i)?;
    let ratio = delta * delta / (eps * eps);
    let head = &i.values[..k];
    let mean = head.iter().sum::<f64>() / k as f64;
    let var = head.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k as f64;
    let lead = 2.0 * ratio * mean;
    let bracket = lead * lead - (1.0 + 4.0 * ratio) * var;
    Ok(Moments { k, ratio, mean, bracket })
}

pub(crate) fn eval_recursion(name: &str, i: &ReportInputs) -> Result<InequalityReport> {
    let m = moments(i)?;
    let (k, r) = (m.k, m.ratio);
    let next = i.values[k];
    let slack = |rhs: f64| UNIVERSAL_REL_TOL * rhs.abs();
    let lead = 2.0 * r * m.mean;
    // Round-off can push an exactly zero bracket slightly negative.
    let bracket_ok = m.bracket >= -1e-12 * lead * lead;
    let bracket_note = || format!("negative bracket {:e}", m.bracket);
    let report = match name {
        "recursion_power" => {
            let rhs = (1.0 + 4.0 * r) * (k as f64).powf(2.0 * r) * i.values[0];
            InequalityReport::compare(name, Some(k), next, rhs, slack(rhs), i.clone())
        }
        "recursion_mean" => {
            let rhs = (1.0 + 4.0 * r) * m.mean;
            InequalityReport::compare(name, Some(k), next, rhs, slack(rhs), i.clone())
        }
        "recursion_quadratic_mean" => {
            if !bracket_ok {
                return Ok(InequalityReport::not_applicable(name, Some(k), next, bracket_note(), i.clone()));
            }
            let rhs = (1.0 + 2.0 * r) * m.mean + m.bracket.max(0.0).sqrt();
            InequalityReport::compare(name, Some(k), next, rhs, slack(rhs), i.clone())
        }
        "recursion_gap" => {
            let lhs = next - i.values[k - 1];
            if !bracket_ok {
                return Ok(InequalityReport::not_applicable(name, Some(k), lhs, bracket_note(), i.clone()));
            }
            let rhs = 2.0 * m.bracket.max(0.0).sqrt();
            // The left side is a difference of terms of size `next`.
            InequalityReport::compare(name, Some(k), lhs, rhs, UNIVERSAL_REL_TOL * next.abs().max(rhs.abs()), i.clone())
        }
        other => return Err(Error::Unsupported(format!("unknown recursion `{other}`"))),
    };
    Ok(report)
}
