//! Experiment configuration files.
//!
//! A config is TOML with one `[[experiment]]` table per experiment, tagged by
//! `kind`. Angles accept radians or expressions such as `"pi/3"` or
//! `"pi/2 - 0.05"`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{de, Deserialize, Deserializer};

use spectral_core::domains::{
    euclidean_rectangle, half_plane_rectangle, make_wedge, DomainSpec, DriftSpec, TensorSpec,
};
use spectral_core::ScalarField;

use crate::error::CliError;

pub const KINDS: [(&str, &str); 6] = [
    ("gap", "wedge eigenvalue gap bounds, diameter product and normalization"),
    ("ball-limit", "first eigenvalue of hyperbolic geodesic balls of growing radius"),
    ("universal", "quadratic universal inequalities and the recursions derived from them"),
    ("pinched", "pinched-curvature quadratic inequality and first eigenvalue lower bound"),
    ("weyl", "Weyl counting, mean and second moment asymptotics"),
    ("eta-check", "compatibility residual of a drift on a wedge"),
];

#[derive(Clone, Debug)]
pub struct Config {
    /// Default output directory, relative to the working directory.
    pub output: Option<PathBuf>,
    pub experiments: Vec<Experiment>,
}

/// First pass: top-level keys, with each experiment table kept whole.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output: Option<PathBuf>,
    #[serde(default)]
    experiment: Vec<toml::Spanned<toml::Table>>,
}

#[derive(Clone, Debug)]
pub enum Experiment {
    Gap(GapConfig),
    BallLimit(BallLimitConfig),
    Universal(UniversalConfig),
    Pinched(PinchedConfig),
    Weyl(WeylConfig),
    EtaCheck(EtaCheckConfig),
}

/// An angle in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    pub name: String,
    pub ell: f64,
    pub theta0: Angle,
    pub theta1: Angle,
    #[serde(default = "TensorConfig::sin_theta")]
    pub tensor: TensorConfig,
    #[serde(default = "defaults::gap_grid")]
    pub grid: usize,
    #[serde(default = "defaults::diameter_samples")]
    pub diameter_samples: usize,
    #[serde(default)]
    pub diameter_required: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallLimitConfig {
    pub name: String,
    #[serde(default = "defaults::two")]
    pub n: usize,
    #[serde(default = "defaults::one")]
    pub kappa: f64,
    pub radii: Vec<f64>,
    #[serde(default = "defaults::ball_grid")]
    pub grid: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalConfig {
    pub name: String,
    pub domain: SolverDomain,
    #[serde(default)]
    pub tensor: TensorConfig,
    #[serde(default)]
    pub drift: DriftConfig,
    #[serde(default = "defaults::k_max")]
    pub k_max: usize,
    #[serde(default = "defaults::recursion_k")]
    pub recursion_k: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinchedConfig {
    pub name: String,
    pub domain: SolverDomain,
    #[serde(default)]
    pub tensor: TensorConfig,
    #[serde(default)]
    pub drift: DriftConfig,
    /// Distance from the base point; `inf` drops the distance terms.
    #[serde(default = "defaults::infinity")]
    pub distance: f64,
    #[serde(default = "defaults::recursion_k")]
    pub k_max: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylConfig {
    pub name: String,
    #[serde(default = "defaults::one")]
    pub width: f64,
    #[serde(default = "defaults::one")]
    pub height: f64,
    pub source: WeylSource,
    pub count: usize,
    #[serde(default = "defaults::weyl_cells")]
    pub cells: usize,
    #[serde(default)]
    pub refine: bool,
    /// One tolerance for all three fits; the built-in defaults otherwise.
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeylSource {
    /// Closed-form rectangle eigenvalues.
    Lattice,
    /// The 2-D discretization.
    Solver,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaCheckConfig {
    pub name: String,
    pub ell: f64,
    pub theta0: Angle,
    pub theta1: Angle,
    #[serde(default = "TensorConfig::sin_theta")]
    pub tensor: TensorConfig,
    pub drift: DriftConfig,
    #[serde(default = "defaults::eta_intervals")]
    pub intervals: usize,
    #[serde(default = "defaults::eta_tol")]
    pub tol: f64,
}

/// Domains with a 2-D or radial solver behind them.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolverDomain {
    HalfPlaneRectangle {
        x: [f64; 2],
        y: [f64; 2],
        #[serde(default = "defaults::one")]
        kappa: f64,
        #[serde(default = "defaults::rect_cells")]
        cells: usize,
        #[serde(default)]
        refine: bool,
    },
    /// Geodesic ball in hyperbolic space; Laplacian only.
    Ball {
        #[serde(default = "defaults::two")]
        n: usize,
        #[serde(default = "defaults::one")]
        kappa: f64,
        radius: f64,
        #[serde(default = "defaults::max_mode")]
        max_mode: usize,
        #[serde(default = "defaults::ball_spectrum_grid")]
        grid: usize,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TensorConfig {
    #[default]
    Identity,
    Constant {
        value: f64,
    },
    /// `phi = sin(theta)` on a wedge.
    SinTheta,
    /// `phi = 1 + amplitude x^2` on a half-plane rectangle.
    QuadraticX {
        amplitude: f64,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriftConfig {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    WedgeAngular,
    WedgeRadial {
        ell: f64,
    },
    /// The angular drift plus `amplitude theta^2`; not admissible.
    WedgeAngularPerturbed {
        amplitude: f64,
    },
    RadialLog,
    RadialQuadratic {
        c: f64,
    },
    /// `amplitude sin(frequency x)` on a half-plane rectangle.
    SinX {
        amplitude: f64,
        frequency: f64,
    },
}

mod defaults {
    pub fn one() -> f64 {
        1.0
    }
    pub fn two() -> usize {
        2
    }
    pub fn infinity() -> f64 {
        f64::INFINITY
    }
    pub fn gap_grid() -> usize {
        2048
    }
    pub fn diameter_samples() -> usize {
        256
    }
    pub fn ball_grid() -> usize {
        8192
    }
    pub fn ball_spectrum_grid() -> usize {
        4096
    }
    pub fn max_mode() -> usize {
        3
    }
    pub fn rect_cells() -> usize {
        64
    }
    pub fn weyl_cells() -> usize {
        128
    }
    pub fn k_max() -> usize {
        10
    }
    pub fn recursion_k() -> usize {
        5
    }
    pub fn eta_intervals() -> usize {
        512
    }
    pub fn eta_tol() -> f64 {
        1e-8
    }
}

impl TensorConfig {
    fn sin_theta() -> Self {
        TensorConfig::SinTheta
    }

    /// Wedge tensors need the angular interval.
    pub fn build(&self, wedge: Option<(f64, f64)>, x_range: Option<[f64; 2]>) -> Result<TensorSpec, String> {
        let r = match (self, wedge) {
            (TensorConfig::Identity, _) => Ok(TensorSpec::identity()),
            (TensorConfig::Constant { value }, _) => TensorSpec::constant(*value),
            (TensorConfig::SinTheta, Some((t0, t1))) => TensorSpec::sin_theta(t0, t1),
            (TensorConfig::SinTheta, None) => return Err("tensor `sin-theta` needs a wedge".into()),
            (TensorConfig::QuadraticX { amplitude }, _) => {
                let [x0, x1] = x_range.ok_or("tensor `quadratic-x` needs a half-plane rectangle")?;
                let a = *amplitude;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(format!("tensor amplitude must be nonnegative, got {a}"));
                }
                let peak = x0.abs().max(x1.abs());
                let (lo, hi) = if x0 <= 0.0 && x1 >= 0.0 { (1.0, 1.0 + a * peak * peak) } else {
                    let m = x0.abs().min(x1.abs());
                    (1.0 + a * m * m, 1.0 + a * peak * peak)
                };
                let phi = ScalarField::new(format!("1 + {a} x^2"), move |x, _| 1.0 + a * x * x)
                    .with_gradient(move |x, _| [2.0 * a * x, 0.0]);
                TensorSpec::new(phi, lo, hi, false)
            }
        };
        r.map_err(|e| e.to_string())
    }
}

impl DriftConfig {
    pub fn build(&self) -> Result<DriftSpec, String> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("drift `{name}` must be finite, got {v}"))
            }
        };
        Ok(match *self {
            DriftConfig::Zero => DriftSpec::zero(),
            DriftConfig::Constant { value } => DriftSpec::constant(finite("value", value)?),
            DriftConfig::WedgeAngular => DriftSpec::wedge_angular(),
            DriftConfig::WedgeRadial { ell } => {
                if !(ell > 0.0 && ell.is_finite()) {
                    return Err(format!("drift `ell` must be positive, got {ell}"));
                }
                DriftSpec::wedge_radial(ell)
            }
            DriftConfig::WedgeAngularPerturbed { amplitude } => {
                let a = finite("amplitude", amplitude)?;
                let base = DriftSpec::wedge_angular();
                DriftSpec::new(ScalarField::new(format!("angular + {a} theta^2"), move |t, th| {
                    base.eta().value(t, th) + a * th * th
                }))
            }
            DriftConfig::RadialLog => DriftSpec::radial_log(),
            DriftConfig::RadialQuadratic { c } => DriftSpec::radial_quadratic(finite("c", c)?),
            DriftConfig::SinX { amplitude, frequency } => {
                let (a, f) = (finite("amplitude", amplitude)?, finite("frequency", frequency)?);
                DriftSpec::new(
                    ScalarField::new(format!("{a} sin({f} x)"), move |x, _| a * (f * x).sin())
                        .with_gradient(move |x, _| [a * f * (f * x).cos(), 0.0]),
                )
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, DriftConfig::Zero)
    }
}

impl SolverDomain {
    pub fn build(&self) -> Result<DomainSpec, String> {
        match *self {
            SolverDomain::HalfPlaneRectangle { x, y, kappa, cells, .. } => {
                if cells < 4 || cells % 2 != 0 {
                    return Err(format!("`cells` must be even and at least 4, got {cells}"));
                }
                half_plane_rectangle((x[0], x[1]), (y[0], y[1]), kappa).map_err(|e| e.to_string())
            }
            SolverDomain::Ball { n, kappa, radius, grid, .. } => {
                if n < 2 {
                    return Err(format!("`n` must be at least 2, got {n}"));
                }
                if grid < 16 {
                    return Err(format!("`grid` must be at least 16, got {grid}"));
                }
                spectral_core::domains::make_ball(n, kappa, radius, 0).map_err(|e| e.to_string())
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SolverDomain::HalfPlaneRectangle { .. } => 2,
            SolverDomain::Ball { n, .. } => *n,
        }
    }

    pub fn kappa(&self) -> f64 {
        match self {
            SolverDomain::HalfPlaneRectangle { kappa, .. } | SolverDomain::Ball { kappa, .. } => *kappa,
        }
    }

    fn x_range(&self) -> Option<[f64; 2]> {
        match self {
            SolverDomain::HalfPlaneRectangle { x, .. } => Some(*x),
            SolverDomain::Ball { .. } => None,
        }
    }
}

/// Validated pieces shared by the runners.
pub struct Built {
    pub domain: DomainSpec,
    pub tensor: TensorSpec,
    pub drift: DriftSpec,
}

fn build_solver(domain: &SolverDomain, tensor: &TensorConfig, drift: &DriftConfig) -> Result<Built, String> {
    let dom = domain.build()?;
    if matches!(domain, SolverDomain::Ball { .. })
        && (!matches!(tensor, TensorConfig::Identity) || !drift.is_zero())
    {
        return Err("ball domains support only the identity tensor and zero drift".into());
    }
    let t = tensor.build(None, domain.x_range())?;
    t.validate_on(&dom).map_err(|e| e.to_string())?;
    Ok(Built {
        domain: dom,
        tensor: t,
        drift: drift.build()?,
    })
}

fn build_wedge(ell: f64, t0: Angle, t1: Angle, tensor: &TensorConfig, drift: &DriftConfig) -> Result<Built, String> {
    let t = tensor.build(Some((t0.0, t1.0)), None)?;
    let dom = make_wedge(ell, t0.0, t1.0, t.clone()).map_err(|e| e.to_string())?;
    Ok(Built {
        domain: dom,
        tensor: t,
        drift: drift.build()?,
    })
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Gap(c) => &c.name,
            Experiment::BallLimit(c) => &c.name,
            Experiment::Universal(c) => &c.name,
            Experiment::Pinched(c) => &c.name,
            Experiment::Weyl(c) => &c.name,
            Experiment::EtaCheck(c) => &c.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Gap(_) => "gap",
            Experiment::BallLimit(_) => "ball-limit",
            Experiment::Universal(_) => "universal",
            Experiment::Pinched(_) => "pinched",
            Experiment::Weyl(_) => "weyl",
            Experiment::EtaCheck(_) => "eta-check",
        }
    }

    /// Construct domains and check ranges without solving anything.
    pub fn validate(&self) -> Result<Option<Built>, String> {
        match self {
            Experiment::Gap(c) => {
                at_least("grid", c.grid, 16)?;
                at_least("diameter_samples", c.diameter_samples, 2)?;
                build_wedge(c.ell, c.theta0, c.theta1, &c.tensor, &DriftConfig::Zero).map(Some)
            }
            Experiment::BallLimit(c) => {
                at_least("n", c.n, 2)?;
                at_least("grid", c.grid, 16)?;
                if c.radii.len() < 2 {
                    return Err("`radii` needs at least two radii".into());
                }
                if !c.radii.windows(2).all(|w| w[0] < w[1]) {
                    return Err("`radii` must be strictly increasing".into());
                }
                for &a in &c.radii {
                    spectral_core::domains::make_ball(c.n, c.kappa, a, 0).map_err(|e| e.to_string())?;
                }
                Ok(None)
            }
            Experiment::Universal(c) => {
                at_least("k_max", c.k_max, 1)?;
                build_solver(&c.domain, &c.tensor, &c.drift).map(Some)
            }
            Experiment::Pinched(c) => {
                at_least("k_max", c.k_max, 1)?;
                if !(c.distance > 0.0) {
                    return Err(format!("`distance` must be positive, got {}", c.distance));
                }
                build_solver(&c.domain, &c.tensor, &c.drift).map(Some)
            }
            Experiment::Weyl(c) => {
                at_least("count", c.count, 2)?;
                if c.source == WeylSource::Solver {
                    at_least("cells", c.cells, 4)?;
                    if c.refine && c.cells % 2 != 0 {
                        return Err(format!("`cells` must be even with `refine`, got {}", c.cells));
                    }
                }
                if let Some(t) = c.tol {
                    if !(t > 0.0 && t < 1.0) {
                        return Err(format!("`tol` must lie in (0, 1), got {t}"));
                    }
                }
                let dom = euclidean_rectangle((0.0, c.width), (0.0, c.height)).map_err(|e| e.to_string())?;
                Ok(Some(Built {
                    domain: dom,
                    tensor: TensorSpec::identity(),
                    drift: DriftSpec::zero(),
                }))
            }
            Experiment::EtaCheck(c) => {
                at_least("intervals", c.intervals, 4)?;
                if !(c.tol > 0.0) {
                    return Err(format!("`tol` must be positive, got {}", c.tol));
                }
                build_wedge(c.ell, c.theta0, c.theta1, &c.tensor, &c.drift).map(Some)
            }
        }
    }
}

fn at_least(field: &str, v: usize, min: usize) -> Result<(), String> {
    if v < min {
        Err(format!("`{field}` must be at least {min}, got {v}"))
    } else {
        Ok(())
    }
}

fn decode(mut table: toml::Table) -> Result<Experiment, String> {
    fn fields<T: DeserializeOwned>(t: toml::Table) -> Result<T, String> {
        t.try_into().map_err(|e: toml::de::Error| e.to_string().trim_end().replace('\n', " "))
    }
    let kind = match table.remove("kind") {
        Some(toml::Value::String(k)) => k,
        Some(other) => return Err(format!("`kind` must be a string, got {other}")),
        None => return Err("missing field `kind`".into()),
    };
    Ok(match kind.as_str() {
        "gap" => Experiment::Gap(fields(table)?),
        "ball-limit" => Experiment::BallLimit(fields(table)?),
        "universal" => Experiment::Universal(fields(table)?),
        "pinched" => Experiment::Pinched(fields(table)?),
        "weyl" => Experiment::Weyl(fields(table)?),
        "eta-check" => Experiment::EtaCheck(fields(table)?),
        other => {
            let known: Vec<&str> = KINDS.iter().map(|(k, _)| *k).collect();
            return Err(format!("unknown kind `{other}`, expected one of {}", known.join(", ")));
        }
    })
}

impl Config {
    pub fn parse(text: &str, origin: &Path) -> Result<Config, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_owned(),
            msg: e.to_string(),
        })?;
        if raw.experiment.is_empty() {
            return Err(CliError::Config {
                path: origin.to_owned(),
                msg: "no [[experiment]] tables".into(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut experiments = Vec::with_capacity(raw.experiment.len());
        for (i, spanned) in raw.experiment.into_iter().enumerate() {
            let line = 1 + text[..spanned.span().start].matches('\n').count();
            let table = spanned.into_inner();
            let label = table.get("name").and_then(|v| v.as_str()).unwrap_or("").to_owned();
            let bad = |msg: String| CliError::Invalid {
                path: origin.to_owned(),
                line,
                index: i,
                name: label.clone(),
                msg,
            };
            let e = decode(table).map_err(bad)?;
            let name = e.name();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) || name.starts_with('.') {
                return Err(bad("`name` must be nonempty and use only ASCII letters, digits, `-`, `_` and `.`".into()));
            }
            if !seen.insert(name.to_owned()) {
                return Err(bad("duplicate experiment name".into()));
            }
            e.validate().map_err(bad)?;
            experiments.push(e);
        }
        Ok(Config {
            output: raw.output,
            experiments,
        })
    }

    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_owned(),
            msg: e.to_string(),
        })?;
        Config::parse(&text, path)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an angle in radians or an expression like \"pi/3\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angle, E> {
                Ok(Angle(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Angle, E> {
                parse_angle(s).map(Angle).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Sum of terms `x`, `pi`, `c pi`, `c*pi`, `pi/q`, `c pi/q`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty angle".into());
    }
    let mut total = 0.0;
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..=bytes.len() {
        let split = i == bytes.len()
            || ((bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'+' | b'-'));
        if split {
            total += parse_term(&s[start..i]).map_err(|e| format!("angle `{s}`: {e}"))?;
            start = i;
        }
    }
    Ok(total)
}

fn parse_term(t: &str) -> Result<f64, String> {
    let t = t.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1.0, b.trim()),
        None => (1.0, t.strip_prefix('+').unwrap_or(t).trim()),
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("cannot read `{}`", x.trim()));
    let v = match body.split_once("pi") {
        Some((coef, rest)) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let c = if coef.is_empty() { 1.0 } else { num(coef)? };
            let rest = rest.trim();
            let q = match rest.strip_prefix('/') {
                Some(q) => num(q)?,
                None if rest.is_empty() => 1.0,
                None => return Err(format!("unexpected `{rest}`")),
            };
            c * std::f64::consts::PI / q
        }
        None => num(body)?,
    };
    if v.is_finite() {
        Ok(sign * v)
    } else {
        Err(format!("`{t}` is not finite"))
    }
}
