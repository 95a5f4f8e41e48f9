//! Domain families, coefficient tensors and drifting functions.
//!
//! Every domain comes with a two-dimensional chart in which scalar fields are
//! expressed:
//!
//! | variant   | chart coordinates `(u, v)`          | metric                          |
//! |-----------|-------------------------------------|---------------------------------|
//! | wedge     | `(t, theta)`, `t = ln r`            | `csc^2(theta) (dt^2 + dtheta^2)` |
//! | rectangle | `(x, y)`                            | flat, or `(dx^2 + dy^2)/(k y)^2` |
//! | annulus   | polar `(r, omega)` about the centre | `dr^2 + sn(r)^2 domega^2`       |
//! | ball      | polar `(r, omega)`                  | `dr^2 + sn(r)^2 domega^2`       |
//! | disk      | polar `(r, omega)`                  | `dr^2 + r^2 domega^2`           |
//!
//! For the annulus and ball in dimension `n > 2` the chart is a totally
//! geodesic 2-D section through the centre; radial quantities are exact there.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field::ScalarField;
use crate::geometry::{hyperbolic_distance, HalfPlanePoint};

/// Default number of intervals per dimension for maxima over the closure.
pub const DEFAULT_SAMPLES: usize = 512;
/// Resolution used when validating tensor bounds.
const VALIDATION_SAMPLES: usize = 64;
/// Relative tolerance on the ellipticity bounds of sampled tensors.
const BOUND_TOL: f64 = 1e-12;
/// Largest admissible radial derivative of a radially parallel tensor.
const RADIAL_TOL: f64 = 1e-10;

/// `T = phi I` with `eps <= phi <= delta`.
#[derive(Clone, Debug)]
pub struct TensorSpec {
    phi: ScalarField,
    eps: f64,
    delta: f64,
    radially_parallel: bool,
}

impl TensorSpec {
    pub fn new(phi: ScalarField, eps: f64, delta: f64, radially_parallel: bool) -> Result<Self> {
        if !(eps > 0.0 && eps <= delta && delta.is_finite()) {
            return domain(format!("tensor bounds need 0 < eps <= delta, got {eps}, {delta}"));
        }
        Ok(Self {
            phi,
            eps,
            delta,
            radially_parallel,
        })
    }

    /// `T = I`.
    pub fn identity() -> Self {
        Self::constant(1.0).expect("unit tensor")
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(ScalarField::constant(c), c, c, true)
    }

    /// `phi = sin(theta)` on a wedge with angles `theta0 < pi/2 < theta1`.
    pub fn sin_theta(theta0: f64, theta1: f64) -> Result<Self> {
        let eps = theta0.sin().min(theta1.sin());
        let phi = ScalarField::new("sin(theta)", |_, th: f64| th.sin())
            .with_gradient(|_, th: f64| [0.0, th.cos()])
            .with_hessian(|_, th: f64| [[0.0, 0.0], [0.0, -th.sin()]]);
        Self::new(phi, eps, 1.0, true)
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn radially_parallel(&self) -> bool {
        self.radially_parallel
    }

    /// `c * phi` with bounds scaled alike.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.phi.scaled(c), c * self.eps, c * self.delta, self.radially_parallel)
    }

    /// Check the bounds (and radial parallelism when flagged) on a sampling
    /// grid of the domain closure.
    pub fn validate_on(&self, dom: &DomainSpec) -> Result<()> {
        let tol = BOUND_TOL * self.delta;
        for (u, v) in dom.sample_points(VALIDATION_SAMPLES)? {
            let p = self.phi.value(u, v);
            if !(p >= self.eps - tol && p <= self.delta + tol) {
                return Err(Error::Coefficient(format!(
                    "phi({u}, {v}) = {p} outside [{}, {}]",
                    self.eps, self.delta
                )));
            }
            if self.radially_parallel {
                let dr = dom.radial_first(&self.phi, u, v);
                if dr.abs() >= RADIAL_TOL {
                    return Err(Error::Coefficient(format!(
                        "phi has radial derivative {dr} at ({u}, {v})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Drifting function `eta`; the weighted measure is `exp(-eta) dvol`.
#[derive(Clone, Debug)]
pub struct DriftSpec {
    eta: ScalarField,
}

impl DriftSpec {
    pub fn new(eta: ScalarField) -> Self {
        Self { eta }
    }

    pub fn zero() -> Self {
        Self::new(ScalarField::constant(0.0))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(ScalarField::constant(c))
    }

    /// `-2 ln(1 - ln tan(theta/2))` on wedge charts.
    pub fn wedge_angular() -> Self {
        // g = 1 - ln tan(theta/2), g' = -csc(theta)
        let g = |th: f64| 1.0 - (0.5 * th).tan().ln();
        let eta = ScalarField::new("-2 ln(1 - ln tan(theta/2))", move |_, th| -2.0 * g(th).ln())
            .with_gradient(move |_, th| [0.0, 2.0 / (g(th) * th.sin())])
            .with_hessian(move |_, th| {
                let (s, c, gv) = (th.sin(), th.cos(), g(th));
                // d/dtheta [2 / (g sin)] = -2 (g' sin + g cos) / (g sin)^2
                let d = -2.0 * (-1.0 + gv * c) / (gv * s).powi(2);
                [[0.0, 0.0], [0.0, d]]
            });
        Self::new(eta)
    }

    /// `-2 ln(pi - ell t)` on wedge charts.
    pub fn wedge_radial(ell: f64) -> Self {
        let eta = ScalarField::new(format!("-2 ln(pi - {ell} t)"), move |t, _| -2.0 * (PI - ell * t).ln())
            .with_gradient(move |t, _| [2.0 * ell / (PI - ell * t), 0.0])
            .with_hessian(move |t, _| [[2.0 * ell * ell / (PI - ell * t).powi(2), 0.0], [0.0, 0.0]]);
        Self::new(eta)
    }

    /// `-2 ln r` on polar charts.
    pub fn radial_log() -> Self {
        let eta = ScalarField::new("-2 ln r", |r: f64, _| -2.0 * r.ln())
            .with_gradient(|r, _| [-2.0 / r, 0.0])
            .with_hessian(|r, _| [[2.0 / (r * r), 0.0], [0.0, 0.0]]);
        Self::new(eta)
    }

    /// `(c/2) r^2` on polar charts.
    pub fn radial_quadratic(c: f64) -> Self {
        let eta = ScalarField::new(format!("({c}/2) r^2"), move |r, _| 0.5 * c * r * r)
            .with_gradient(move |r, _| [c * r, 0.0])
            .with_hessian(move |_, _| [[c, 0.0], [0.0, 0.0]]);
        Self::new(eta)
    }

    pub fn eta(&self) -> &ScalarField {
        &self.eta
    }

    /// First and second radial derivatives `(eta', eta'')` at a chart point.
    pub fn radial_derivatives(&self, dom: &DomainSpec, u: f64, v: f64) -> (f64, f64) {
        (dom.radial_first(&self.eta, u, v), dom.radial_second(&self.eta, u, v))
    }

    /// Riemannian norm of the gradient.
    pub fn gradient_norm(&self, dom: &DomainSpec, u: f64, v: f64) -> f64 {
        dom.metric().gradient_norm(self.eta.gradient(u, v), u, v)
    }

    /// Frobenius norm of the covariant Hessian.
    pub fn hessian_norm(&self, dom: &DomainSpec, u: f64, v: f64) -> f64 {
        let m = dom.metric();
        let h = m.covariant_hessian(self.eta.gradient(u, v), self.eta.hessian(u, v), u, v);
        m.tensor_norm(h, u, v)
    }
}

/// Ambient model space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Euclidean,
    /// Constant curvature `-kappa^2`.
    Hyperbolic { kappa: f64 },
}

impl Model {
    fn warp(&self) -> Warp {
        match *self {
            Model::Euclidean => Warp::Flat,
            Model::Hyperbolic { kappa } => Warp::Hyperbolic { kappa },
        }
    }
}

/// Wedge `{1 < r < e^(pi/ell), theta0 < theta < theta1}` of the half-plane.
#[derive(Clone, Debug)]
pub struct Wedge {
    pub ell: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub tensor: TensorSpec,
}

impl Wedge {
    /// `min(theta0, pi - theta1)`.
    pub fn theta_star(&self) -> f64 {
        self.theta0.min(PI - self.theta1)
    }

    pub fn width(&self) -> f64 {
        self.theta1 - self.theta0
    }

    /// Length `pi/ell` of the `t` interval.
    pub fn length(&self) -> f64 {
        PI / self.ell
    }

    /// `(4 eps s - delta) / (4 delta - eps s)` with `s = sin^2(theta_star)`.
    pub fn admissibility_ratio(&self) -> f64 {
        admissibility_ratio(self.tensor.eps, self.tensor.delta, self.theta_star())
    }

    /// Largest `ell` accepted for these angles and tensor bounds.
    pub fn max_admissible_ell(&self) -> f64 {
        PI / self.width() * self.admissibility_ratio().max(0.0).sqrt()
    }

    /// Largest hyperbolic distance between `samples` points per boundary edge.
    pub fn diameter(&self, samples: usize) -> Result<f64> {
        let n = samples.max(2);
        let (t_max, (a, b)) = (self.length(), (self.theta0, self.theta1));
        let mut pts = Vec::with_capacity(4 * n);
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            let t = s * t_max;
            let th = a + s * (b - a);
            pts.push(HalfPlanePoint::from_polar(t.exp(), a));
            pts.push(HalfPlanePoint::from_polar(t.exp(), b));
            pts.push(HalfPlanePoint::from_polar(1.0, th));
            pts.push(HalfPlanePoint::from_polar(t_max.exp(), th));
        }
        let mut best: f64 = 0.0;
        for (i, &p) in pts.iter().enumerate() {
            for &q in &pts[i + 1..] {
                best = best.max(hyperbolic_distance(p, q, 1.0)?);
            }
        }
        Ok(best)
    }
}

fn admissibility_ratio(eps: f64, delta: f64, theta_star: f64) -> f64 {
    let s = theta_star.sin().powi(2);
    (4.0 * eps * s - delta) / (4.0 * delta - eps * s)
}

/// Annulus `inner < r < outer` about a centre in a space of curvature `-kappa1^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub n: usize,
    pub kappa1: f64,
    pub c: f64,
    pub outer: f64,
    pub alpha: f64,
    pub inner: f64,
}

/// Geodesic ball of radius `radius`; `angular_mode` selects the spherical
/// harmonic degree in radial reductions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub n: usize,
    pub kappa: f64,
    pub radius: f64,
    pub angular_mode: usize,
}

/// Coordinate rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rectangle {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

#[derive(Clone, Debug)]
pub enum DomainVariant {
    Wedge(Wedge),
    Annulus(Annulus),
    Ball(Ball),
    Rectangle(Rectangle),
    Disk { radius: f64 },
}

/// A bounded domain in a model space.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub variant: DomainVariant,
    pub model: Model,
    /// Distance from the domain to a fixed base point, when one is fixed.
    pub origin_distance: Option<f64>,
}

/// Chart box with the periodicity of the second coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartBox {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub v_periodic: bool,
}

/// Conformal factor `rho` of a metric `rho (du^2 + dv^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "factor", rename_all = "snake_case")]
pub enum ConformalFactor {
    /// `rho = 1`.
    Unit,
    /// `rho = csc^2(v)`.
    CscSquared,
    /// `rho = 1 / (kappa v)^2`.
    InverseSquare { kappa: f64 },
}

impl ConformalFactor {
    pub fn rho(&self, _u: f64, v: f64) -> f64 {
        match *self {
            ConformalFactor::Unit => 1.0,
            ConformalFactor::CscSquared => 1.0 / v.sin().powi(2),
            ConformalFactor::InverseSquare { kappa } => 1.0 / (kappa * v).powi(2),
        }
    }

    /// Gradient of `sigma = ln(rho)/2`.
    fn sigma_gradient(&self, _u: f64, v: f64) -> [f64; 2] {
        match *self {
            ConformalFactor::Unit => [0.0, 0.0],
            ConformalFactor::CscSquared => [0.0, -v.cos() / v.sin()],
            ConformalFactor::InverseSquare { .. } => [0.0, -1.0 / v],
        }
    }
}

/// Warping function of a polar chart `dr^2 + sn(r)^2 domega^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "warp", rename_all = "snake_case")]
pub enum Warp {
    Flat,
    Hyperbolic { kappa: f64 },
}

impl Warp {
    pub fn sn(&self, r: f64) -> f64 {
        match *self {
            Warp::Flat => r,
            Warp::Hyperbolic { kappa } if kappa > 0.0 => (kappa * r).sinh() / kappa,
            Warp::Hyperbolic { .. } => r,
        }
    }

    pub fn cn(&self, r: f64) -> f64 {
        match *self {
            Warp::Flat => 1.0,
            Warp::Hyperbolic { kappa } => (kappa * r).cosh(),
        }
    }
}

/// Riemannian metric of a chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Metric2d {
    Conformal(ConformalFactor),
    Polar(Warp),
}

impl Metric2d {
    /// Density of the Riemannian area with respect to `du dv`.
    pub fn area_density(&self, u: f64, v: f64) -> f64 {
        match self {
            Metric2d::Conformal(f) => f.rho(u, v),
            Metric2d::Polar(w) => w.sn(u),
        }
    }

    fn inverse_diag(&self, u: f64, v: f64) -> [f64; 2] {
        match self {
            Metric2d::Conformal(f) => {
                let r = f.rho(u, v);
                [1.0 / r, 1.0 / r]
            }
            Metric2d::Polar(w) => [1.0, 1.0 / w.sn(u).powi(2)],
        }
    }

    pub fn gradient_norm(&self, g: [f64; 2], u: f64, v: f64) -> f64 {
        let inv = self.inverse_diag(u, v);
        (inv[0] * g[0] * g[0] + inv[1] * g[1] * g[1]).sqrt()
    }

    /// Covariant Hessian components from chart partials.
    pub fn covariant_hessian(&self, g: [f64; 2], h: [[f64; 2]; 2], u: f64, v: f64) -> [[f64; 2]; 2] {
        match self {
            Metric2d::Conformal(f) => {
                // Gamma^k_ij = d_ik s_j + d_jk s_i - d_ij s_k with s = ln(rho)/2
                let s = f.sigma_gradient(u, v);
                let mut out = h;
                for i in 0..2 {
                    for j in 0..2 {
                        let mut gamma_g = s[j] * g[i] + s[i] * g[j];
                        if i == j {
                            gamma_g -= s[0] * g[0] + s[1] * g[1];
                        }
                        out[i][j] -= gamma_g;
                    }
                }
                out
            }
            Metric2d::Polar(w) => {
                let (s, c) = (w.sn(u), w.cn(u));
                let rw = h[0][1] - c / s * g[1];
                [[h[0][0], rw], [rw, h[1][1] + s * c * g[0]]]
            }
        }
    }

    /// Norm of a covariant 2-tensor.
    pub fn tensor_norm(&self, t: [[f64; 2]; 2], u: f64, v: f64) -> f64 {
        let inv = self.inverse_diag(u, v);
        let mut sum = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                sum += inv[i] * inv[j] * t[i][j] * t[i][j];
            }
        }
        sum.sqrt()
    }
}

impl DomainSpec {
    pub fn wedge(&self) -> Option<&Wedge> {
        match &self.variant {
            DomainVariant::Wedge(w) => Some(w),
            _ => None,
        }
    }

    pub fn annulus(&self) -> Option<&Annulus> {
        match &self.variant {
            DomainVariant::Annulus(a) => Some(a),
            _ => None,
        }
    }

    /// Coordinates of the closure of the domain in its chart.
    pub fn chart_box(&self) -> ChartBox {
        let full = (0.0, 2.0 * PI);
        match &self.variant {
            DomainVariant::Wedge(w) => ChartBox {
                u: (0.0, w.length()),
                v: (w.theta0, w.theta1),
                v_periodic: false,
            },
            DomainVariant::Annulus(a) => ChartBox {
                u: (a.inner, a.outer),
                v: full,
                v_periodic: true,
            },
            DomainVariant::Ball(b) => ChartBox {
                u: (0.0, b.radius),
                v: full,
                v_periodic: true,
            },
            DomainVariant::Rectangle(r) => ChartBox {
                u: (r.x0, r.x1),
                v: (r.y0, r.y1),
                v_periodic: false,
            },
            DomainVariant::Disk { radius } => ChartBox {
                u: (0.0, *radius),
                v: full,
                v_periodic: true,
            },
        }
    }

    pub fn metric(&self) -> Metric2d {
        match (&self.variant, self.model) {
            (DomainVariant::Wedge(_), _) => Metric2d::Conformal(ConformalFactor::CscSquared),
            (DomainVariant::Rectangle(_), Model::Euclidean) => Metric2d::Conformal(ConformalFactor::Unit),
            (DomainVariant::Rectangle(_), Model::Hyperbolic { kappa }) => {
                Metric2d::Conformal(ConformalFactor::InverseSquare { kappa })
            }
            (_, model) => Metric2d::Polar(model.warp()),
        }
    }

    /// Unit radial vector in chart components.
    ///
    /// Polar charts use the distance from the centre; wedges use the
    /// Euclidean-polar radius of the half-plane (`sin(theta) d/dt`); half-plane
    /// rectangles use `ln y` (`kappa y d/dy`); Euclidean rectangles use the
    /// distance from the coordinate origin.
    pub fn radial_direction(&self, u: f64, v: f64) -> [f64; 2] {
        match (&self.variant, self.model) {
            (DomainVariant::Wedge(_), _) => [v.sin(), 0.0],
            (DomainVariant::Rectangle(_), Model::Hyperbolic { kappa }) => [0.0, kappa * v],
            (DomainVariant::Rectangle(_), Model::Euclidean) => {
                let r = u.hypot(v);
                if r > 0.0 {
                    [u / r, v / r]
                } else {
                    [1.0, 0.0]
                }
            }
            _ => [1.0, 0.0],
        }
    }

    pub(crate) fn radial_first(&self, f: &ScalarField, u: f64, v: f64) -> f64 {
        let e = self.radial_direction(u, v);
        let g = f.gradient(u, v);
        e[0] * g[0] + e[1] * g[1]
    }

    /// `Hess f (e, e)` along the unit radial field `e`.
    pub(crate) fn radial_second(&self, f: &ScalarField, u: f64, v: f64) -> f64 {
        let e = self.radial_direction(u, v);
        let h = self
            .metric()
            .covariant_hessian(f.gradient(u, v), f.hessian(u, v), u, v);
        e[0] * e[0] * h[0][0] + 2.0 * e[0] * e[1] * h[0][1] + e[1] * e[1] * h[1][1]
    }

    /// Nodes of the uniform grid with `intervals` cells per side, boundary
    /// included (the periodic seam is sampled once). Doubling `intervals`
    /// yields a superset of the nodes.
    pub fn sample_points(&self, intervals: usize) -> Result<Vec<(f64, f64)>> {
        if intervals == 0 {
            return domain("sampling grid needs at least one interval");
        }
        let b = self.chart_box();
        if !(b.u.1 > b.u.0 && b.v.1 > b.v.0) {
            return domain("empty domain");
        }
        let nv = if b.v_periodic { intervals } else { intervals + 1 };
        let mut pts = Vec::with_capacity((intervals + 1) * nv);
        for i in 0..=intervals {
            let u = b.u.0 + (b.u.1 - b.u.0) * i as f64 / intervals as f64;
            for j in 0..nv {
                let v = b.v.0 + (b.v.1 - b.v.0) * j as f64 / intervals as f64;
                pts.push((u, v));
            }
        }
        Ok(pts)
    }
}

/// Validate a wedge against the tensor bounds.
pub fn make_wedge(ell: f64, theta0: f64, theta1: f64, tensor: TensorSpec) -> Result<DomainSpec> {
    if !(ell > 0.0 && ell.is_finite()) {
        return domain(format!("wedge needs ell > 0, got {ell}"));
    }
    if !(0.0 < theta0 && theta0 < FRAC_PI_2 && FRAC_PI_2 < theta1 && theta1 < PI) {
        return domain(format!(
            "wedge needs 0 < theta0 < pi/2 < theta1 < pi, got {theta0}, {theta1}"
        ));
    }
    let w = Wedge {
        ell,
        theta0,
        theta1,
        tensor,
    };
    let theta_star = w.theta_star();
    if theta_star <= FRAC_PI_6 {
        return Err(Error::Constraint {
            name: "theta_star > pi/6",
            lhs: theta_star,
            rhs: FRAC_PI_6,
        });
    }
    let (eps, delta) = (w.tensor.eps, w.tensor.delta);
    if eps <= delta / 4.0 {
        return Err(Error::Constraint {
            name: "eps > delta/4",
            lhs: eps,
            rhs: delta / 4.0,
        });
    }
    let bound = (PI / w.width()).powi(2) * w.admissibility_ratio();
    if bound < ell * ell {
        return Err(Error::Constraint {
            name: "ell^2 admissible",
            lhs: bound,
            rhs: ell * ell,
        });
    }
    let dom = DomainSpec {
        variant: DomainVariant::Wedge(w),
        model: Model::Hyperbolic { kappa: 1.0 },
        origin_distance: None,
    };
    let tensor = dom.wedge().expect("wedge").tensor.clone();
    tensor.validate_on(&dom)?;
    Ok(dom)
}

/// Annulus with inner radius `sqrt((2 (n-1)(kappa1 + alpha) R + 2) / c)`.
///
/// `alpha` is taken as given; the returned domain records the inner radius
/// as its origin distance.
pub fn make_annulus(n: usize, kappa1: f64, c: f64, outer: f64, alpha: f64) -> Result<DomainSpec> {
    if n < 2 {
        return domain(format!("annulus needs n >= 2, got {n}"));
    }
    if !(kappa1 >= 0.0 && c > 0.0 && outer > 0.0 && alpha > 0.0) {
        return domain("annulus needs kappa1 >= 0 and positive c, R, alpha");
    }
    let m = (n - 1) as f64 * (kappa1 + alpha);
    let threshold = m + (m * m + 2.0 * c).sqrt();
    if c * outer <= threshold {
        return Err(Error::Constraint {
            name: "c R > (n-1)(kappa1+alpha) + sqrt((n-1)^2 (kappa1+alpha)^2 + 2c)",
            lhs: c * outer,
            rhs: threshold,
        });
    }
    let inner = ((2.0 * m * outer + 2.0) / c).sqrt();
    let model = if kappa1 > 0.0 {
        Model::Hyperbolic { kappa: kappa1 }
    } else {
        Model::Euclidean
    };
    Ok(DomainSpec {
        variant: DomainVariant::Annulus(Annulus {
            n,
            kappa1,
            c,
            outer,
            alpha,
            inner,
        }),
        model,
        origin_distance: Some(inner),
    })
}

/// Geodesic ball of radius `radius` in `H^n(-kappa^2)`.
pub fn make_ball(n: usize, kappa: f64, radius: f64, angular_mode: usize) -> Result<DomainSpec> {
    if n < 2 || !(kappa > 0.0) || !(radius > 0.0 && radius.is_finite()) {
        return domain(format!("ball needs n >= 2, kappa > 0, radius > 0; got {n}, {kappa}, {radius}"));
    }
    Ok(DomainSpec {
        variant: DomainVariant::Ball(Ball {
            n,
            kappa,
            radius,
            angular_mode,
        }),
        model: Model::Hyperbolic { kappa },
        origin_distance: None,
    })
}

fn make_rectangle(x: (f64, f64), y: (f64, f64), model: Model) -> Result<DomainSpec> {
    if !(x.1 > x.0 && y.1 > y.0) {
        return domain(format!("rectangle needs increasing ranges, got {x:?} x {y:?}"));
    }
    Ok(DomainSpec {
        variant: DomainVariant::Rectangle(Rectangle {
            x0: x.0,
            x1: x.1,
            y0: y.0,
            y1: y.1,
        }),
        model,
        origin_distance: None,
    })
}

pub fn euclidean_rectangle(x: (f64, f64), y: (f64, f64)) -> Result<DomainSpec> {
    make_rectangle(x, y, Model::Euclidean)
}

/// Coordinate rectangle of the half-plane model of curvature `-kappa^2`.
pub fn half_plane_rectangle(x: (f64, f64), y: (f64, f64), kappa: f64) -> Result<DomainSpec> {
    if !(y.0 > 0.0) || !(kappa > 0.0) {
        return domain("half-plane rectangle needs y0 > 0 and kappa > 0");
    }
    make_rectangle(x, y, Model::Hyperbolic { kappa })
}

pub fn unit_square() -> DomainSpec {
    euclidean_rectangle((0.0, 1.0), (0.0, 1.0)).expect("unit square")
}

pub fn disk(radius: f64) -> Result<DomainSpec> {
    if !(radius > 0.0 && radius.is_finite()) {
        return domain(format!("disk radius must be positive, got {radius}"));
    }
    Ok(DomainSpec {
        variant: DomainVariant::Disk { radius },
        model: Model::Euclidean,
        origin_distance: None,
    })
}

/// `C0 = delta^2 max |eta'|`, `C1 = delta^2 max (2 eta'' - eta'^2)` with the
/// sampling resolution used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftConstants {
    pub c0: f64,
    pub c1: f64,
    pub intervals: usize,
    pub samples: usize,
}

pub fn drift_constants(dom: &DomainSpec, drift: &DriftSpec, delta: f64) -> Result<DriftConstants> {
    drift_constants_with(dom, drift, delta, DEFAULT_SAMPLES)
}

pub fn drift_constants_with(
    dom: &DomainSpec,
    drift: &DriftSpec,
    delta: f64,
    intervals: usize,
) -> Result<DriftConstants> {
    let pts = dom.sample_points(intervals)?;
    let (mut max_abs, mut max_comb) = (0.0_f64, f64::NEG_INFINITY);
    for &(u, v) in &pts {
        let (d1, d2) = drift.radial_derivatives(dom, u, v);
        max_abs = max_abs.max(d1.abs());
        max_comb = max_comb.max(2.0 * d2 - d1 * d1);
    }
    let scale = delta * delta;
    Ok(DriftConstants {
        c0: scale * max_abs,
        c1: scale * max_comb,
        intervals,
        samples: pts.len(),
    })
}

/// Largest `|2 div(phi grad eta) - phi |grad eta|^2|` over cell centres of an
/// `intervals x intervals` grid on the wedge chart.
pub fn eta_residual(tensor: &TensorSpec, drift: &DriftSpec, dom: &DomainSpec, intervals: usize) -> Result<f64> {
    let w = dom
        .wedge()
        .ok_or_else(|| Error::Unsupported("eta_residual needs a wedge domain".into()))?;
    if intervals == 0 {
        return domain("eta_residual needs at least one interval");
    }
    let (phi, eta) = (tensor.phi(), drift.eta());
    let (ht, hth) = (w.length() / intervals as f64, w.width() / intervals as f64);
    let mut worst = 0.0_f64;
    for i in 0..intervals {
        let t = (i as f64 + 0.5) * ht;
        for j in 0..intervals {
            let th = w.theta0 + (j as f64 + 0.5) * hth;
            let p = phi.value(t, th);
            let dp = phi.gradient(t, th);
            let g = eta.gradient(t, th);
            let h = eta.hessian(t, th);
            let s2 = th.sin().powi(2);
            let div = s2 * (p * (h[0][0] + h[1][1]) + dp[0] * g[0] + dp[1] * g[1]);
            let quad = p * s2 * (g[0] * g[0] + g[1] * g[1]);
            worst = worst.max((2.0 * div - quad).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_3;

    fn example_wedge(ell: f64) -> Result<DomainSpec> {
        let t = TensorSpec::sin_theta(FRAC_PI_3, 2.0 * FRAC_PI_3)?;
        make_wedge(ell, FRAC_PI_3, 2.0 * FRAC_PI_3, t)
    }

    #[test]
    fn example_wedge_accepted_with_expected_limit() {
        let d = example_wedge(1.0).unwrap();
        let w = d.wedge().unwrap();
        assert!((w.tensor.eps() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        // Direct evaluation of the ratio with eps = sqrt(3)/2, delta = 1, s = 3/4.
        let (e, s) = (3f64.sqrt() / 2.0, 0.75);
        let ratio = (4.0 * e * s - 1.0) / (4.0 - e * s);
        assert!((w.admissibility_ratio() - ratio).abs() < 1e-14);
        assert!((ratio - 0.4770).abs() < 1e-4);
        assert!((w.max_admissible_ell() - (9.0 * ratio).sqrt()).abs() < 1e-12);
        assert!((w.max_admissible_ell() - 2.072).abs() < 1e-3);
        assert!(example_wedge(2.07).is_ok());
        assert!(matches!(example_wedge(2.08), Err(Error::Constraint { .. })));
    }

    #[test]
    fn narrow_theta_star_rejected() {
        let t = TensorSpec::sin_theta(PI / 8.0, 2.0 * FRAC_PI_3).unwrap();
        match make_wedge(1.0, PI / 8.0, 2.0 * FRAC_PI_3, t) {
            Err(Error::Constraint { name, lhs, rhs }) => {
                assert_eq!(name, "theta_star > pi/6");
                assert_eq!(lhs, PI / 8.0);
                assert_eq!(rhs, FRAC_PI_6);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn weak_ellipticity_rejected() {
        let phi = ScalarField::constant(1.0);
        let t = TensorSpec::new(phi, 0.2, 1.0, true).unwrap();
        assert!(matches!(
            make_wedge(0.5, 1.3, 1.8, t),
            Err(Error::Constraint { name: "eps > delta/4", .. })
        ));
    }

    #[test]
    fn tensor_bounds_are_enforced() {
        let t = TensorSpec::new(ScalarField::new("theta", |_, th| th), 1.0, 1.5, true).unwrap();
        assert!(matches!(make_wedge(0.5, 1.2, 1.9, t), Err(Error::Coefficient(_))));
        let radial = TensorSpec::new(ScalarField::new("1+t/100", |t, _| 1.0 + t / 100.0), 1.0, 1.1, true).unwrap();
        assert!(matches!(make_wedge(0.5, 1.3, 1.8, radial), Err(Error::Coefficient(_))));
        assert!(make_wedge(1.0, 1.0, 1.0, TensorSpec::identity()).is_err());
    }

    #[test]
    fn annulus_inner_radius_matches_root_of_quadratic() {
        let d = make_annulus(2, 0.0, 1.0, 10.0, 0.1).unwrap();
        let a = d.annulus().unwrap();
        // P(x) = c x^2 - 2 (n-1)(kappa1 + alpha) x - 2; acceptance means R lies
        // beyond the positive root, and inner^2 = R^2 - P(R)/c.
        let p = |x: f64| x * x - 2.0 * 0.1 * x - 2.0;
        let (mut lo, mut hi) = (0.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!(lo < 10.0);
        assert!((a.inner * a.inner - (100.0 - p(10.0))).abs() < 1e-12);
        assert!((a.inner - 2.0).abs() < 1e-14);
        let (m, c) = (0.1, 1.0);
        let threshold = (m + (m * m + 2.0 * c as f64).sqrt()) / c;
        assert!((lo - threshold).abs() < 1e-12);
        assert_eq!(d.origin_distance, Some(a.inner));
    }

    #[test]
    fn annulus_threshold_rejected() {
        match make_annulus(2, 0.0, 1.0, 1.0, 0.1) {
            Err(Error::Constraint { lhs, rhs, .. }) => assert!(lhs <= rhs),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_drift_has_zero_constants() {
        let d = make_annulus(3, 1.0, 2.0, 8.0, 0.5).unwrap();
        let k = drift_constants(&d, &DriftSpec::constant(3.0), 1.7).unwrap();
        assert_eq!((k.c0, k.c1), (0.0, 0.0));
        assert_eq!(k.intervals, DEFAULT_SAMPLES);
    }

    #[test]
    fn log_drift_has_zero_c1() {
        let d = make_annulus(2, 1.0, 3.0, 5.0, 0.2).unwrap();
        let k = drift_constants(&d, &DriftSpec::radial_log(), 1.0).unwrap();
        assert!(k.c1.abs() < 1e-12, "{}", k.c1);
        assert!(k.c0 > 0.0);
        let fd = DriftSpec::new(ScalarField::new("-2 ln r", |r: f64, _| -2.0 * r.ln()));
        let k = drift_constants(&d, &fd, 1.0).unwrap();
        assert!(k.c1.abs() < 1e-5, "{}", k.c1);
    }

    #[test]
    fn quadratic_drift_annulus_identity() {
        for &(n, k1, c, r, alpha, delta) in &[
            (2, 0.0, 1.0, 10.0, 0.1, 1.0),
            (3, 1.0, 2.0, 8.0, 0.5, 1.3),
            (5, 0.3, 0.7, 40.0, 0.05, 2.0),
        ] {
            let d = make_annulus(n, k1, c, r, alpha).unwrap();
            let k = drift_constants(&d, &DriftSpec::radial_quadratic(c), delta).unwrap();
            let lhs = 2.0 * k.c0 * (n - 1) as f64 * (k1 + alpha) + k.c1;
            assert!(lhs.abs() <= 1e-9 * k.c1.abs(), "{lhs}");
        }
    }

    #[test]
    fn drift_constants_monotone_under_refinement() {
        let d = make_annulus(2, 0.5, 1.0, 12.0, 0.3).unwrap();
        let eta = ScalarField::new("wobbly", |r: f64, w: f64| (1.3 * r).sin() * (1.0 + 0.3 * (3.0 * w).cos()));
        let drift = DriftSpec::new(eta);
        let levels: Vec<_> = [64, 128, 256]
            .iter()
            .map(|&n| drift_constants_with(&d, &drift, 1.0, n).unwrap())
            .collect();
        for pair in levels.windows(2) {
            assert!(pair[1].c0 >= pair[0].c0);
            assert!(pair[1].c1 >= pair[0].c1);
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let d = example_wedge(1.0).unwrap();
        for drift in [DriftSpec::wedge_angular(), DriftSpec::wedge_radial(1.0)] {
            let eta = drift.eta();
            for &(t, th) in &[(0.3, 1.2), (1.7, 1.5), (2.5, 1.9)] {
                let (g, fd) = (eta.gradient(t, th), eta.fd_gradient(t, th));
                let (h, fdh) = (eta.hessian(t, th), eta.fd_hessian(t, th));
                for i in 0..2 {
                    assert!((g[i] - fd[i]).abs() < 1e-8 * (1.0 + g[i].abs()));
                    for j in 0..2 {
                        assert!((h[i][j] - fdh[i][j]).abs() < 1e-5 * (1.0 + h[i][j].abs()));
                    }
                }
            }
        }
        let _ = d;
    }

    #[test]
    fn fallback_difference_error_is_second_order() {
        let f = |t: f64| (2.0 * t).sin();
        let exact = 2.0 * (2.0_f64 * 0.4).cos();
        let err = |h: f64| ((f(0.4 + h) - f(0.4 - h)) / (2.0 * h) - exact).abs();
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn example_drifts_are_admissible() {
        let d = example_wedge(1.0).unwrap();
        let t = d.wedge().unwrap().tensor.clone();
        let r1 = eta_residual(&t, &DriftSpec::wedge_angular(), &d, 512).unwrap();
        let r2 = eta_residual(&t, &DriftSpec::wedge_radial(1.0), &d, 512).unwrap();
        assert!(r1 < 1e-8, "{r1}");
        assert!(r2 < 1e-8, "{r2}");
        assert_eq!(eta_residual(&t, &DriftSpec::constant(2.0), &d, 64).unwrap(), 0.0);
        let bad = DriftSpec::new(DriftSpec::wedge_angular().eta().scaled(1.1));
        assert!(eta_residual(&t, &bad, &d, 512).unwrap() > 1e-2);
    }

    #[test]
    fn eta_residual_gauge_invariant() {
        let d = example_wedge(1.0).unwrap();
        let t = d.wedge().unwrap().tensor.clone();
        let eta = ScalarField::new("mix", |u: f64, th: f64| 0.2 * u * th.cos() + th * th);
        let a = eta_residual(&t, &DriftSpec::new(eta.clone()), &d, 64).unwrap();
        let b = eta_residual(&t, &DriftSpec::new(eta.shifted(5.0)), &d, 64).unwrap();
        assert!((a - b).abs() <= 1e-6 * a.max(1.0));
    }

    #[test]
    fn riemannian_norms_on_polar_chart() {
        // eta = r^2/2 on H^2(-1): |grad| = r, |Hess|^2 = 1 + (r coth r)^2
        let d = make_ball(2, 1.0, 3.0, 0).unwrap();
        let drift = DriftSpec::radial_quadratic(1.0);
        for r in [0.5, 1.0, 2.5] {
            assert!((drift.gradient_norm(&d, r, 0.4) - r).abs() < 1e-12);
            let expect = (1.0 + (r / r.tanh()).powi(2)).sqrt();
            assert!((drift.hessian_norm(&d, r, 0.4) - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn riemannian_norms_on_euclidean_square() {
        let d = unit_square();
        let eta = ScalarField::new("x^2+y^2", |x, y| x * x + y * y);
        let drift = DriftSpec::new(eta);
        let (x, y) = (0.3, 0.6);
        assert!((drift.gradient_norm(&d, x, y) - 2.0 * x.hypot(y)).abs() < 1e-8);
        assert!((drift.hessian_norm(&d, x, y) - 8f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn half_plane_radial_second_derivative() {
        // eta = ln y is linear in the horocyclic distance: eta'' = 0.
        let d = half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).unwrap();
        let drift = DriftSpec::new(
            ScalarField::new("ln y", |_, y: f64| y.ln())
                .with_gradient(|_, y| [0.0, 1.0 / y])
                .with_hessian(|_, y| [[0.0, 0.0], [0.0, -1.0 / (y * y)]]),
        );
        let (d1, d2) = drift.radial_derivatives(&d, 0.5, 1.5);
        assert!((d1 - 1.0).abs() < 1e-15);
        assert!(d2.abs() < 1e-15);
    }

    #[test]
    fn wedge_diameter_is_attained_at_corners() {
        let d = example_wedge(1.0).unwrap();
        let w = d.wedge().unwrap();
        let diam = w.diameter(200).unwrap();
        let corner = hyperbolic_distance(
            HalfPlanePoint::from_polar(1.0, w.theta0),
            HalfPlanePoint::from_polar(PI.exp(), w.theta1),
            1.0,
        )
        .unwrap();
        assert!(diam >= corner);
        assert!((diam - 3.4515).abs() < 1e-3, "{diam}");
    }

    proptest! {
        #[test]
        fn accepted_wedges_satisfy_constraints(
            ell in 0.05..3.0f64,
            a in 0.55..1.5f64,
            b in 1.6..2.6f64,
        ) {
            let Ok(t) = TensorSpec::sin_theta(a, b) else { return Ok(()); };
            if let Ok(d) = make_wedge(ell, a, b, t) {
                let w = d.wedge().unwrap();
                // Independent re-check.
                let ts = a.min(PI - b);
                let (e, de) = (a.sin().min(b.sin()), 1.0);
                prop_assert!(ts > PI / 6.0);
                prop_assert!(e > de / 4.0);
                let s = ts.sin() * ts.sin();
                let rhs = PI * PI / ((b - a) * (b - a)) * (4.0 * e * s - de) / (4.0 * de - e * s);
                prop_assert!(rhs >= ell * ell);
                prop_assert_eq!(w.ell, ell);
            }
        }

        #[test]
        fn accepted_annuli_are_nonempty(
            n in 2usize..6, k1 in 0.0..2.0f64, c in 0.1..5.0f64, r in 0.5..50.0f64, alpha in 0.01..1.0f64,
        ) {
            if let Ok(d) = make_annulus(n, k1, c, r, alpha) {
                let a = d.annulus().unwrap();
                prop_assert!(a.inner * a.inner < r * r);
                let k = drift_constants_with(&d, &DriftSpec::radial_quadratic(c), 1.0, 16).unwrap();
                let lhs = 2.0 * k.c0 * (n - 1) as f64 * (k1 + alpha) + k.c1;
                prop_assert!(lhs.abs() <= 1e-9 * k.c1.abs().max(1e-300));
            }
        }
    }
}
