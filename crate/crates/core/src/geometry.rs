//! Comparison functions and closed-form constants of the model spaces.
//!
//! Curvatures enter the public API as magnitudes: a space of constant
//! curvature `-k^2` is described by `k >= 0`. The only exceptions are [`sn`]
//! and [`hessian_ratio`], which take the signed ODE parameter.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Below this argument `coth` is evaluated by its Laurent series.
const COTH_SERIES_CUTOFF: f64 = 1e-4;

/// Sectional curvature pinching `-kappa1^2 <= K <= -kappa2^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePinch {
    kappa1: f64,
    kappa2: f64,
}

impl CurvaturePinch {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self> {
        if !(kappa2 >= 0.0 && kappa2 <= kappa1) || !kappa1.is_finite() {
            return domain(format!(
                "curvature pinch needs 0 <= kappa2 <= kappa1, got kappa1={kappa1}, kappa2={kappa2}"
            ));
        }
        Ok(Self { kappa1, kappa2 })
    }

    /// Constant curvature `-kappa^2`.
    pub fn constant(kappa: f64) -> Result<Self> {
        Self::new(kappa, kappa)
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }
}

/// Interval `[lo, hi]` enclosing the Cheng-Yau operator of the distance function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonValue {
    pub lo: f64,
    pub hi: f64,
}

impl ComparisonValue {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Point of the upper half-plane model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean polar coordinates `(r, theta)` to half-plane point.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        domain(format!("radius must be positive and finite, got {r}"))
    }
}

/// Solution of `x'' + kappa x = 0`, `x(0) = 0`, `x'(0) = 1`, evaluated at `r`.
pub fn sn(kappa: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(if kappa < 0.0 {
        let s = (-kappa).sqrt();
        (s * r).sinh() / s
    } else if kappa == 0.0 {
        r
    } else {
        let s = kappa.sqrt();
        (s * r).sin() / s
    })
}

/// `coth(x)` for `x > 0`, switching to the series near zero.
pub(crate) fn coth(x: f64) -> f64 {
    if x < COTH_SERIES_CUTOFF {
        1.0 / x + x / 3.0 - x * x * x / 45.0
    } else {
        1.0 / x.tanh()
    }
}

/// `sn'/sn` for a nonpositive curvature parameter.
pub fn hessian_ratio(kappa: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    if kappa > 0.0 {
        return domain(format!("hessian_ratio expects kappa <= 0, got {kappa}"));
    }
    if kappa == 0.0 {
        return Ok(1.0 / r);
    }
    let s = (-kappa).sqrt();
    Ok(s * coth(s * r))
}

fn check_ellipticity(n: usize, eps: f64, delta: f64) -> Result<()> {
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    if !(eps > 0.0 && eps <= delta && delta.is_finite()) {
        return domain(format!("need 0 < eps <= delta, got eps={eps}, delta={delta}"));
    }
    Ok(())
}

/// Bounds on `box r = <Hess r, T>` for `eps <= T <= delta` under the pinching.
pub fn box_r_bounds(
    n: usize,
    eps: f64,
    delta: f64,
    pinch: CurvaturePinch,
    r: f64,
) -> Result<ComparisonValue> {
    check_ellipticity(n, eps, delta)?;
    let m = (n - 1) as f64;
    let lo = m * eps * hessian_ratio(-pinch.kappa2 * pinch.kappa2, r)?;
    let hi = m * delta * hessian_ratio(-pinch.kappa1 * pinch.kappa1, r)?;
    Ok(ComparisonValue { lo, hi })
}

/// `a(n, eps, delta) = -(n-1)^2 eps^2 + 2 (n-1) delta^2`.
pub fn a_const(n: usize, eps: f64, delta: f64) -> Result<f64> {
    check_ellipticity(n, eps, delta)?;
    let m = (n - 1) as f64;
    Ok(-m * m * eps * eps + 2.0 * m * delta * delta)
}

/// Distance in the half-plane model of curvature `-kappa^2`.
///
/// Uses `d = (2/kappa) asinh(|p - q| / (2 sqrt(y_p y_q)))`, which is the
/// cancellation-free form of `cosh(kappa d) = 1 + |p - q|^2 / (2 y_p y_q)`.
pub fn hyperbolic_distance(p: HalfPlanePoint, q: HalfPlanePoint, kappa: f64) -> Result<f64> {
    if !(p.y > 0.0 && q.y > 0.0) {
        return domain(format!(
            "half-plane points need positive height, got {} and {}",
            p.y, q.y
        ));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
    }
    let chord = (p.x - q.x).hypot(p.y - q.y);
    Ok(2.0 * (chord / (2.0 * (p.y * q.y).sqrt())).asinh() / kappa)
}
