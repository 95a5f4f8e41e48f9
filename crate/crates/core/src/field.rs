//! Scalar fields on two-dimensional chart coordinates.

use std::fmt;
use std::sync::Arc;

type ValueFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type GradientFn = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;
type HessianFn = dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync;

/// Step of the centered difference used when no analytic gradient is given.
pub const FD_STEP: f64 = 1e-5;
/// Step for second differences of values; larger than [`FD_STEP`] to keep
/// rounding error in check.
pub const FD_STEP_SECOND: f64 = 1e-4;

/// A smooth function of the chart coordinates `(u, v)`, optionally carrying
/// analytic first and second partial derivatives.
///
/// Cloning is cheap: the closures are shared.
#[derive(Clone)]
pub struct ScalarField {
    label: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
    hessian: Option<Arc<HessianFn>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(label: impl Into<String>, value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            gradient: None,
            hessian: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_, _| c)
            .with_gradient(|_, _| [0.0, 0.0])
            .with_hessian(|_, _| [[0.0, 0.0], [0.0, 0.0]])
    }

    pub fn with_gradient(mut self, g: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(
        mut self,
        h: impl Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn has_analytic_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn value(&self, u: f64, v: f64) -> f64 {
        (self.value)(u, v)
    }

    /// `[f_u, f_v]`, analytic when available.
    pub fn gradient(&self, u: f64, v: f64) -> [f64; 2] {
        match &self.gradient {
            Some(g) => g(u, v),
            None => self.fd_gradient(u, v),
        }
    }

    /// Centered differences of the value, ignoring any analytic gradient.
    pub fn fd_gradient(&self, u: f64, v: f64) -> [f64; 2] {
        let h = FD_STEP;
        let f = |a, b| self.value(a, b);
        [
            (f(u + h, v) - f(u - h, v)) / (2.0 * h),
            (f(u, v + h) - f(u, v - h)) / (2.0 * h),
        ]
    }

    /// Symmetric matrix of second partials, analytic when available. The
    /// fallback differentiates the analytic gradient if there is one and
    /// the values otherwise.
    pub fn hessian(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        if let Some(h) = &self.hessian {
            return h(u, v);
        }
        if let Some(g) = &self.gradient {
            let h = FD_STEP;
            let (gu_p, gu_m) = (g(u + h, v), g(u - h, v));
            let (gv_p, gv_m) = (g(u, v + h), g(u, v - h));
            let uu = (gu_p[0] - gu_m[0]) / (2.0 * h);
            let vv = (gv_p[1] - gv_m[1]) / (2.0 * h);
            let uv = 0.5 * ((gu_p[1] - gu_m[1]) + (gv_p[0] - gv_m[0])) / (2.0 * h);
            return [[uu, uv], [uv, vv]];
        }
        self.fd_hessian(u, v)
    }

    /// Second differences of the value.
    pub fn fd_hessian(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        let h = FD_STEP_SECOND;
        let f = |a, b| self.value(a, b);
        let c = f(u, v);
        let uu = (f(u + h, v) - 2.0 * c + f(u - h, v)) / (h * h);
        let vv = (f(u, v + h) - 2.0 * c + f(u, v - h)) / (h * h);
        let uv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
        [[uu, uv], [uv, vv]]
    }

    /// `s * f`, with derivatives scaled alike.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.clone();
        let mut out = Self::new(format!("{s}*({})", self.label), move |u, v| s * inner.value(u, v));
        if let Some(g) = self.gradient.clone() {
            out.gradient = Some(Arc::new(move |u, v| {
                let d = g(u, v);
                [s * d[0], s * d[1]]
            }));
        }
        if let Some(h) = self.hessian.clone() {
            out.hessian = Some(Arc::new(move |u, v| {
                let d = h(u, v);
                [[s * d[0][0], s * d[0][1]], [s * d[1][0], s * d[1][1]]]
            }));
        }
        out
    }

    /// `f + c`; derivatives are unchanged.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.clone();
        let mut out = Self::new(format!("({})+{c}", self.label), move |u, v| inner.value(u, v) + c);
        out.gradient = self.gradient.clone();
        out.hessian = self.hessian.clone();
        out
    }
}
