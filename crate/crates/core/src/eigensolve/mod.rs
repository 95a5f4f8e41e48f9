//! Lowest eigenpairs of the symmetric pencil `K u = lambda M u`.
//!
//! Two independent routes:
//!
//! * dense: Cholesky of `M`, reduction to a standard symmetric problem and a
//!   full symmetric eigendecomposition (backed by `faer`);
//! * iterative: banded Cholesky of `K` and block shift-invert iteration with
//!   Rayleigh-Ritz and locking (see [`subspace`]).
//!
//! [`SolverPath::Auto`] picks the dense route only for small pencils; on a
//! single core the dense route costs tens of seconds at 4000 unknowns.

mod banded;
mod dense;
pub mod sparse;
mod subspace;
pub mod tridiag;

use serde::{Deserialize, Serialize};

pub use banded::{BandCholesky, SymBand};
pub use sparse::CsrMatrix;
pub use subspace::{INCREMENT_TOL, MAX_ITERATIONS, RESIDUAL_TOL};
pub use tridiag::SymTridiagonal;

use crate::error::{Error, Result};

/// Largest pencil the automatic policy sends to the dense route.
pub const AUTO_DENSE_LIMIT: usize = 1500;
/// Largest pencil the dense route accepts at all.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    #[default]
    Auto,
    Dense,
    Iterative,
}

impl SolverPath {
    fn resolve(self, dof: usize) -> SolverPath {
        match self {
            SolverPath::Auto if dof <= AUTO_DENSE_LIMIT => SolverPath::Dense,
            SolverPath::Auto => SolverPath::Iterative,
            other => other,
        }
    }
}

/// Provenance of a spectrum.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub source: String,
    pub dof: usize,
    pub grid: Option<(usize, usize)>,
    pub path: Option<SolverPath>,
    pub iterations: usize,
    /// Per-eigenvalue discretization error estimates, when known.
    pub refinement: Option<Vec<f64>>,
}

/// Ascending eigenvalues with M-orthonormal eigenvectors.
///
/// Spectra assembled from 1-D reductions or closed forms carry no vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    /// Values-only spectrum; the input is sorted ascending.
    pub fn from_values(mut values: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite eigenvalue".into()));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        Ok(Self {
            residuals: vec![0.0; values.len()],
            eigenvalues: values,
            eigenvectors: Vec::new(),
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// The first `k` eigenvalues, or an error if fewer are available.
    pub fn leading(&self, k: usize) -> Result<&[f64]> {
        self.eigenvalues.get(..k).ok_or(Error::Insufficient {
            needed: k,
            available: self.len(),
        })
    }
}

pub(crate) struct RawPairs {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    iterations: usize,
}

/// Lowest `count` eigenpairs of `K u = lambda M u`.
pub fn solve_generalized(k: &CsrMatrix, m: &CsrMatrix, count: usize, path: SolverPath) -> Result<Spectrum> {
    let n = k.dim();
    if m.dim() != n {
        return Err(Error::Domain(format!("pencil size mismatch: {} vs {}", n, m.dim())));
    }
    if count == 0 || count > n {
        return Err(Error::Domain(format!("cannot compute {count} eigenpairs of a {n}-dof pencil")));
    }
    if !k.is_symmetric() {
        return Err(Error::Domain("stiffness matrix is not symmetric".into()));
    }
    if !m.is_symmetric() {
        return Err(Error::Domain("mass matrix is not symmetric".into()));
    }
    let path = path.resolve(n);
    let raw = match path {
        SolverPath::Dense if n > DENSE_LIMIT => {
            return Err(Error::Domain(format!("dense path limited to {DENSE_LIMIT} unknowns, got {n}")))
        }
        SolverPath::Dense => dense::solve(k, m, count)?,
        _ => subspace::solve(k, m, count)?,
    };
    let mut order: Vec<usize> = (0..raw.values.len()).collect();
    order.sort_by(|&a, &b| raw.values[a].total_cmp(&raw.values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw.values[i]).collect();
    let mut eigenvectors: Vec<Vec<f64>> = order.iter().map(|&i| raw.vectors[i].clone()).collect();
    let mut residuals = Vec::with_capacity(count);
    for (lam, v) in eigenvalues.iter().zip(eigenvectors.iter_mut()) {
        let mv = m.mul_vec(v);
        let norm = v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let kv = k.mul_vec(v);
        let mv = m.mul_vec(v);
        let r = kv.iter().zip(&mv).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        let mn = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
        residuals.push(r / mn);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        residuals,
        meta: SpectrumMeta {
            source: "pencil".into(),
            dof: n,
            grid: None,
            path: Some(path),
            iterations: raw.iterations,
            refinement: None,
        },
    })
}

/// Number of eigenvalues strictly below `lambda`. Never extrapolates past
/// the largest computed eigenvalue.
pub fn counting_function(spec: &Spectrum, lambda: f64) -> Result<usize> {
    let max = spec.eigenvalues.last().copied().ok_or(Error::Insufficient {
        needed: 1,
        available: 0,
    })?;
    if lambda > max {
        return Err(Error::OutOfRange { value: lambda, max });
    }
    Ok(spec.eigenvalues.partition_point(|&v| v < lambda))
}

/// Number of eigenvalues of the pencil below `sigma`, from the inertia of
/// `K - sigma M`.
pub fn inertia_count(k: &CsrMatrix, m: &CsrMatrix, sigma: f64) -> usize {
    SymBand::from_pencil(k, m, sigma).negative_pivots()
}
