//! Dirichlet spectra of weighted divergence-form operators
//! `L u = div(T grad u) - <grad eta, T grad u>` with `T = phi I`, on bounded
//! domains of the hyperbolic plane, hyperbolic space (radial reduction) and
//! Euclidean space, plus checkers for the universal eigenvalue inequalities,
//! the wedge gap bounds and Weyl asymptotics.
//!
//! The crate is organised bottom up:
//!
//! * [`geometry`]: comparison functions, model distances, closed-form constants.
//! * [`field`] and [`domains`]: scalar fields, tensors, drifts and domain families.
//! * [`sturm_liouville`]: 1-D Dirichlet problems (wedge cross sections, geodesic balls).
//! * [`assembly2d`]: 5-point pencils on conformal and polar charts.
//! * [`eigensolve`]: sparse/banded storage and the generalized symmetric eigensolvers.
//! * [`inequalities`]: bound evaluators and pass/fail reports.

pub mod assembly2d;
pub mod domains;
pub mod eigensolve;
mod error;
pub mod field;
pub mod geometry;
pub mod inequalities;
pub mod sturm_liouville;

pub use domains::{
    drift_constants, eta_residual, make_annulus, make_wedge, DomainSpec, DomainVariant, DriftSpec,
    Model, TensorSpec,
};
pub use eigensolve::{counting_function, solve_generalized, SolverPath, Spectrum};
pub use error::{Error, Result};
pub use field::ScalarField;
pub use geometry::{CurvaturePinch, ComparisonValue, HalfPlanePoint};
pub use inequalities::{InequalityReport, Status};
pub use sturm_liouville::{sl_eigs, SLProblem, SLSolution};
pub use assembly2d::{assemble, conformal_chart, spectrum_2d, ConformalChart, Pencil};
