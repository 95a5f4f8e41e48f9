//! Shared inputs for the benchmarks.

use std::f64::consts::{FRAC_PI_3, PI};

use spectral_core::domains::{half_plane_rectangle, make_wedge, DomainSpec, TensorSpec};
use spectral_core::eigensolve::{Spectrum, SpectrumMeta};

/// Wedge with `ell = 1` between `pi/3` and `2 pi/3`, `phi = sin(theta)`.
pub fn sixty_degree_wedge() -> DomainSpec {
    let (t0, t1) = (FRAC_PI_3, 2.0 * FRAC_PI_3);
    make_wedge(1.0, t0, t1, TensorSpec::sin_theta(t0, t1).expect("valid angles")).expect("valid wedge")
}

pub fn unit_half_plane_rectangle() -> DomainSpec {
    half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).expect("valid rectangle")
}

/// Lowest `count` Dirichlet eigenvalues of the unit square.
pub fn square_lattice(count: usize) -> Spectrum {
    let side = (count as f64).sqrt().ceil() as usize * 2;
    let mut v: Vec<f64> = (1..=side)
        .flat_map(|p| (1..=side).map(move |q| PI * PI * ((p * p + q * q) as f64)))
        .collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    Spectrum::from_values(v, SpectrumMeta::default()).expect("finite values")
}
