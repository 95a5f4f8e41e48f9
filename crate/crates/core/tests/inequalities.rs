use std::f64::consts::{FRAC_PI_3, PI};

use proptest::prelude::*;

use spectral_core::assembly2d::{assemble, conformal_chart, richardson_spectrum, spectrum_2d};
use spectral_core::domains::{
    drift_constants_with, half_plane_rectangle, make_annulus, make_wedge, DriftSpec, TensorSpec,
};
use spectral_core::eigensolve::{SolverPath, Spectrum, SpectrumMeta};
use spectral_core::inequalities::{
    check_gap, check_lambda1, check_recursions, check_pinched, check_universal, check_weyl, lambda1_lower,
    reports_to_json, universal_first_eigenvalue, upsilon, upsilon_universal, InequalityReport, PinchedParams,
    UniversalParams,
};
use spectral_core::sturm_liouville::{ball_problem, ball_spectrum, gap_wedge, sl_eigs};
use spectral_core::ScalarField;

fn spectrum(mut v: Vec<f64>) -> Spectrum {
    v.sort_by(f64::total_cmp);
    Spectrum::from_values(v, SpectrumMeta::default()).unwrap()
}

fn same_bits(a: &InequalityReport, b: &InequalityReport) -> bool {
    let eq = |x: f64, y: f64| x.to_bits() == y.to_bits();
    a.name == b.name
        && a.k == b.k
        && eq(a.lhs, b.lhs)
        && eq(a.rhs, b.rhs)
        && eq(a.margin, b.margin)
        && eq(a.slack, b.slack)
        && a.pass == b.pass
        && a.status == b.status
        && a.note == b.note
        && a.inputs == b.inputs
}

fn eigen_list() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..500.0, 8..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reports_recompute_bit_identically(values in eigen_list(), n in 2usize..6, eps in 0.2f64..1.0,
                                         spread in 1.0f64..3.0, k1 in 0.1f64..2.0, pinch in 0.3f64..1.0,
                                         d in 0.5f64..50.0, c0 in 0.0f64..2.0, c1 in -2.0f64..2.0) {
        let s = spectrum(values);
        let delta = eps * spread;
        let up = UniversalParams::new(n, eps, delta, k1).unwrap();
        let tp = PinchedParams::new(n, eps, delta, k1, k1 * pinch, d, c0, c1).unwrap();
        let mut reps = vec![universal_first_eigenvalue(&s, &up).unwrap(), check_lambda1(&s, &tp).unwrap()];
        for k in 1..=5 {
            reps.push(check_universal(&s, &up, k).unwrap());
            reps.push(check_pinched(&s, &tp, k).unwrap());
            reps.extend(check_recursions(&upsilon(&s, &tp).unwrap(), k).unwrap());
        }
        for r in &reps {
            prop_assert!(same_bits(r, &r.recompute().unwrap()), "{}", r.name);
        }
        // JSON keeps the inputs exactly, so recomputing after a round trip agrees too.
        let back: Vec<InequalityReport> = serde_json::from_str(&reports_to_json(&reps).unwrap()).unwrap();
        for (a, b) in reps.iter().zip(&back) {
            prop_assert!(same_bits(a, &b.recompute().unwrap()));
        }
    }

    #[test]
    fn zero_curvature_is_the_classical_inequality(values in eigen_list(), k in 1usize..7) {
        let s = spectrum(values);
        let r = check_universal(&s, &UniversalParams::new(3, 1.0, 1.0, 0.0).unwrap(), k).unwrap();
        let top = s.eigenvalues[k];
        let lhs: f64 = s.eigenvalues[..k].iter().map(|l| (top - l).powi(2)).sum();
        let rhs: f64 = s.eigenvalues[..k].iter().map(|l| 4.0 * (top - l) * l).sum();
        prop_assert_eq!(r.lhs, lhs);
        prop_assert!((r.rhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn radially_constant_drift_is_invisible(a in -2.0f64..2.0, b in 0.5f64..4.0, shift in -5.0f64..5.0, k in 1usize..5) {
        // On a half-plane rectangle the radial field is y d/dy; eta(x) is constant along it.
        let dom = half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).unwrap();
        let radial = DriftSpec::new(ScalarField::new("a sin(b x)", move |x, _| a * (b * x).sin()));
        let dr = drift_constants_with(&dom, &radial, 1.0, 32).unwrap();
        let dc = drift_constants_with(&dom, &DriftSpec::constant(shift), 1.0, 32).unwrap();
        let s = spectrum((1..=8).map(|i| i as f64 * 1.7).collect());
        let pa = PinchedParams::new(2, 1.0, 1.0, 1.0, 1.0, 0.5, dr.c0, dr.c1).unwrap();
        let pb = PinchedParams::new(2, 1.0, 1.0, 1.0, 1.0, 0.5, dc.c0, dc.c1).unwrap();
        prop_assert_eq!(check_pinched(&s, &pa, k).unwrap(), check_pinched(&s, &pb, k).unwrap());
        prop_assert_eq!(lambda1_lower(&pa), lambda1_lower(&pb));
    }

    #[test]
    fn annulus_drift_term_vanishes(n in 2usize..6, k1 in 0.0f64..2.0, c in 0.5f64..20.0, alpha in 0.05f64..2.0, extra in 0.01f64..2.0) {
        let m = (n - 1) as f64 * (k1 + alpha);
        let outer = (m + (m * m + 2.0 * c).sqrt()) / c * (1.0 + extra);
        let dom = make_annulus(n, k1, c, outer, alpha).unwrap();
        let dc = drift_constants_with(&dom, &DriftSpec::radial_quadratic(c), 1.7, 16).unwrap();
        let p = PinchedParams::new(n, 1.0, 1.7, k1, k1, 1.0 / alpha, dc.c0, dc.c1).unwrap();
        let scale = 2.0 * dc.c0 * (n - 1) as f64 * (k1 + alpha);
        prop_assert!(p.drift_term().abs() <= 1e-9 * scale, "{} vs {}", p.drift_term(), scale);
    }

    #[test]
    fn upsilon_inherits_ordering(values in eigen_list(), eps in 0.2f64..1.0, spread in 1.0f64..3.0) {
        let s = spectrum(values);
        let u = upsilon_universal(&s, &UniversalParams::new(2, eps, eps * spread, 1.0).unwrap()).unwrap();
        prop_assert!(u.values.windows(2).all(|w| w[0] <= w[1]));
        let scale = 4.0 * (eps * spread).powi(2) / eps;
        for (l, y) in s.eigenvalues.iter().zip(&u.values) {
            prop_assert!((y - (scale * l + u.constants.shift)).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn constant_sequence_passes_every_recursion(c in 0.01f64..100.0, eps in 0.2f64..1.0, spread in 1.0f64..3.0, k in 1usize..8) {
        let p = UniversalParams::new(2, eps, eps * spread, 0.0).unwrap();
        let scale = 4.0 * (eps * spread).powi(2) / eps;
        let u = upsilon_universal(&spectrum(vec![c / scale; 9]), &p).unwrap();
        let reps = check_recursions(&u, k).unwrap();
        prop_assert!(reps.iter().all(|r| r.pass));
    }
}

#[test]
fn mckean_bound_holds_on_computed_spectra() {
    // T = I, eta constant, kappa1 = kappa2 = 1: bound 1/4 in the hyperbolic plane.
    let p = PinchedParams::new(2, 1.0, 1.0, 1.0, 1.0, f64::INFINITY, 0.0, 0.0).unwrap();
    assert!((lambda1_lower(&p).value - 0.25).abs() < 1e-15);
    for (x, y) in [((0.0, 1.0), (1.0, 2.0)), ((-3.0, 3.0), (0.2, 5.0))] {
        let chart = conformal_chart(&half_plane_rectangle(x, y, 1.0).unwrap()).unwrap();
        let s = spectrum_2d(&assemble(&chart, &TensorSpec::identity(), &DriftSpec::zero(), (32, 32)).unwrap(), 1, SolverPath::Auto)
            .unwrap();
        assert!(check_lambda1(&s, &p).unwrap().pass);
    }
    for a in [0.5, 3.0, 10.0] {
        let s = ball_spectrum(2, 1.0, a, 1, 1024).unwrap();
        assert!(check_lambda1(&s, &p).unwrap().pass);
    }
}

#[test]
fn first_eigenvalue_shrinks_on_nested_domains() {
    // Geodesic balls and half-plane rectangles, each nested in the next.
    let mut prev = f64::INFINITY;
    for a in [0.5, 1.0, 1.5, 3.0, 6.0] {
        let l = sl_eigs(&ball_problem(3, 1.0, a, 0).unwrap(), 1, 2048).unwrap().extrapolated[0];
        assert!(l < prev);
        prev = l;
    }
    let mut prev = f64::INFINITY;
    for (x, y) in [((0.0, 1.0), (1.0, 2.0)), ((-0.5, 1.5), (0.8, 2.5)), ((-2.0, 3.0), (0.5, 4.0))] {
        let chart = conformal_chart(&half_plane_rectangle(x, y, 1.0).unwrap()).unwrap();
        let r = richardson_spectrum(&chart, &TensorSpec::identity(), &DriftSpec::zero(), (32, 32), 1, SolverPath::Auto)
            .unwrap();
        assert!(r.extrapolated[0] < prev);
        prev = r.extrapolated[0];
    }
}

#[test]
fn variable_tensor_universal_inequality() {
    // phi depends on x only, so T grad ln y = phi grad ln y with phi radially constant.
    let phi = ScalarField::new("1 + x^2", |x, _| 1.0 + x * x);
    let tensor = TensorSpec::new(phi, 1.0, 2.0, false).unwrap();
    let chart = conformal_chart(&half_plane_rectangle((0.0, 1.0), (1.0, 3.0), 1.0).unwrap()).unwrap();
    let s = spectrum_2d(&assemble(&chart, &tensor, &DriftSpec::zero(), (40, 40)).unwrap(), 9, SolverPath::Auto).unwrap();
    let p = UniversalParams::new(2, 1.0, 2.0, 1.0).unwrap();
    assert!(universal_first_eigenvalue(&s, &p).unwrap().pass);
    for k in 1..=8 {
        let r = check_universal(&s, &p, k).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn ball_upsilon_tends_to_zero() {
    let p = UniversalParams::new(2, 1.0, 1.0, 1.0).unwrap();
    let mut prev = f64::INFINITY;
    for a in [2.0, 4.0, 8.0, 16.0] {
        let l = sl_eigs(&ball_problem(2, 1.0, a, 0).unwrap(), 1, 4096).unwrap().extrapolated[0];
        let u = upsilon_universal(&spectrum(vec![l]), &p).unwrap().values[0];
        assert!(u > 0.0 && u < prev);
        prev = u;
    }
    assert!(prev < 0.2);
}

#[test]
fn example_wedge_gap_reports() {
    let (t0, t1) = (FRAC_PI_3, 2.0 * FRAC_PI_3);
    let dom = make_wedge(1.0, t0, t1, TensorSpec::sin_theta(t0, t1).unwrap()).unwrap();
    let g = gap_wedge(&dom, 1024).unwrap();
    let reps = check_gap(&dom, &g, dom.wedge().unwrap().diameter(128).unwrap()).unwrap();
    assert!(reps.iter().all(|r| !r.is_required_failure()), "{reps:#?}");
    for r in &reps {
        assert!(same_bits(r, &r.recompute().unwrap()));
    }
}

#[test]
fn constant_tensor_attains_upper_bound() {
    // With T = delta I the cross-section problem is exactly solvable and the gap is 3 delta ell^2.
    let delta = 1.5;
    let (t0, t1) = (PI / 2.0 - 0.01, PI / 2.0 + 0.01);
    let dom = make_wedge(0.25, t0, t1, TensorSpec::constant(delta).unwrap()).unwrap();
    let g = gap_wedge(&dom, 8192).unwrap();
    let upper = 3.0 * delta * 0.0625;
    assert!((g.gap() - upper).abs() <= 1e-6 * upper, "{} vs {upper}", g.gap());
    let reps = check_gap(&dom, &g, dom.wedge().unwrap().diameter(64).unwrap()).unwrap();
    assert!(!reps[1].pass, "equality is not strictly below");
}

#[test]
fn weyl_rejects_short_spectra() {
    let s = spectrum((1..50).map(f64::from).collect());
    assert!(check_weyl(&s, 0.1, 2).is_err());
}
