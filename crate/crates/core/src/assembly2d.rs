//! Five-point pencils for `-div(phi grad u) + phi <grad eta, grad u>` with
//! weight `exp(-eta) dvol` and Dirichlet data, on rectangular charts.
//!
//! On a conformal chart `rho (du^2 + dv^2)` the energy
//! `integral of phi e^-eta |grad u|^2 dvol` is `integral of phi e^-eta (u_u^2 + u_v^2) du dv`,
//! so the stiffness matrix never sees `rho`; only the lumped mass
//! `e^-eta rho du dv` does. Polar charts `dr^2 + sn(r)^2 dw^2` carry the
//! factors `sn` and `1/sn` in the two fluxes and are periodic in `w`.
//!
//! Face coefficients are geometric means of the two adjacent node values.
//! A face on the boundary pairs its interior node with the face midpoint, so
//! drifts that blow up on the boundary are never sampled there.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domains::{ConformalFactor, DomainSpec, DomainVariant, DriftSpec, Metric2d, Model, TensorSpec, Warp};
use crate::eigensolve::{solve_generalized, CsrMatrix, SolverPath, Spectrum};
use crate::error::{domain, Error, Result};

/// Rectangular chart of a domain with its metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalChart {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub metric: Metric2d,
    /// Polar charts are periodic in `v`.
    pub v_periodic: bool,
    pub tag: ChartTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartTag {
    Wedge,
    HalfPlane,
    Euclidean,
    Polar,
}

impl ConformalChart {
    /// Area density with respect to `du dv` (`rho` on conformal charts).
    pub fn rho(&self, u: f64, v: f64) -> f64 {
        self.metric.area_density(u, v)
    }

    /// Same rectangle with `rho = 1`.
    pub fn with_unit_factor(mut self) -> Self {
        self.metric = Metric2d::Conformal(ConformalFactor::Unit);
        self
    }

    /// Polar charts whose radial range starts at the centre.
    fn regular_centre(&self) -> bool {
        matches!(self.metric, Metric2d::Polar(_)) && self.u.0 == 0.0
    }
}

/// Chart for wedges, coordinate rectangles, disks, and 2-D balls and annuli.
pub fn conformal_chart(dom: &DomainSpec) -> Result<ConformalChart> {
    let b = dom.chart_box();
    let tag = match (&dom.variant, dom.model) {
        (DomainVariant::Wedge(_), _) => ChartTag::Wedge,
        (DomainVariant::Rectangle(_), Model::Euclidean) => ChartTag::Euclidean,
        (DomainVariant::Rectangle(_), Model::Hyperbolic { .. }) => ChartTag::HalfPlane,
        (DomainVariant::Disk { .. }, _) => ChartTag::Polar,
        (DomainVariant::Ball(ball), _) if ball.n == 2 => ChartTag::Polar,
        (DomainVariant::Annulus(a), _) if a.n == 2 => ChartTag::Polar,
        _ => {
            return Err(Error::Unsupported(
                "2-D assembly needs a wedge, rectangle, disk, or a 2-D ball or annulus".into(),
            ))
        }
    };
    Ok(ConformalChart {
        u: b.u,
        v: b.v,
        metric: dom.metric(),
        v_periodic: b.v_periodic,
        tag,
    })
}

/// `K x = lambda M x` with `M` diagonal.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    /// Unknowns along `u` and `v`.
    pub grid: (usize, usize),
    /// Chart coordinates of each unknown; index `i * grid.1 + j`.
    pub nodes: Vec<(f64, f64)>,
}

impl Pencil {
    pub fn dof(&self) -> usize {
        self.nodes.len()
    }

    /// Write `<stem>_K.mtx` and `<stem>_M.mtx` into `dir`.
    pub fn write_matrix_market(&self, dir: &Path, stem: &str) -> Result<()> {
        for (name, mat) in [("K", &self.k), ("M", &self.m)] {
            let file = std::fs::File::create(dir.join(format!("{stem}_{name}.mtx")))?;
            let mut out = std::io::BufWriter::new(file);
            mat.write_matrix_market(&mut out)?;
        }
        Ok(())
    }
}

/// Grid positions along one axis: interior vertices for Dirichlet ends,
/// cell centres when the left end is a regular centre, all vertices of a
/// periodic axis.
struct Axis {
    lo: f64,
    h: f64,
    nodes: Vec<f64>,
    kind: AxisKind,
}

#[derive(Clone, Copy, PartialEq)]
enum AxisKind {
    Dirichlet,
    RegularLeft,
    Periodic,
}

impl Axis {
    fn new(range: (f64, f64), cells: usize, kind: AxisKind) -> Self {
        let h = (range.1 - range.0) / cells as f64;
        let nodes = match kind {
            AxisKind::Dirichlet => (1..cells).map(|i| range.0 + i as f64 * h).collect(),
            AxisKind::RegularLeft => (1..=cells).map(|i| range.0 + (i as f64 - 0.5) * h).collect(),
            AxisKind::Periodic => (0..cells).map(|i| range.0 + i as f64 * h).collect(),
        };
        Self {
            lo: range.0,
            h,
            nodes,
            kind,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Boundary face position and distance to the left of node 0, if any.
    fn left_boundary(&self) -> Option<(f64, f64)> {
        match self.kind {
            AxisKind::Dirichlet => Some((self.lo, self.h)),
            _ => None,
        }
    }

    /// Boundary position and distance to the right of the last node.
    fn right_boundary(&self) -> Option<(f64, f64)> {
        let last = *self.nodes.last().expect("nonempty axis");
        match self.kind {
            AxisKind::Dirichlet => Some((last + self.h, self.h)),
            AxisKind::RegularLeft => Some((last + 0.5 * self.h, 0.5 * self.h)),
            AxisKind::Periodic => None,
        }
    }
}

/// Assemble the Dirichlet pencil with `cells = (nu, nv)` grid cells.
pub fn assemble(chart: &ConformalChart, tensor: &TensorSpec, drift: &DriftSpec, cells: (usize, usize)) -> Result<Pencil> {
    let (nu, nv) = cells;
    if nu < 2 || nv < 2 {
        return domain(format!("assembly needs at least 2 cells per side, got {nu} x {nv}"));
    }
    if nv < 3 && chart.v_periodic {
        return domain("periodic axis needs at least 3 cells");
    }
    let au = Axis::new(
        chart.u,
        nu,
        if chart.regular_centre() {
            AxisKind::RegularLeft
        } else {
            AxisKind::Dirichlet
        },
    );
    let av = Axis::new(
        chart.v,
        nv,
        if chart.v_periodic {
            AxisKind::Periodic
        } else {
            AxisKind::Dirichlet
        },
    );
    let (mu, mv) = (au.len(), av.len());
    let idx = |i: usize, j: usize| i * mv + j;
    let phi = tensor.phi();
    let eta = drift.eta();

    // ln(phi e^-eta) at a point; positivity and finiteness checked.
    let log_coef = |u: f64, v: f64| -> Result<f64> {
        let p = phi.value(u, v);
        let e = eta.value(u, v);
        if !(p > 0.0 && p.is_finite() && e.is_finite()) {
            return Err(Error::Coefficient(format!("phi = {p}, eta = {e} at ({u}, {v})")));
        }
        Ok(p.ln() - e)
    };
    let warp = match chart.metric {
        Metric2d::Polar(w) => Some(w),
        Metric2d::Conformal(_) => None,
    };
    let sn = |r: f64| warp.map_or(1.0, |w: Warp| w.sn(r));

    let mut nodes = Vec::with_capacity(mu * mv);
    let mut logc = Vec::with_capacity(mu * mv);
    let mut mass = Vec::with_capacity(mu * mv);
    for &u in &au.nodes {
        for &v in &av.nodes {
            nodes.push((u, v));
            let lc = log_coef(u, v)?;
            logc.push(lc);
            let m = (-eta.value(u, v)).exp() * chart.rho(u, v) * au.h * av.h;
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Coefficient(format!("mass {m} at ({u}, {v})")));
            }
            mass.push(m);
        }
    }

    // Coupling weights: along u the flux carries sn(face) hv / hu, along v it
    // carries hu / (sn(node) hv); conformal charts have sn = 1.
    let mut triplets = Vec::with_capacity(5 * mu * mv);
    let mut diag = vec![0.0; mu * mv];
    let mut couple = |a: usize, b: usize, w: f64, triplets: &mut Vec<(usize, usize, f64)>| {
        diag[a] += w;
        diag[b] += w;
        triplets.push((a, b, -w));
        triplets.push((b, a, -w));
    };
    for i in 0..mu {
        for j in 0..mv {
            let a = idx(i, j);
            let u = nodes[a].0;
            // u direction
            if i + 1 < mu {
                let b = idx(i + 1, j);
                let uf = 0.5 * (u + nodes[b].0);
                let c = (0.5 * (logc[a] + logc[b])).exp();
                couple(a, b, c * sn(uf) * av.h / au.h, &mut triplets);
            }
            // v direction
            if j + 1 < mv || av.kind == AxisKind::Periodic {
                let jb = (j + 1) % mv;
                let b = idx(i, jb);
                if b != a {
                    let c = (0.5 * (logc[a] + logc[b])).exp();
                    couple(a, b, c * au.h / (sn(u) * av.h), &mut triplets);
                }
            }
        }
    }
    // Dirichlet faces.
    let boundary_weight = |node_log: f64, fu: f64, fv: f64| -> Result<f64> { Ok((0.5 * (node_log + log_coef(fu, fv)?)).exp()) };
    for i in 0..mu {
        for j in 0..mv {
            let a = idx(i, j);
            let (u, v) = nodes[a];
            if i == 0 {
                if let Some((ub, dist)) = au.left_boundary() {
                    let uf = 0.5 * (u + ub);
                    diag[a] += boundary_weight(logc[a], uf, v)? * sn(uf) * av.h / dist;
                }
            }
            if i + 1 == mu {
                if let Some((ub, dist)) = au.right_boundary() {
                    let uf = 0.5 * (u + ub);
                    // The face sits at the boundary for half cells.
                    let uf = if au.kind == AxisKind::RegularLeft { ub } else { uf };
                    diag[a] += boundary_weight(logc[a], uf, v)? * sn(uf) * av.h / dist;
                }
            }
            if j == 0 {
                if let Some((vb, dist)) = av.left_boundary() {
                    let vf = 0.5 * (v + vb);
                    diag[a] += boundary_weight(logc[a], u, vf)? * au.h / (sn(u) * dist);
                }
            }
            if j + 1 == mv {
                if let Some((vb, dist)) = av.right_boundary() {
                    let vf = 0.5 * (v + vb);
                    diag[a] += boundary_weight(logc[a], u, vf)? * au.h / (sn(u) * dist);
                }
            }
        }
    }
    for (a, d) in diag.into_iter().enumerate() {
        triplets.push((a, a, d));
    }
    let n = mu * mv;
    Ok(Pencil {
        k: CsrMatrix::from_triplets(n, &triplets)?,
        m: CsrMatrix::from_diagonal(&mass),
        grid: (mu, mv),
        nodes,
    })
}

/// Lowest `count` eigenpairs of a pencil; `count` may not exceed a quarter
/// of the unknowns.
pub fn spectrum_2d(pencil: &Pencil, count: usize, path: SolverPath) -> Result<Spectrum> {
    if count == 0 || 4 * count > pencil.dof() {
        return domain(format!(
            "spectrum_2d needs 1 <= count <= dof/4, got {count} for {} unknowns",
            pencil.dof()
        ));
    }
    let mut spec = solve_generalized(&pencil.k, &pencil.m, count, path)?;
    spec.meta.source = "2-D pencil".into();
    spec.meta.grid = Some(pencil.grid);
    Ok(spec)
}

/// Eigenvalues on two grids and their Richardson extrapolation.
#[derive(Clone, Debug)]
pub struct RichardsonSpectrum {
    pub fine: Spectrum,
    pub coarse_eigenvalues: Vec<f64>,
    pub extrapolated: Vec<f64>,
    /// `|fine - coarse| / 3`.
    pub estimates: Vec<f64>,
}

impl RichardsonSpectrum {
    /// Extrapolated values as a values-only spectrum.
    pub fn to_spectrum(&self) -> Result<Spectrum> {
        let mut meta = self.fine.meta.clone();
        meta.source = format!("{} (Richardson)", meta.source);
        meta.refinement = Some(self.estimates.clone());
        Spectrum::from_values(self.extrapolated.clone(), meta)
    }
}

/// Solve on `cells` and `cells / 2`, pairing eigenvalues by sorted index.
pub fn richardson_spectrum(
    chart: &ConformalChart,
    tensor: &TensorSpec,
    drift: &DriftSpec,
    cells: (usize, usize),
    count: usize,
    path: SolverPath,
) -> Result<RichardsonSpectrum> {
    if cells.0 % 2 != 0 || cells.1 % 2 != 0 {
        return domain(format!("Richardson needs even cell counts, got {cells:?}"));
    }
    let coarse = spectrum_2d(&assemble(chart, tensor, drift, (cells.0 / 2, cells.1 / 2))?, count, path)?;
    let fine = spectrum_2d(&assemble(chart, tensor, drift, cells)?, count, path)?;
    let (extrapolated, estimates) = fine
        .eigenvalues
        .iter()
        .zip(&coarse.eigenvalues)
        .map(|(&f, &c)| (f + (f - c) / 3.0, (f - c).abs() / 3.0))
        .unzip();
    Ok(RichardsonSpectrum {
        coarse_eigenvalues: coarse.eigenvalues,
        fine,
        extrapolated,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{disk, euclidean_rectangle, half_plane_rectangle, make_ball, make_wedge, unit_square};
    use crate::field::ScalarField;
    use crate::sturm_liouville::{ball_problem, sl_eigs, theta_problem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn plain(chart: &ConformalChart, cells: (usize, usize)) -> Pencil {
        assemble(chart, &TensorSpec::identity(), &DriftSpec::zero(), cells).unwrap()
    }

    fn example_wedge() -> DomainSpec {
        make_wedge(1.0, FRAC_PI_3, 2.0 * FRAC_PI_3, TensorSpec::sin_theta(FRAC_PI_3, 2.0 * FRAC_PI_3).unwrap()).unwrap()
    }

    #[test]
    fn chart_examples() {
        let w = conformal_chart(&example_wedge()).unwrap();
        assert_eq!(w.tag, ChartTag::Wedge);
        assert!((w.u.1 - PI).abs() < 1e-15 && w.u.0 == 0.0);
        assert_eq!(w.v, (FRAC_PI_3, 2.0 * FRAC_PI_3));
        assert!((w.rho(0.3, 1.1) - 1.0 / 1.1f64.sin().powi(2)).abs() < 1e-14);

        let sq = conformal_chart(&unit_square()).unwrap();
        assert_eq!(sq.rho(0.2, 0.9), 1.0);

        let hp = conformal_chart(&half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).unwrap()).unwrap();
        assert_eq!(hp.tag, ChartTag::HalfPlane);
        assert!((hp.rho(0.5, 1.5) - 1.0 / 2.25).abs() < 1e-15);

        assert!(matches!(conformal_chart(&make_ball(3, 1.0, 1.0, 0).unwrap()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pencil_structure() {
        let chart = conformal_chart(&half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).unwrap()).unwrap();
        let drift = DriftSpec::new(ScalarField::new("x^2/2", |x, _| 0.5 * x * x));
        let p = assemble(&chart, &TensorSpec::constant(1.7).unwrap(), &drift, (12, 9)).unwrap();
        assert_eq!(p.dof(), 11 * 8);
        assert!(p.k.is_symmetric());
        assert!(p.m.is_diagonal());
        assert!(p.m.diagonal().iter().all(|&x| x > 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.dof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(p.k.bilinear(&x, &x) > 0.0);
        }
    }

    #[test]
    fn unit_square_first_eigenvalue() {
        let chart = conformal_chart(&unit_square()).unwrap();
        let r = richardson_spectrum(&chart, &TensorSpec::identity(), &DriftSpec::zero(), (64, 64), 4, SolverPath::Auto).unwrap();
        let exact = 2.0 * PI * PI;
        assert!(((r.extrapolated[0] - exact) / exact).abs() < 5e-3);
        // Doubling the grid shrinks the raw error about fourfold.
        let ratio = (r.coarse_eigenvalues[0] - exact) / (r.fine.eigenvalues[0] - exact);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        // (1, 2) and (2, 1) modes.
        let e = &r.fine.eigenvalues;
        assert!((e[1] - e[2]).abs() < 1e-9 * e[1]);
    }

    #[test]
    fn eigenvectors_are_m_orthonormal_and_rayleigh_consistent() {
        let chart = conformal_chart(&euclidean_rectangle((0.0, 1.0), (0.0, 0.7)).unwrap()).unwrap();
        let p = plain(&chart, (24, 20));
        let s = spectrum_2d(&p, 6, SolverPath::Iterative).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let g = p.m.bilinear(&s.eigenvectors[i], &s.eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-8);
            }
            let rq = p.k.bilinear(&s.eigenvectors[i], &s.eigenvectors[i]);
            assert!(((rq - s.eigenvalues[i]) / s.eigenvalues[i]).abs() < 1e-10);
        }
        // Any test vector has Rayleigh quotient at least lambda_1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..p.dof()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(p.k.bilinear(&x, &x) / p.m.bilinear(&x, &x) >= s.eigenvalues[0]);
        }
    }

    #[test]
    fn conformal_factor_only_enters_mass() {
        let chart = conformal_chart(&example_wedge()).unwrap();
        let tensor = TensorSpec::sin_theta(FRAC_PI_3, 2.0 * FRAC_PI_3).unwrap();
        let drift = DriftSpec::wedge_angular();
        let a = assemble(&chart, &tensor, &drift, (20, 16)).unwrap();
        let b = assemble(&chart.with_unit_factor(), &tensor, &drift, (20, 16)).unwrap();
        assert_eq!(a.k, b.k);
        assert_ne!(a.m, b.m);
    }

    #[test]
    fn wedge_matches_separation_of_variables() {
        let dom = example_wedge();
        let chart = conformal_chart(&dom).unwrap();
        let tensor = dom.wedge().unwrap().tensor.clone();
        let r = richardson_spectrum(&chart, &tensor, &DriftSpec::zero(), (64, 64), 4, SolverPath::Auto).unwrap();
        let mut predicted = Vec::new();
        for k in 1..=4 {
            let sol = sl_eigs(&theta_problem(&dom, (k * k) as f64).unwrap(), 2, 1024).unwrap();
            predicted.extend(sol.extrapolated);
        }
        predicted.sort_by(|a, b| a.total_cmp(b));
        for (got, want) in r.extrapolated.iter().zip(&predicted) {
            assert!(((got - want) / want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn angular_example_drift_leaves_spectrum_unchanged() {
        let dom = example_wedge();
        let chart = conformal_chart(&dom).unwrap();
        let tensor = dom.wedge().unwrap().tensor.clone();
        let zero = richardson_spectrum(&chart, &tensor, &DriftSpec::zero(), (48, 48), 2, SolverPath::Auto).unwrap();
        let drifted = richardson_spectrum(&chart, &tensor, &DriftSpec::wedge_angular(), (48, 48), 2, SolverPath::Auto).unwrap();
        for i in 0..2 {
            let tol = 2.0 * (zero.estimates[i] + drifted.estimates[i]) + 1e-6 * zero.extrapolated[i];
            assert!((zero.extrapolated[i] - drifted.extrapolated[i]).abs() < tol);
        }
    }

    #[test]
    fn half_plane_rectangles_exceed_mckean() {
        let tensor = TensorSpec::identity();
        for (x, y) in [((0.0, 1.0), (1.0, 2.0)), ((0.0, 4.0), (0.5, 3.0))] {
            let chart = conformal_chart(&half_plane_rectangle(x, y, 1.0).unwrap()).unwrap();
            let s = spectrum_2d(&assemble(&chart, &tensor, &DriftSpec::zero(), (24, 24)).unwrap(), 1, SolverPath::Auto).unwrap();
            assert!(s.eigenvalues[0] > 0.25);
        }
    }

    #[test]
    fn radially_constant_drift_respects_first_eigenvalue_bound() {
        // phi in [1, 2], eta depends on x only, kappa = 1, n = 2.
        let phi = ScalarField::new("1 + x/2", |x, _| 1.0 + 0.5 * x);
        let tensor = TensorSpec::new(phi, 1.0, 1.5, false).unwrap();
        let drift = DriftSpec::new(ScalarField::new("x^2/2", |x, _| 0.5 * x * x));
        let chart = conformal_chart(&half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).unwrap()).unwrap();
        let s = spectrum_2d(&assemble(&chart, &tensor, &drift, (24, 24)).unwrap(), 1, SolverPath::Auto).unwrap();
        let bound = 1.0 / (4.0 * 1.5 * 1.5);
        assert!(s.eigenvalues[0] >= bound);
    }

    #[test]
    fn metric_scaling_divides_eigenvalues() {
        let s = 1.7;
        let a = conformal_chart(&half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0).unwrap()).unwrap();
        let b = conformal_chart(&half_plane_rectangle((0.0, 1.0), (1.0, 2.0), 1.0 / s).unwrap()).unwrap();
        let ea = spectrum_2d(&plain(&a, (20, 20)), 5, SolverPath::Dense).unwrap();
        let eb = spectrum_2d(&plain(&b, (20, 20)), 5, SolverPath::Dense).unwrap();
        for (x, y) in ea.eigenvalues.iter().zip(&eb.eigenvalues) {
            assert!(((x / (s * s) - y) / y).abs() < 1e-10);
        }
    }

    #[test]
    fn unit_disk_polar_chart() {
        let chart = conformal_chart(&disk(1.0).unwrap()).unwrap();
        let r = richardson_spectrum(&chart, &TensorSpec::identity(), &DriftSpec::zero(), (32, 32), 1, SolverPath::Auto).unwrap();
        let exact = 2.404_825_557_695_773_f64.powi(2);
        assert!(((r.extrapolated[0] - exact) / exact).abs() < 5e-3, "{}", r.extrapolated[0]);
    }

    #[test]
    fn hyperbolic_disk_matches_radial_problem() {
        let dom = make_ball(2, 1.0, 1.5, 0).unwrap();
        let chart = conformal_chart(&dom).unwrap();
        let r = richardson_spectrum(&chart, &TensorSpec::identity(), &DriftSpec::zero(), (32, 32), 1, SolverPath::Auto).unwrap();
        let radial = sl_eigs(&ball_problem(2, 1.0, 1.5, 0).unwrap(), 1, 2048).unwrap().extrapolated[0];
        assert!(((r.extrapolated[0] - radial) / radial).abs() < 2e-3, "{} vs {radial}", r.extrapolated[0]);
    }

    #[test]
    fn spectrum_count_limits() {
        let chart = conformal_chart(&unit_square()).unwrap();
        let p = plain(&chart, (6, 6));
        assert!(spectrum_2d(&p, 7, SolverPath::Auto).is_err());
        assert!(spectrum_2d(&p, 0, SolverPath::Auto).is_err());
        assert!(spectrum_2d(&p, 6, SolverPath::Auto).is_ok());
    }

    #[test]
    fn bad_coefficients_rejected() {
        let chart = conformal_chart(&unit_square()).unwrap();
        let bad = TensorSpec::new(ScalarField::new("x - 1/2", |x, _| x - 0.5), 0.1, 1.0, false).unwrap();
        assert!(matches!(assemble(&chart, &bad, &DriftSpec::zero(), (8, 8)), Err(Error::Coefficient(_))));
    }

    #[test]
    fn matrix_market_round_trip_header() {
        let chart = conformal_chart(&unit_square()).unwrap();
        let p = plain(&chart, (4, 4));
        let dir = std::env::temp_dir().join(format!("mm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        p.write_matrix_market(&dir, "square").unwrap();
        let text = std::fs::read_to_string(dir.join("square_K.mtx")).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
