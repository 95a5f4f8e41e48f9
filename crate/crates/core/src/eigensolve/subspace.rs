//! Iterative path: block shift-invert iteration at zero with Rayleigh-Ritz
//! projection and locking of converged leading pairs.
//!
//! A single power vector stalls on numerically multiple eigenvalues, so the
//! iteration carries a block of `count + max(count/2, 8)` vectors.

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, MatRef, Par, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::{BandCholesky, SymBand};
use super::sparse::CsrMatrix;
use super::RawPairs;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 2000;
/// Relative residual gate `|K x - t M x| / (|t| |M x|)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative eigenvalue increment between sweeps.
pub const INCREMENT_TOL: f64 = 1e-10;
const START_SEED: u64 = 0x5eed_1dea;

pub(super) fn block_size(n: usize, count: usize) -> usize {
    (count + (count / 2).max(8)).min(n)
}

fn apply_sparse(a: &CsrMatrix, x: MatRef<'_, f64>) -> Mat<f64> {
    let (n, p) = (x.nrows(), x.ncols());
    let mut out = Mat::<f64>::zeros(n, p);
    let mut buf = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..p {
        for i in 0..n {
            col[i] = x[(i, j)];
        }
        a.mul_vec_into(&col, &mut buf);
        for i in 0..n {
            out[(i, j)] = buf[i];
        }
    }
    out
}

fn solve_block(chol: &BandCholesky, b: &Mat<f64>) -> Mat<f64> {
    let (n, p) = (b.nrows(), b.ncols());
    let mut rows = vec![0.0; n * p];
    for j in 0..p {
        for i in 0..n {
            rows[i * p + j] = b[(i, j)];
        }
    }
    chol.solve_many(&mut rows, p);
    Mat::from_fn(n, p, |i, j| rows[i * p + j])
}

/// Remove the M-components along the locked basis (two passes).
fn deflate(y: &mut Mat<f64>, locked: &Mat<f64>, m_locked: &Mat<f64>) {
    if locked.ncols() == 0 {
        return;
    }
    for _ in 0..2 {
        let coeff = m_locked.transpose() * &*y;
        *y -= locked * &coeff;
    }
}

/// M-orthonormalize the columns of `y` (Cholesky QR, twice). Columns that
/// turn out numerically dependent are replaced by fresh random directions.
fn orthonormalize(
    y: &mut Mat<f64>,
    m: &CsrMatrix,
    locked: &Mat<f64>,
    m_locked: &Mat<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    for attempt in 0..6 {
        let mut ok = true;
        for _ in 0..2 {
            let my = apply_sparse(m, y.as_ref());
            let gram = y.transpose() * &my;
            let gram = Mat::<f64>::from_fn(gram.nrows(), gram.ncols(), |i, j| 0.5 * (gram[(i, j)] + gram[(j, i)]));
            match gram.llt(Side::Lower) {
                Ok(llt) => {
                    let mut yt = y.transpose().to_owned();
                    solve_lower_triangular_in_place(llt.L(), yt.as_mut(), Par::Seq);
                    *y = yt.transpose().to_owned();
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let my = apply_sparse(m, y.as_ref());
            let gram = y.transpose() * &my;
            let off = (0..gram.nrows())
                .flat_map(|i| (0..gram.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
                .fold(0.0_f64, f64::max);
            if off < 1e-12 {
                return Ok(());
            }
        }
        // Refresh the block's weakest directions and try again.
        let (n, p) = (y.nrows(), y.ncols());
        let col_norms: Vec<f64> = (0..p)
            .map(|j| (0..n).map(|i| y[(i, j)] * y[(i, j)]).sum::<f64>().sqrt())
            .collect();
        let scale = col_norms.iter().cloned().fold(0.0_f64, f64::max).max(1.0);
        for j in 0..p {
            if !(col_norms[j] > 1e-8 * scale) || attempt > 1 {
                for i in 0..n {
                    y[(i, j)] += 1e-3 * scale * rng.gen_range(-1.0..1.0);
                }
            }
        }
        deflate(y, locked, m_locked);
    }
    Err(Error::NoConvergence {
        iterations: 0,
        residual: f64::NAN,
    })
}

pub(super) fn solve(k: &CsrMatrix, m: &CsrMatrix, count: usize) -> Result<RawPairs> {
    let n = k.dim();
    let chol = SymBand::from_csr(k).cholesky("stiffness")?;
    SymBand::from_csr(m).cholesky("mass")?;
    let p = block_size(n, count);

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = Mat::<f64>::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    let mut locked = Mat::<f64>::zeros(n, 0);
    let mut m_locked = Mat::<f64>::zeros(n, 0);
    let mut values: Vec<f64> = Vec::new();
    let mut prev: Vec<f64> = vec![f64::NAN; p];
    let mut best = f64::INFINITY;

    for iter in 1..=MAX_ITERATIONS {
        let mut y = solve_block(&chol, &apply_sparse(m, x.as_ref()));
        deflate(&mut y, &locked, &m_locked);
        orthonormalize(&mut y, m, &locked, &m_locked, &mut rng)?;

        let ky = apply_sparse(k, y.as_ref());
        let a = y.transpose() * &ky;
        let q = a.nrows();
        let a = Mat::<f64>::from_fn(q, q, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
        let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NoConvergence {
            iterations: iter,
            residual: best,
        })?;
        let theta: Vec<f64> = (0..q).map(|j| evd.S()[j]).collect();
        x = &y * evd.U();
        let kx = &ky * evd.U();
        let mx = apply_sparse(m, x.as_ref());

        let mut newly = 0;
        for j in 0..q {
            if values.len() + newly >= count {
                break;
            }
            let (mut rr, mut mm) = (0.0, 0.0);
            for i in 0..n {
                let r = kx[(i, j)] - theta[j] * mx[(i, j)];
                rr += r * r;
                mm += mx[(i, j)] * mx[(i, j)];
            }
            let rel = rr.sqrt() / (theta[j].abs() * mm.sqrt());
            let increment = (theta[j] - prev[j]).abs() / theta[j].abs();
            if rel < RESIDUAL_TOL && increment < INCREMENT_TOL {
                newly += 1;
            } else {
                best = best.min(rel);
                break;
            }
        }
        if newly > 0 {
            let keep = locked.ncols();
            locked = Mat::from_fn(n, keep + newly, |i, j| if j < keep { locked[(i, j)] } else { x[(i, j - keep)] });
            m_locked = Mat::from_fn(n, keep + newly, |i, j| if j < keep { m_locked[(i, j)] } else { mx[(i, j - keep)] });
            values.extend_from_slice(&theta[..newly]);
        }
        if values.len() >= count {
            let vectors = (0..count).map(|j| (0..n).map(|i| locked[(i, j)]).collect()).collect();
            return Ok(RawPairs {
                values: values[..count].to_vec(),
                vectors,
                iterations: iter,
            });
        }
        let rest = q - newly;
        x = Mat::from_fn(n, rest, |i, j| x[(i, j + newly)]);
        prev = theta[newly..].to_vec();
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: best,
    })
}
