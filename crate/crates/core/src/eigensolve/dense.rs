//! Dense path: `M = L L^T`, standard problem `L^-1 K L^-T`, back transform.

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};

use super::sparse::CsrMatrix;
use super::RawPairs;
use crate::error::{Error, Result};

pub(super) fn solve(k: &CsrMatrix, m: &CsrMatrix, count: usize) -> Result<RawPairs> {
    let n = k.dim();
    let kd = k.to_dense();
    let md = m.to_dense();
    let kmat = Mat::<f64>::from_fn(n, n, |i, j| kd[i + j * n]);
    let mmat = Mat::<f64>::from_fn(n, n, |i, j| md[i + j * n]);
    let llt = mmat.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite("mass"))?;
    let l = llt.L();

    let mut c = kmat;
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let mut c = c.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let a = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));

    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence { iterations: 0, residual: f64::NAN })?;
    let s = evd.S();
    let u = evd.U();
    let mut y = Mat::<f64>::from_fn(n, count, |i, j| u[(i, j)]);
    solve_upper_triangular_in_place(l.transpose(), y.as_mut(), Par::Seq);

    let values = (0..count).map(|j| s[j]).collect();
    let vectors = (0..count).map(|j| (0..n).map(|i| y[(i, j)]).collect()).collect();
    Ok(RawPairs { values, vectors, iterations: 0 })
}
