//! Symmetric band matrices: Cholesky with multi right-hand-side solves, and
//! LDL^T inertia counts.

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Lower band of a symmetric matrix, row major. Row `i` holds columns
/// `i - bw ..= i` (entries left of column 0 are zero padding).
#[derive(Clone, Debug)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    /// Lower band of `k - sigma m`.
    pub fn from_pencil(k: &CsrMatrix, m: &CsrMatrix, sigma: f64) -> Self {
        let n = k.dim();
        let bw = k.bandwidth().max(m.bandwidth());
        let mut out = Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        };
        for i in 0..n {
            for (j, x) in k.row(i) {
                if j <= i {
                    *out.at_mut(i, j) += x;
                }
            }
            if sigma != 0.0 {
                for (j, x) in m.row(i) {
                    if j <= i {
                        *out.at_mut(i, j) -= sigma * x;
                    }
                }
            }
        }
        out
    }

    pub fn from_csr(a: &CsrMatrix) -> Self {
        Self::from_pencil(a, &CsrMatrix::from_diagonal(&vec![0.0; a.dim()]), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * (self.bw + 1) + j + self.bw - i]
    }

    /// Row `i` of the band; entry `k` corresponds to column `i + k - bw`.
    fn row(&self, i: usize) -> &[f64] {
        let w = self.bw + 1;
        &self.data[i * w..(i + 1) * w]
    }

    /// In-place Cholesky factor `L` (same layout).
    pub fn cholesky(mut self, what: &'static str) -> Result<BandCholesky> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            for j in jmin..=i {
                // Columns jmin..j of rows i and j.
                let len = j - jmin;
                let oi = jmin + bw - i;
                let oj = jmin + bw - j;
                let dot: f64 = {
                    let (ri, rj) = (&self.data[i * w + oi..i * w + oi + len], &self.data[j * w + oj..j * w + oj + len]);
                    ri.iter().zip(rj).map(|(a, b)| a * b).sum()
                };
                let idx = i * w + j + bw - i;
                let s = self.data[idx] - dot;
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite(what));
                    }
                    self.data[idx] = s.sqrt();
                } else {
                    self.data[idx] = s / self.data[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { l: self })
    }

    /// Number of negative pivots of `A = L D L^T`, which by Sylvester's law
    /// is the number of negative eigenvalues of `A`.
    pub fn negative_pivots(&self) -> usize {
        let (n, bw) = (self.n, self.bw);
        let scale = self.data.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        let mut l = SymBand {
            n,
            bw,
            data: vec![0.0; self.data.len()],
        };
        let mut d = vec![0.0; n];
        let mut c = vec![0.0; bw + 1];
        let mut negatives = 0;
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            let ai = self.row(i);
            for j in jmin..i {
                // c_j = a_ij - sum_k c_k l_jk, later l_ij = c_j / d_j
                let lj = l.row(j);
                let mut s = ai[j + bw - i];
                for k in jmin..j {
                    s -= c[k + bw - i] * lj[k + bw - j];
                }
                c[j + bw - i] = s;
            }
            let mut di = ai[bw];
            for j in jmin..i {
                let lij = c[j + bw - i] / d[j];
                *l.at_mut(i, j) = lij;
                di -= c[j + bw - i] * lij;
            }
            if di.abs() < tiny {
                di = -tiny;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        negatives
    }
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    l: SymBand,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.l.n
    }

    /// Solve `A X = B` in place for a row-major `n x p` block `B`.
    pub fn solve_many(&self, b: &mut [f64], p: usize) {
        let (n, bw) = (self.l.n, self.l.bw);
        assert_eq!(b.len(), n * p);
        let mut acc = vec![0.0; p];
        for i in 0..n {
            let row = self.l.row(i);
            acc.copy_from_slice(&b[i * p..(i + 1) * p]);
            for k in i.saturating_sub(bw)..i {
                let lik = row[k + bw - i];
                if lik != 0.0 {
                    let bk = &b[k * p..(k + 1) * p];
                    acc.iter_mut().zip(bk).for_each(|(a, x)| *a -= lik * x);
                }
            }
            let inv = 1.0 / row[bw];
            b[i * p..(i + 1) * p].iter_mut().zip(&acc).for_each(|(x, a)| *x = a * inv);
        }
        for i in (0..n).rev() {
            let row = self.l.row(i);
            let inv = 1.0 / row[bw];
            let (head, tail) = b.split_at_mut(i * p);
            let bi = &mut tail[..p];
            bi.iter_mut().for_each(|x| *x *= inv);
            for k in i.saturating_sub(bw)..i {
                let lik = row[k + bw - i];
                if lik != 0.0 {
                    head[k * p..(k + 1) * p].iter_mut().zip(bi.iter()).for_each(|(x, y)| *x -= lik * y);
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_many(&mut x, 1);
        x
    }
}
