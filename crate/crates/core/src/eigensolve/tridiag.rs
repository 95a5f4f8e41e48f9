//! Symmetric tridiagonal eigenproblems by Sturm-sequence bisection and
//! inverse iteration.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`
/// (`e[i]` couples rows `i` and `i + 1`).
#[derive(Clone, Debug)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Result<Self> {
        if d.is_empty() || e.len() + 1 != d.len() {
            return Err(Error::Domain(format!(
                "tridiagonal needs len(e) = len(d) - 1, got {} and {}",
                d.len(),
                e.len()
            )));
        }
        if d.iter().chain(&e).any(|x| !x.is_finite()) {
            return Err(Error::Coefficient("non-finite tridiagonal entry".into()));
        }
        Ok(Self { d, e })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    fn pivot_floor(&self) -> f64 {
        let m = self.e.iter().fold(f64::MIN_POSITIVE, |a, x| a.max(x * x));
        m * f64::MIN_POSITIVE.sqrt()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let floor = self.pivot_floor();
        let mut q = self.d[0] - x;
        let mut count = 0;
        for i in 0..self.d.len() {
            if i > 0 {
                q = self.d[i] - x - self.e[i - 1] * self.e[i - 1] / q;
            }
            if q.abs() < floor {
                q = -floor;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.d.len();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to machine precision.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        let span = hi - lo;
        lo -= 1e-12 * span.max(1.0);
        hi += 1e-12 * span.max(1.0);
        // Invariant: count_below(lo) <= k < count_below(hi).
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an accurate eigenvalue `lambda`, unit Euclidean norm,
    /// sign fixed so the first significant entry is positive.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let (lo, hi) = self.bounds();
        let shift = lambda + 4.0 * f64::EPSILON * (hi - lo).max(lambda.abs());
        let mut x = vec![1.0; n];
        for (i, v) in x.iter_mut().enumerate() {
            // Deterministic start with all modes present.
            *v = 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract();
        }
        for _ in 0..4 {
            x = self.solve_shifted(shift, &x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        let peak = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-6 * peak) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        x
    }

    /// Solve `(T - s I) y = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        if n == 1 {
            let p = self.d[0] - s;
            return vec![b[0] / if p == 0.0 { f64::EPSILON } else { p }];
        }
        // Row i of U has entries u0 (diag), u1, u2 (two superdiagonals).
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * self.bounds().1.abs().max(1.0);
        let mut diag = self.d[0] - s;
        let mut sup = self.e[0];
        for i in 0..n - 1 {
            let sub = self.e[i];
            let next_diag = self.d[i + 1] - s;
            let next_sup = if i + 2 < n { self.e[i + 1] } else { 0.0 };
            if diag.abs() >= sub.abs() {
                let piv = if diag == 0.0 { tiny } else { diag };
                let f = sub / piv;
                u0[i] = piv;
                u1[i] = sup;
                u2[i] = 0.0;
                rhs[i + 1] -= f * rhs[i];
                diag = next_diag - f * sup;
                sup = next_sup;
            } else {
                // Swap rows i and i + 1.
                let f = diag / sub;
                u0[i] = sub;
                u1[i] = next_diag;
                u2[i] = next_sup;
                rhs.swap(i, i + 1);
                rhs[i + 1] -= f * rhs[i];
                diag = sup - f * next_diag;
                sup = -f * next_sup;
            }
        }
        u0[n - 1] = if diag == 0.0 { tiny } else { diag };
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                v -= u2[i] * y[i + 2];
            }
            y[i] = v / u0[i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn chain(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn chain_eigenvalues_closed_form() {
        let n = 200;
        let t = chain(n);
        for k in [0usize, 1, 7, 100, 199] {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-13, "{k}");
        }
    }

    #[test]
    fn chain_eigenvectors_are_sines() {
        let n = 64;
        let t = chain(n);
        for k in [0usize, 3, 20] {
            let lam = t.eigenvalue(k);
            let v = t.eigenvector(lam);
            let mut s: Vec<f64> = (1..=n).map(|i| ((k + 1) as f64 * i as f64 * PI / (n + 1) as f64).sin()).collect();
            let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
            s.iter_mut().for_each(|x| *x /= norm);
            for (a, b) in v.iter().zip(&s) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn count_matches_bisection() {
        let t = SymTridiagonal::new(vec![1.0, 3.0, -2.0, 5.0, 0.5], vec![0.3, -1.2, 0.7, 2.0]).unwrap();
        let vals: Vec<f64> = (0..5).map(|k| t.eigenvalue(k)).collect();
        for w in vals.windows(2) {
            assert!(w[0] < w[1]);
        }
        for (k, &v) in vals.iter().enumerate() {
            assert_eq!(t.count_below(v - 1e-9), k);
            assert_eq!(t.count_below(v + 1e-9), k + 1);
            let x = t.eigenvector(v);
            // Residual of T x - v x.
            for i in 0..5 {
                let mut r = t.d[i] * x[i] - v * x[i];
                if i > 0 {
                    r += t.e[i - 1] * x[i - 1];
                }
                if i < 4 {
                    r += t.e[i] * x[i + 1];
                }
                assert!(r.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![f64::NAN], vec![]).is_err());
    }
}
