//! Minimal dense linear algebra: a row-major matrix and Householder QR
//! least squares. Design matrices here are tall and thin (hundreds of rows,
//! around ten columns), so there is no call for anything fancier.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Transposed matrix-vector product `A^T v`.
    #[cfg(test)]
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * v[i];
            }
        }
        out
    }
}

/// Result of a least-squares solve.
#[derive(Debug)]
pub struct LeastSquares {
    pub beta: Vec<f64>,
    /// `(X^T X)^{-1}`, from the inverse of the triangular factor.
    pub xtx_inv: Mat,
}

/// Solve `min ||X b - y||` by Householder QR.
///
/// Fails with the index of the first aliased column when `X` is rank
/// deficient (relative pivot below `1e-10`).
pub fn least_squares(x: &Mat, y: &[f64]) -> Result<LeastSquares, usize> {
    let n = x.rows;
    let p = x.cols;
    debug_assert!(n >= p);
    debug_assert_eq!(y.len(), n);

    let mut a = x.data.clone();
    let mut qty: Vec<f64> = y.to_vec();
    let mut r_diag_scale = 0.0_f64;

    for j in 0..p {
        // Householder vector for column j, rows j..n.
        let mut norm = 0.0;
        for i in j..n {
            let v = a[i * p + j];
            norm += v * v;
        }
        norm = libm::sqrt(norm);
        let ajj = a[j * p + j];
        let alpha = if ajj >= 0.0 { -norm } else { norm };
        r_diag_scale = r_diag_scale.max(norm);
        if norm <= 1e-10 * r_diag_scale.max(1.0) {
            return Err(j);
        }
        let v0 = ajj - alpha;
        let mut vnorm2 = v0 * v0;
        for i in (j + 1)..n {
            let v = a[i * p + j];
            vnorm2 += v * v;
        }
        if vnorm2 == 0.0 {
            return Err(j);
        }
        // Apply H = I - 2 v v^T / (v^T v) to the trailing columns and qty.
        for col in (j + 1)..p {
            let mut dot = v0 * a[j * p + col];
            for i in (j + 1)..n {
                dot += a[i * p + j] * a[i * p + col];
            }
            let f = 2.0 * dot / vnorm2;
            a[j * p + col] -= f * v0;
            for i in (j + 1)..n {
                a[i * p + col] -= f * a[i * p + j];
            }
        }
        let mut dot = v0 * qty[j];
        for i in (j + 1)..n {
            dot += a[i * p + j] * qty[i];
        }
        let f = 2.0 * dot / vnorm2;
        qty[j] -= f * v0;
        for i in (j + 1)..n {
            qty[i] -= f * a[i * p + j];
        }
        a[j * p + j] = alpha;
        // entries below the diagonal hold the Householder vector; they are
        // not referenced again for column j.
    }

    // Rank check on the triangular diagonal.
    let max_diag = (0..p).fold(0.0_f64, |m, j| m.max(libm::fabs(a[j * p + j])));
    for j in 0..p {
        if libm::fabs(a[j * p + j]) <= 1e-10 * max_diag {
            return Err(j);
        }
    }

    // Back substitution: R beta = (Q^T y)[..p].
    let mut beta = vec![0.0; p];
    for j in (0..p).rev() {
        let mut s = qty[j];
        for k in (j + 1)..p {
            s -= a[j * p + k] * beta[k];
        }
        beta[j] = s / a[j * p + j];
    }

    // R^{-1} by back substitution on the identity, then (X^T X)^{-1} =
    // R^{-1} R^{-T}.
    let mut rinv = Mat::zeros(p, p);
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        for j in (0..p).rev() {
            let mut s = e[j];
            for k in (j + 1)..p {
                s -= a[j * p + k] * rinv.get(k, col);
            }
            rinv.set(j, col, s / a[j * p + j]);
        }
    }
    let mut xtx_inv = Mat::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in 0..p {
                s += rinv.get(i, k) * rinv.get(j, k);
            }
            xtx_inv.set(i, j, s);
        }
    }

    Ok(LeastSquares { beta, xtx_inv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        // y = 1 + 2x, three points
        let mut x = Mat::zeros(3, 2);
        for (i, &v) in [1.0, 2.0, 3.0].iter().enumerate() {
            x.set(i, 0, 1.0);
            x.set(i, 1, v);
        }
        let y = [3.0, 5.0, 7.0];
        let ls = least_squares(&x, &y).unwrap();
        assert!((ls.beta[0] - 1.0).abs() < 1e-12);
        assert!((ls.beta[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hand_normal_equations() {
        // y = (1,2,4) on x = (1,2,3): slope 1.5, intercept -2/3.
        let mut x = Mat::zeros(3, 2);
        for (i, &v) in [1.0, 2.0, 3.0].iter().enumerate() {
            x.set(i, 0, 1.0);
            x.set(i, 1, v);
        }
        let y = [1.0, 2.0, 4.0];
        let ls = least_squares(&x, &y).unwrap();
        assert!((ls.beta[1] - 1.5).abs() < 1e-12);
        assert!((ls.beta[0] + 2.0 / 3.0).abs() < 1e-12);
        // (X^T X)^{-1} against the hand inverse of [[3,6],[6,14]].
        let det = 3.0 * 14.0 - 36.0;
        let expect = [[14.0 / det, -6.0 / det], [-6.0 / det, 3.0 / det]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((ls.xtx_inv.get(i, j) - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn detects_aliased_column() {
        let mut x = Mat::zeros(4, 3);
        for i in 0..4 {
            x.set(i, 0, 1.0);
            x.set(i, 1, i as f64);
            x.set(i, 2, 2.0 * i as f64); // collinear with column 1
        }
        let y = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(least_squares(&x, &y).unwrap_err(), 2);
    }
}
