//! Minimal dense linear algebra: just the kernels the estimators need.
//!
//! The problem sizes here are short-and-wide (tens of rows, up to a few
//! thousand columns), so everything routes through either column dot
//! products or small symmetric systems. Nothing in this module allocates
//! matrices larger than max(rows, selected columns) squared.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged row lengths".into()));
        }
        Ok(Mat {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// y = self * x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// y = self' * x
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = self.row(r);
            let xr = x[r];
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * xr;
            }
        }
        out
    }

    /// Row Gram matrix G = self * self' (rows x rows, symmetric PSD).
    pub fn row_gram(&self) -> Mat {
        let n = self.rows;
        let mut g = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        g
    }

    pub fn per_column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (m, v) in means.iter_mut().zip(self.row(r)) {
                *m += v;
            }
        }
        let t = self.rows as f64;
        for m in &mut means {
            *m /= t;
        }
        means
    }

    /// Copy with the given vector subtracted from every row.
    pub fn center_rows(&self, means: &[f64]) -> Mat {
        assert_eq!(means.len(), self.cols);
        let mut out = self.clone();
        for r in 0..out.rows {
            let base = r * out.cols;
            for c in 0..out.cols {
                out.data[base + c] -= means[c];
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population variance (divide by n).
pub fn population_variance(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Solves A x = b for symmetric positive definite A by Cholesky.
/// A is consumed as a dense square matrix.
pub fn solve_spd(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "solve_spd: {}x{} system with rhs {}",
            a.n_rows(),
            a.n_cols(),
            b.len()
        )));
    }
    // Lower-triangular factor, stored dense.
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(Error::Numerical(format!(
                        "matrix not positive definite at pivot {i} (value {sum:e})"
                    )));
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Ok(x)
}

/// Least squares with intercept via normal equations plus a ridge jitter on
/// the slope block. Returns (intercept, coefficients). The jitter keeps
/// collinear systems solvable; callers that must detect degeneracy inspect
/// the column variances themselves.
pub fn ols_with_intercept(x: &Mat, y: &[f64], jitter: f64) -> Result<(f64, Vec<f64>)> {
    let t = x.n_rows();
    let p = x.n_cols();
    if y.len() != t {
        return Err(Error::Dimension(format!(
            "ols: {} rows vs {} responses",
            t,
            y.len()
        )));
    }
    if t == 0 {
        return Err(Error::InsufficientData("ols on empty system".into()));
    }
    if p == 0 {
        return Ok((mean(y), Vec::new()));
    }
    let x_means = x.per_column_means();
    let y_mean = mean(y);
    let xc = x.center_rows(&x_means);
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let mut gram = Mat::zeros(p, p);
    for i in 0..p {
        let ci = xc.col(i);
        for j in i..p {
            let v = dot(&ci, &xc.col(j));
            gram.set(i, j, v);
            gram.set(j, i, v);
        }
        gram.set(i, i, gram.get(i, i) + jitter.max(0.0));
    }
    let rhs = xc.tr_matvec(&yc);
    let beta = solve_spd(&gram, &rhs)?;
    let intercept = y_mean - dot(&x_means, &beta);
    Ok((intercept, beta))
}

/// Eigen decomposition of a symmetric matrix by the cyclic Jacobi method.
/// Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue;
/// eigenvector i is the i-th row of the returned matrix.
pub fn symmetric_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::Dimension("symmetric_eigen: matrix not square".into()));
    }
    let mut m = a.clone();
    // v accumulates rotations; starts as identity.
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let scale: f64 = (0..n)
        .map(|i| m.get(i, i).abs())
        .fold(1e-300_f64, f64::max);
    let tol = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m.get(p, q).abs();
            }
        }
        if off <= tol * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= tol * 1e-3 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.get(j, j)
            .partial_cmp(&m.get(i, i))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Mat::zeros(n, n);
    for (row, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(row, k, v.get(k, i));
        }
    }
    Ok((eigenvalues, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spd_solve_recovers_known_solution() {
        let a = Mat::from_rows(vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 5.0],
        ])
        .unwrap();
        let x_true = vec![1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let x = solve_spd(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert_abs_diff_eq!(xi, ti, epsilon = 1e-12);
        }
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(solve_spd(&a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn jacobi_reconstructs_symmetric_matrix() {
        let a = Mat::from_rows(vec![
            vec![2.0, -1.0, 0.3, 0.0],
            vec![-1.0, 2.5, -0.4, 0.1],
            vec![0.3, -0.4, 1.8, -0.2],
            vec![0.0, 0.1, -0.2, 3.2],
        ])
        .unwrap();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        // descending order
        for w in vals.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        // A v_i = lambda_i v_i
        for i in 0..4 {
            let vi = vecs.row(i).to_vec();
            let av = a.matvec(&vi);
            for k in 0..4 {
                assert_abs_diff_eq!(av[k], vals[i] * vi[k], epsilon = 1e-10);
            }
        }
        // orthonormality
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot(vecs.row(i), vecs.row(j)), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ols_fits_exact_linear_data() {
        let x = Mat::from_rows(vec![
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![3.0, 4.0],
            vec![0.5, -1.0],
        ])
        .unwrap();
        let y: Vec<f64> = (0..4).map(|r| 3.0 + 2.0 * x.get(r, 0) - x.get(r, 1)).collect();
        let (b0, beta) = ols_with_intercept(&x, &y, 0.0).unwrap();
        assert_abs_diff_eq!(b0, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(beta[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(beta[1], -1.0, epsilon = 1e-10);
    }

    #[test]
    fn tr_matvec_matches_explicit_transpose() {
        let m = Mat::from_rows(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let out = m.tr_matvec(&[1.0, -1.0]);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);
    }
}
