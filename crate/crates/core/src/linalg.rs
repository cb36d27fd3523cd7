//! Dense row-major matrix and a Householder least-squares solver.

use serde::{Deserialize, Serialize};

/// A dense, row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from a slice of equally long rows.
    ///
    /// Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
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

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Copies the given rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The design matrix had dependent columns; `rank` is the numerical rank found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Deficient {
    pub rank: usize,
}

/// Solves `min ||a x - b||` for a tall `a` (rows >= cols) by Householder QR.
///
/// Returns [`Deficient`] when some diagonal entry of `R` falls below
/// `max(rows, cols) * eps * max|R_jj|`.
pub(crate) fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, Deficient> {
    let (m, n) = (a.rows(), a.cols());
    assert_eq!(b.len(), m);
    if m < n {
        return Err(Deficient { rank: m });
    }
    // Column-major working copy: each column is contiguous for the reflections.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];

    for k in 0..n {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place of column k below the diagonal.
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k + 1) {
            let s = 2.0 * dot(&v, &col[k..]) / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= s * vi;
            }
        }
        let s = 2.0 * dot(&v, &rhs[k..]) / vnorm2;
        for (r, vi) in rhs[k..].iter_mut().zip(&v) {
            *r -= s * vi;
        }
    }

    let max_diag = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    let tol = (m.max(n) as f64) * f64::EPSILON * max_diag;
    let rank = diag.iter().filter(|d| d.abs() > tol).count();
    if rank < n || max_diag == 0.0 {
        return Err(Deficient { rank });
    }

    // Back substitution on R x = Q^T b.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for (j, xj) in x.iter().enumerate().skip(i + 1) {
            s -= cols[j][i] * xj;
        }
        x[i] = s / diag[i];
    }
    Ok(x)
}
