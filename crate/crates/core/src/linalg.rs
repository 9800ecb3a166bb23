//! Dense row-major matrices and a direct LU solver with partial pivoting.

use std::ops::{Index, IndexMut};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    /// Elimination hit an exactly-zero pivot column; the matrix is singular.
    #[error("singular matrix: no nonzero pivot in column {pivot}")]
    Singular { pivot: usize },
    #[error("dimension mismatch: {detail}")]
    Dimension { detail: String },
}

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
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

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from explicit rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in &rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Induced infinity norm: maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mat_vec dimension mismatch");
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// LU factorization PA = LU with row pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Matrix,
    // perm[k] = source row selected at elimination step k
    perm: Vec<usize>,
}

pub fn lu_factor(a: &Matrix) -> Result<LuFactors, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension {
            detail: format!(
                "lu_factor needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            ),
        });
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // partial pivoting: largest magnitude on or below the diagonal
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for r in (k + 1)..n {
            let v = lu[(r, k)].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 {
            return Err(LinalgError::Singular { pivot: k });
        }
        if p != k {
            for c in 0..n {
                let tmp = lu[(k, c)];
                lu[(k, c)] = lu[(p, c)];
                lu[(p, c)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for r in (k + 1)..n {
            let factor = lu[(r, k)] / pivot;
            lu[(r, k)] = factor;
            for c in (k + 1)..n {
                lu[(r, c)] -= factor * lu[(k, c)];
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl LuFactors {
    /// Solve A x = b using the stored factors.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "rhs length mismatch");
        // forward substitution on the permuted rhs
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = b[self.perm[i]];
            for (coef, yj) in self.lu.row(i)[..i].iter().zip(&y[..i]) {
                v -= coef * yj;
            }
            y[i] = v;
        }
        // back substitution
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            for (coef, xj) in self.lu.row(i)[i + 1..].iter().zip(&x[i + 1..]) {
                v -= coef * xj;
            }
            x[i] = v / self.lu[(i, i)];
        }
        x
    }
}

/// One-shot factor-and-solve of A x = b.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != b.len() {
        return Err(LinalgError::Dimension {
            detail: format!(
                "matrix is {}x{} but rhs has length {}",
                a.rows(),
                a.cols(),
                b.len()
            ),
        });
    }
    Ok(lu_factor(a)?.solve(b))
}
