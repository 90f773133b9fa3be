//! Minimal dense linear algebra for desk-scale matrices (n <= a few hundred):
//! LU with partial pivoting (determinants, solves, inverses), a PSD-tolerant
//! Cholesky with jitter escalation, and Jacobi eigenvalues for symmetric
//! matrices. These exact factorizations serve as the oracles against which
//! perturbative expansions are reported.

use crate::error::{RaceError, Result};

#[derive(Clone, Debug, PartialEq)]
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
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

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn max_abs_offdiag(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self[(i, j)].abs());
                }
            }
        }
        m
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        d
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Lu> {
        assert!(a.is_square());
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                if lu[(i, k)].abs() > best {
                    best = lu[(i, k)].abs();
                    pivot = i;
                }
            }
            if best == 0.0 {
                return Err(RaceError::Singular);
            }
            if pivot != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = t;
                }
                perm.swap(k, pivot);
                sign = -sign;
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in (k + 1)..n {
                    let v = f * lu[(k, j)];
                    lu[(i, j)] -= v;
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        let n = self.lu.rows;
        (0..n).fold(self.sign, |acc, i| acc * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lu.rows;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Outcome of the PSD-tolerant Cholesky: lower factor plus the jitter that was
/// needed (0 when the matrix factored as supplied).
pub struct Cholesky {
    pub lower: Matrix,
    pub jitter: f64,
}

fn try_cholesky(a: &Matrix, jitter: f64) -> Option<Matrix> {
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    // diagonal deficits down to -tol are treated as exact rank deficiency
    let tol = 1e-12 * n as f64;
    for j in 0..n {
        let mut d = a[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -tol {
            return None;
        }
        let ljj = d.max(0.0).sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            if ljj == 0.0 {
                l[(i, j)] = 0.0;
                continue;
            }
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

impl Cholesky {
    /// Factor a symmetric PSD matrix, escalating diagonal jitter
    /// 1e-12 -> 1e-11 -> ... -> 1e-8 before giving up.
    pub fn new(a: &Matrix) -> Result<Cholesky> {
        assert!(a.is_square());
        if let Some(lower) = try_cholesky(a, 0.0) {
            return Ok(Cholesky { lower, jitter: 0.0 });
        }
        let mut jitter = 1e-12;
        while jitter <= 1e-8 {
            if let Some(lower) = try_cholesky(a, jitter) {
                return Ok(Cholesky { lower, jitter });
            }
            jitter *= 10.0;
        }
        Err(RaceError::NotPsd { max_jitter: 1e-8 })
    }

    /// Strict variant for use as a density oracle: no jitter, zero diagonal rejected.
    pub fn new_strict(a: &Matrix) -> Result<Cholesky> {
        let lower = try_cholesky(a, 0.0).ok_or(RaceError::NotPsd { max_jitter: 0.0 })?;
        if (0..a.rows).any(|i| lower[(i, i)] == 0.0) {
            return Err(RaceError::Singular);
        }
        Ok(Cholesky { lower, jitter: 0.0 })
    }

    /// y = L x
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.lower.rows;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..=i {
                s += self.lower[(i, j)] * x[j];
            }
            out[i] = s;
        }
    }

    /// Solve L y = b.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lower.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let v = self.lower[(i, j)] * y[j];
                y[i] -= v;
            }
            y[i] /= self.lower[(i, i)];
        }
        y
    }

    pub fn log_det(&self) -> f64 {
        (0..self.lower.rows)
            .map(|i| self.lower[(i, i)].ln())
            .sum::<f64>()
            * 2.0
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
            s
        };
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}
