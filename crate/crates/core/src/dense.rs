//! Row-major dense matrices for the verification side: the cyclic Jacobi
//! eigensolver, a dense Cholesky and a few products.

use std::ops::{Index, IndexMut};

use crate::error::Error;

pub const EIG_DIMENSION_CAP: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMatrix { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        DenseMatrix { nrows, ncols, data }
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.ncols..(i + 1) * other.ncols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.ncols);
        (0..self.nrows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        DenseMatrix { nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix { nrows: self.nrows, ncols: self.ncols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Copies `block` into self with its top-left corner at (r0, c0).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        for i in 0..block.nrows {
            for j in 0..block.ncols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Lower Cholesky factor, `None` when a pivot is not positive.
    pub fn cholesky(&self) -> Option<DenseMatrix> {
        let n = self.nrows;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Some(l)
    }

    /// L⁻¹·B for lower-triangular self.
    pub fn forward_solve(&self, b: &DenseMatrix) -> DenseMatrix {
        let n = self.nrows;
        let mut x = b.clone();
        for c in 0..b.ncols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self[(i, i)];
            }
        }
        x
    }

    /// Symmetric eigendecomposition by cyclic Jacobi rotations.
    pub fn symmetric_eig(&self) -> Result<SymEig, Error> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: self.ncols });
        }
        if self.nrows > EIG_DIMENSION_CAP {
            return Err(Error::DimensionCap { dim: self.nrows, cap: EIG_DIMENSION_CAP });
        }
        Ok(jacobi(self))
    }

    pub fn symmetric_eigenvalues(&self) -> Result<Vec<f64>, Error> {
        self.symmetric_eig().map(|e| e.values)
    }
}

#[derive(Clone, Debug)]
pub struct SymEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: DenseMatrix,
}

fn jacobi(m: &DenseMatrix) -> SymEig {
    let n = m.nrows;
    // symmetrize from the lower triangle
    let mut a = DenseMatrix::from_fn(n, n, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] });
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius();
    let abs_floor = 1e-18 * scale;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= 0.5 * f64::EPSILON * (app.abs() * aqq.abs()).sqrt() || apq.abs() <= abs_floor {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    a[(k, p)] = nkp;
                    a[(p, k)] = nkp;
                    a[(k, q)] = nkq;
                    a[(q, k)] = nkq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    SymEig { values, vectors }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
