//! Up-looking sparse LDLᵀ with 1×1 pivots, used both as a Cholesky (all
//! pivots positive) and as a quasi-definite factorization with a prescribed
//! sign pattern. A dense variant exists for small cross-checks.

use crate::dense::DenseMatrix;
use crate::error::{Error, FactorizationFailure};
use crate::ordering::minimum_degree;
use crate::sparse::{SparseMatrix, Symmetry};

pub const CHOLESKY_PIVOT_FLOOR: f64 = 1e-30;
pub const LDL_RELATIVE_PIVOT: f64 = 1e-14;
pub const DENSE_FALLBACK_CAP: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Positive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Sparse,
    Dense,
}

#[derive(Clone, Copy, Debug)]
enum PivotRule<'a> {
    Positive,
    Signed { signs: &'a [Sign], threshold: f64 },
}

/// P M Pᵀ = L D Lᵀ with unit lower L stored by columns (strict part only).
#[derive(Clone, Debug)]
pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

/// Cholesky as LDLᵀ with strictly positive D; `l()` returns L·√D.
#[derive(Clone, Debug)]
pub struct CholeskyFactor(LdlFactor);

pub fn cholesky(m: &SparseMatrix) -> Result<CholeskyFactor, FactorizationFailure> {
    let perm = minimum_degree(m);
    cholesky_with_ordering(m, &perm)
}

pub fn cholesky_with_ordering(m: &SparseMatrix, perm: &[usize]) -> Result<CholeskyFactor, FactorizationFailure> {
    factor_sparse(m, perm, PivotRule::Positive).map(CholeskyFactor)
}

pub fn ldlt_quasidefinite(m: &SparseMatrix, signs: &[Sign]) -> Result<LdlFactor, FactorizationFailure> {
    let perm = minimum_degree(m);
    ldlt_with_ordering(m, signs, &perm)
}

pub fn ldlt_with_ordering(m: &SparseMatrix, signs: &[Sign], perm: &[usize]) -> Result<LdlFactor, FactorizationFailure> {
    let threshold = LDL_RELATIVE_PIVOT * m.inf_norm_sym();
    factor_sparse(m, perm, PivotRule::Signed { signs, threshold })
}

/// Dense LDLᵀ in natural order with the same pivot rules. Returned in the
/// sparse factor layout so solves are shared.
pub fn ldlt_dense(m: &SparseMatrix, signs: Option<&[Sign]>) -> Result<LdlFactor, FactorizationFailure> {
    let n = m.ncols();
    assert!(n <= DENSE_FALLBACK_CAP, "dense fallback is limited to small systems");
    let threshold = LDL_RELATIVE_PIVOT * m.inf_norm_sym();
    let mut a = m.to_dense();
    let mut d = vec![0.0; n];
    for k in 0..n {
        let pivot = a[(k, k)];
        check_pivot(k, pivot, signs.map_or(PivotRule::Positive, |s| PivotRule::Signed { signs: s, threshold }))?;
        d[k] = pivot;
        let col: Vec<f64> = (0..n).map(|i| if i > k { a[(i, k)] } else { 0.0 }).collect();
        for i in k + 1..n {
            let lik = col[i] / pivot;
            if lik == 0.0 {
                continue;
            }
            for j in k + 1..=i {
                a[(i, j)] -= lik * col[j];
            }
            a[(i, k)] = lik;
        }
    }
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        columns.push((k + 1..n).map(|i| (i, a[(i, k)])).filter(|e| e.1 != 0.0).collect::<Vec<_>>());
    }
    let mut lp = vec![0];
    let mut li = Vec::new();
    let mut lx = Vec::new();
    for col in columns {
        for (i, v) in col {
            li.push(i);
            lx.push(v);
        }
        lp.push(li.len());
    }
    Ok(LdlFactor { n, perm: (0..n).collect(), lp, li, lx, d })
}

pub fn cholesky_dense(m: &SparseMatrix) -> Result<CholeskyFactor, FactorizationFailure> {
    ldlt_dense(m, None).map(CholeskyFactor)
}

fn check_pivot(k: usize, pivot: f64, rule: PivotRule) -> Result<(), FactorizationFailure> {
    let ok = pivot.is_finite()
        && match rule {
            PivotRule::Positive => pivot > CHOLESKY_PIVOT_FLOOR,
            PivotRule::Signed { signs, threshold } => {
                pivot.abs() >= threshold
                    && pivot != 0.0
                    && match signs[k] {
                        Sign::Negative => pivot < 0.0,
                        Sign::Positive => pivot > 0.0,
                    }
            }
        };
    if ok {
        Ok(())
    } else {
        Err(FactorizationFailure { index: k, pivot })
    }
}

fn factor_sparse(m: &SparseMatrix, perm: &[usize], rule: PivotRule) -> Result<LdlFactor, FactorizationFailure> {
    assert_eq!(m.symmetry(), Symmetry::Lower, "factorization expects lower-stored symmetric input");
    let n = m.ncols();
    assert_eq!(perm.len(), n);
    let permuted = m.permute_symmetric(perm).expect("valid permutation");
    // column k of the upper triangle = row k of the lower triangle
    let upper = permuted.transpose();
    let (ap, ai, ax) = (upper.colptr(), upper.rowind(), upper.values());

    // elimination tree and column counts
    let none = usize::MAX;
    let mut parent = vec![none; n];
    let mut flag = vec![none; n];
    let mut lnz = vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for &row in &ai[ap[k]..ap[k + 1]] {
            let mut i = row;
            if i >= k {
                continue;
            }
            while flag[i] != k {
                if parent[i] == none {
                    parent[i] = k;
                }
                lnz[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    let total = lp[n];
    let mut li = vec![0usize; total];
    let mut lx = vec![0.0; total];
    let mut d = vec![0.0; n];

    let mut y = vec![0.0; n];
    let mut pattern = vec![0usize; n];
    let mut stack = vec![0usize; n];
    lnz.iter_mut().for_each(|c| *c = 0);
    flag.iter_mut().for_each(|f| *f = none);
    let signs_perm: Vec<Sign>;
    let rule = match rule {
        PivotRule::Signed { signs, threshold } => {
            signs_perm = perm.iter().map(|&old| signs[old]).collect();
            PivotRule::Signed { signs: &signs_perm, threshold }
        }
        r => r,
    };
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        for p in ap[k]..ap[k + 1] {
            let mut i = ai[p];
            y[i] += ax[p];
            let mut len = 0;
            while flag[i] != k {
                stack[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                pattern[top] = stack[len];
            }
        }
        let mut dk = y[k];
        y[k] = 0.0;
        for &i in &pattern[top..n] {
            let yi = y[i];
            y[i] = 0.0;
            let start = lp[i];
            let end = start + lnz[i];
            for p in start..end {
                y[li[p]] -= lx[p] * yi;
            }
            let lki = yi / d[i];
            dk -= lki * yi;
            li[end] = k;
            lx[end] = lki;
            lnz[i] += 1;
        }
        check_pivot(k, dk, rule)?;
        d[k] = dk;
    }
    Ok(LdlFactor { n, perm: perm.to_vec(), lp, li, lx, d })
}

impl LdlFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Stored entries of L including the unit diagonal.
    pub fn nnz_l(&self) -> usize {
        self.lx.len() + self.n
    }

    /// (negative, positive) pivot counts.
    pub fn inertia(&self) -> (usize, usize) {
        let neg = self.d.iter().filter(|&&v| v < 0.0).count();
        (neg, self.n - neg)
    }

    pub fn unit_lower(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.nnz_l());
        for j in 0..self.n {
            t.push((j, j, 1.0));
            for p in self.lp[j]..self.lp[j + 1] {
                t.push((self.li[p], j, self.lx[p]));
            }
        }
        SparseMatrix::from_triplets(self.n, self.n, &t).expect("in range")
    }

    /// Dense L D Lᵀ in the permuted order, for residual checks.
    pub fn reconstruct(&self) -> DenseMatrix {
        let l = self.unit_lower().to_dense();
        l.matmul(&DenseMatrix::from_diag(&self.d)).matmul(&l.transpose())
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, Error> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rhs.len() });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= dj;
        }
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![0.0; self.n];
        for (k, &old) in self.perm.iter().enumerate() {
            out[old] = x[k];
        }
        Ok(out)
    }

    /// Solve followed by one step of iterative refinement against `m`.
    pub fn solve_refined(&self, m: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>, Error> {
        let mut x = self.solve(rhs)?;
        let mx = m.spmv(&x)?;
        let r: Vec<f64> = rhs.iter().zip(&mx).map(|(b, a)| b - a).collect();
        let dx = self.solve(&r)?;
        x.iter_mut().zip(dx).for_each(|(a, b)| *a += b);
        Ok(x)
    }
}

impl CholeskyFactor {
    pub fn ldl(&self) -> &LdlFactor {
        &self.0
    }

    pub fn perm(&self) -> &[usize] {
        &self.0.perm
    }

    pub fn nnz_l(&self) -> usize {
        self.0.nnz_l()
    }

    /// L·√D, lower triangular with positive diagonal.
    pub fn l(&self) -> SparseMatrix {
        let f = &self.0;
        let mut t = Vec::with_capacity(f.nnz_l());
        for j in 0..f.n {
            let s = f.d[j].sqrt();
            t.push((j, j, s));
            for p in f.lp[j]..f.lp[j + 1] {
                t.push((f.li[p], j, f.lx[p] * s));
            }
        }
        SparseMatrix::from_triplets(f.n, f.n, &t).expect("in range")
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, Error> {
        self.0.solve(rhs)
    }

    pub fn solve_refined(&self, m: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>, Error> {
        self.0.solve_refined(m, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, t: &[(usize, usize, f64)]) -> SparseMatrix {
        SparseMatrix::symmetric_from_triplets(n, t).unwrap()
    }

    #[test]
    fn cholesky_examples() {
        let f = cholesky(&SparseMatrix::identity(3)).unwrap();
        assert_eq!(f.l().to_dense(), DenseMatrix::identity(3));
        let m = sym(2, &[(0, 0, 4.0), (1, 0, 2.0), (1, 1, 3.0)]);
        let f = cholesky_with_ordering(&m, &[0, 1]).unwrap();
        let l = f.l().to_dense();
        assert_eq!(l[(0, 0)], 2.0);
        assert!(l.matmul(&l.transpose()).sub(&m.to_dense()).max_abs() < 1e-15);
        let bad = sym(2, &[(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(cholesky(&bad).is_err());
    }

    #[test]
    fn ldlt_examples() {
        let signs = [Sign::Negative, Sign::Positive];
        let f = ldlt_quasidefinite(&SparseMatrix::diagonal(&[-2.0, 3.0]), &signs).unwrap();
        assert_eq!(f.d(), &[-2.0, 3.0]);
        let m = sym(2, &[(0, 0, -2.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let f = ldlt_with_ordering(&m, &signs, &[0, 1]).unwrap();
        assert_eq!(f.d(), &[-2.0, 3.5]);
        assert!(f.reconstruct().sub(&m.to_dense()).max_abs() < 1e-15);
        let z = sym(2, &[(1, 0, 1.0)]);
        assert!(ldlt_quasidefinite(&z, &signs).is_err());
        // sign disagreement is rejected
        assert!(ldlt_quasidefinite(&SparseMatrix::diagonal(&[2.0, 3.0]), &signs).is_err());
    }

    #[test]
    fn solves() {
        let f = cholesky(&SparseMatrix::identity(2)).unwrap();
        assert_eq!(f.solve(&[1.0, -2.0]).unwrap(), vec![1.0, -2.0]);
        let f = cholesky(&SparseMatrix::diagonal(&[2.0])).unwrap();
        assert_eq!(f.solve(&[4.0]).unwrap(), vec![2.0]);
        assert!(f.solve(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn dense_matches_sparse() {
        let m = sym(3, &[(0, 0, -4.0), (1, 0, 1.0), (2, 0, 2.0), (1, 1, -3.0), (2, 2, 5.0), (2, 1, 1.0)]);
        let signs = [Sign::Negative, Sign::Negative, Sign::Positive];
        let a = ldlt_dense(&m, Some(&signs)).unwrap();
        let b = ldlt_with_ordering(&m, &signs, &[0, 1, 2]).unwrap();
        for (x, y) in a.d().iter().zip(b.d()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert_eq!(a.inertia(), (2, 1));
        let rhs = [1.0, 2.0, 3.0];
        let xa = a.solve(&rhs).unwrap();
        let xb = b.solve(&rhs).unwrap();
        for (x, y) in xa.iter().zip(&xb) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
