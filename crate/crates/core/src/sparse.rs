//! Compressed sparse column storage and the small family of products the
//! solver needs.

use crate::dense::DenseMatrix;
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    /// Square, only entries with row >= col stored.
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    colptr: Vec<usize>,
    rowind: Vec<usize>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowind: Vec::new(),
            values: Vec::new(),
            symmetry: Symmetry::General,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    /// Lower-stored diagonal matrix. Zero entries are dropped.
    pub fn diagonal(d: &[f64]) -> Self {
        let mut colptr = Vec::with_capacity(d.len() + 1);
        let mut rowind = Vec::new();
        let mut values = Vec::new();
        colptr.push(0);
        for (j, &v) in d.iter().enumerate() {
            if v != 0.0 {
                rowind.push(j);
                values.push(v);
            }
            colptr.push(rowind.len());
        }
        SparseMatrix { nrows: d.len(), ncols: d.len(), colptr, rowind, values, symmetry: Symmetry::Lower }
    }

    /// General matrix from (row, col, value) triplets. Duplicates are summed,
    /// resulting zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<Self, Error> {
        Self::build(nrows, ncols, entries.iter().copied(), Symmetry::General)
    }

    /// Symmetric matrix from triplets of either triangle; each (i, j) is folded
    /// onto the lower triangle, so callers must supply one half only.
    pub fn symmetric_from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self, Error> {
        for &(i, j, _) in entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { row: i, col: j, nrows: n, ncols: n });
            }
        }
        let folded = entries.iter().map(|&(i, j, v)| if i >= j { (i, j, v) } else { (j, i, v) });
        Self::build(n, n, folded, Symmetry::Lower)
    }

    fn build(
        nrows: usize,
        ncols: usize,
        entries: impl Iterator<Item = (usize, usize, f64)> + Clone,
        symmetry: Symmetry,
    ) -> Result<Self, Error> {
        let mut counts = vec![0usize; ncols + 1];
        for (i, j, _) in entries.clone() {
            if i >= nrows || j >= ncols {
                return Err(Error::IndexOutOfRange { row: i, col: j, nrows, ncols });
            }
            counts[j + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let total = counts[ncols];
        let mut rows = vec![0usize; total];
        let mut vals = vec![0.0; total];
        for (i, j, v) in entries {
            rows[next[j]] = i;
            vals[next[j]] = v;
            next[j] += 1;
        }
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowind = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        colptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for j in 0..ncols {
            scratch.clear();
            scratch.extend((counts[j]..counts[j + 1]).map(|p| (rows[p], vals[p])));
            scratch.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < scratch.len() {
                let row = scratch[k].0;
                let mut sum = 0.0;
                while k < scratch.len() && scratch[k].0 == row {
                    sum += scratch[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    rowind.push(row);
                    values.push(sum);
                }
            }
            colptr.push(rowind.len());
        }
        Ok(SparseMatrix { nrows, ncols, colptr, rowind, values, symmetry })
    }

    /// Assembles a matrix from per-column sorted (row, value) lists. Used
    /// internally where the order is already canonical.
    pub(crate) fn from_sorted_columns(
        nrows: usize,
        columns: Vec<Vec<(usize, f64)>>,
        symmetry: Symmetry,
    ) -> Self {
        let ncols = columns.len();
        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowind = Vec::new();
        let mut values = Vec::new();
        colptr.push(0);
        for col in columns {
            for (i, v) in col {
                if v != 0.0 {
                    rowind.push(i);
                    values.push(v);
                }
            }
            colptr.push(rowind.len());
        }
        SparseMatrix { nrows, ncols, colptr, rowind, values, symmetry }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowind(&self) -> &[usize] {
        &self.rowind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.colptr[j]..self.colptr[j + 1];
        (&self.rowind[r.clone()], &self.values[r])
    }

    /// Stored entry at (i, j); for lower-stored matrices the mirror is looked up.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if self.symmetry == Symmetry::Lower && i < j { (j, i) } else { (i, j) };
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Triplets of the stored entries.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            out.extend(rows.iter().zip(vals).map(|(&i, &v)| (i, j, v)));
        }
        out
    }

    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>, Error> {
        if v.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, found: v.len() });
        }
        let mut out = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            let vj = v[j];
            for (&i, &a) in rows.iter().zip(vals) {
                out[i] += a * vj;
                if self.symmetry == Symmetry::Lower && i != j {
                    out[j] += a * v[i];
                }
            }
        }
        Ok(out)
    }

    /// Mᵀ·v. For symmetric storage this equals `spmv`.
    pub fn spmv_t(&self, v: &[f64]) -> Result<Vec<f64>, Error> {
        if self.symmetry == Symmetry::Lower {
            return self.spmv(v);
        }
        if v.len() != self.nrows {
            return Err(Error::DimensionMismatch { expected: self.nrows, found: v.len() });
        }
        let mut out = vec![0.0; self.ncols];
        for (j, o) in out.iter_mut().enumerate() {
            let (rows, vals) = self.col(j);
            *o = rows.iter().zip(vals).map(|(&i, &a)| a * v[i]).sum();
        }
        Ok(out)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.rowind {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut rowind = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&i, &a) in rows.iter().zip(vals) {
                rowind[next[i]] = j;
                values[next[i]] = a;
                next[i] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            colptr: counts,
            rowind,
            values,
            symmetry: Symmetry::General,
        }
    }

    /// Σ_{j∈cols} θ_j a_j a_jᵀ, stored lower. `scale` is indexed like `cols`
    /// (or like all columns when `cols` is `None`).
    pub fn aat_product(&self, scale: Option<&[f64]>, cols: Option<&[usize]>) -> Result<SparseMatrix, Error> {
        let count = cols.map_or(self.ncols, |c| c.len());
        if let Some(s) = scale {
            if s.len() != count {
                return Err(Error::DimensionMismatch { expected: count, found: s.len() });
            }
        }
        // weight per original column; NaN marks excluded columns
        let mut weight = vec![f64::NAN; self.ncols];
        match cols {
            Some(c) => {
                for (p, &j) in c.iter().enumerate() {
                    if j >= self.ncols {
                        return Err(Error::IndexOutOfRange { row: 0, col: j, nrows: self.nrows, ncols: self.ncols });
                    }
                    weight[j] = scale.map_or(1.0, |s| s[p]);
                }
            }
            None => {
                for (j, w) in weight.iter_mut().enumerate() {
                    *w = scale.map_or(1.0, |s| s[j]);
                }
            }
        }
        let at = self.transpose();
        let m = self.nrows;
        let mut acc = vec![0.0; m];
        let mut mark = vec![usize::MAX; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut columns = Vec::with_capacity(m);
        for i in 0..m {
            touched.clear();
            let (jcols, avals) = at.col(i);
            for (&j, &aij) in jcols.iter().zip(avals) {
                let w = weight[j];
                if w.is_nan() {
                    continue;
                }
                let f = w * aij;
                let (rows, vals) = self.col(j);
                let start = rows.partition_point(|&k| k < i);
                for (&k, &akj) in rows[start..].iter().zip(&vals[start..]) {
                    if mark[k] != i {
                        mark[k] = i;
                        acc[k] = 0.0;
                        touched.push(k);
                    }
                    acc[k] += f * akj;
                }
            }
            touched.sort_unstable();
            columns.push(touched.iter().map(|&k| (k, acc[k])).collect());
        }
        Ok(SparseMatrix::from_sorted_columns(m, columns, Symmetry::Lower))
    }

    /// Maximum absolute row sum, counting the mirrored half of lower storage.
    pub fn inf_norm_sym(&self) -> f64 {
        let mut sums = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&i, &a) in rows.iter().zip(vals) {
                sums[i] += a.abs();
                if self.symmetry == Symmetry::Lower && i != j {
                    sums[j] += a.abs();
                }
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Power iteration on MᵀM; returns an estimate of the largest singular value.
    pub fn two_norm_estimate(&self, iters: usize, tol: f64) -> f64 {
        let n = self.ncols;
        if n == 0 || self.is_empty() {
            return 0.0;
        }
        let mut v: Vec<f64> = (0..n).map(|j| 1.0 + 0.1 * ((j * 7919) % 13) as f64).collect();
        let norm = crate::dense::norm2(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        let mut sigma = 0.0;
        for _ in 0..iters.max(1) {
            let w = self.spmv(&v).expect("dimension");
            let u = self.spmv_t(&w).expect("dimension");
            let un = crate::dense::norm2(&u);
            if un == 0.0 {
                return sigma;
            }
            let next = un.sqrt();
            v = u.into_iter().map(|x| x / un).collect();
            let done = (next - sigma).abs() <= tol * next;
            sigma = next;
            if done {
                break;
            }
        }
        sigma
    }

    /// P M Pᵀ where `perm[new] = old`. Input must be lower-stored.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Result<SparseMatrix, Error> {
        if self.symmetry != Symmetry::Lower {
            return Err(Error::NotSymmetric);
        }
        let n = self.ncols;
        if perm.len() != n {
            return Err(Error::InvalidPermutation);
        }
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || inv[old] != usize::MAX {
                return Err(Error::InvalidPermutation);
            }
            inv[old] = new;
        }
        let mut entries = Vec::with_capacity(self.nnz());
        for (i, j, v) in self.triplets() {
            entries.push((inv[i], inv[j], v));
        }
        SparseMatrix::symmetric_from_triplets(n, &entries)
    }

    /// Rows and columns selected by index lists (rows `None` keeps all).
    /// The result is general storage.
    pub fn submatrix(&self, rows: Option<&[usize]>, cols: &[usize]) -> SparseMatrix {
        let (nrows, map) = match rows {
            Some(r) => {
                let mut map = vec![usize::MAX; self.nrows];
                for (p, &i) in r.iter().enumerate() {
                    map[i] = p;
                }
                (r.len(), Some(map))
            }
            None => (self.nrows, None),
        };
        let source = if self.symmetry == Symmetry::Lower { self.to_general() } else { self.clone() };
        let mut columns = Vec::with_capacity(cols.len());
        for &j in cols {
            let (ri, vals) = source.col(j);
            let mut col: Vec<(usize, f64)> = match &map {
                Some(m) => ri
                    .iter()
                    .zip(vals)
                    .filter(|(&i, _)| m[i] != usize::MAX)
                    .map(|(&i, &v)| (m[i], v))
                    .collect(),
                None => ri.iter().copied().zip(vals.iter().copied()).collect(),
            };
            col.sort_by_key(|e| e.0);
            columns.push(col);
        }
        SparseMatrix::from_sorted_columns(nrows, columns, Symmetry::General)
    }

    /// Full (both halves) general copy of a lower-stored matrix.
    pub fn to_general(&self) -> SparseMatrix {
        if self.symmetry == Symmetry::General {
            return self.clone();
        }
        let mut entries = Vec::with_capacity(2 * self.nnz());
        for (i, j, v) in self.triplets() {
            entries.push((i, j, v));
            if i != j {
                entries.push((j, i, v));
            }
        }
        SparseMatrix::from_triplets(self.nrows, self.ncols, &entries).expect("indices in range")
    }

    /// M + diag(d) for a lower-stored M.
    pub fn add_diagonal(&self, d: &[f64]) -> SparseMatrix {
        assert_eq!(self.symmetry, Symmetry::Lower);
        assert_eq!(d.len(), self.ncols);
        let mut t = self.triplets();
        t.extend(d.iter().enumerate().filter(|e| *e.1 != 0.0).map(|(j, &v)| (j, j, v)));
        SparseMatrix::symmetric_from_triplets(self.ncols, &t).expect("in range")
    }

    /// Diagonal entries (zeros included).
    pub fn diagonal_values(&self) -> Vec<f64> {
        let n = self.nrows.min(self.ncols);
        (0..n).map(|j| self.get(j, j)).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
            if self.symmetry == Symmetry::Lower && i != j {
                d[(j, i)] += v;
            }
        }
        d
    }

    pub fn check_invariants(&self) -> bool {
        if self.colptr.len() != self.ncols + 1 || self.colptr[0] != 0 || self.colptr[self.ncols] != self.nnz() {
            return false;
        }
        for j in 0..self.ncols {
            if self.colptr[j] > self.colptr[j + 1] {
                return false;
            }
            let (rows, vals) = self.col(j);
            if rows.windows(2).any(|w| w[0] >= w[1]) || vals.iter().any(|&v| v == 0.0) {
                return false;
            }
            if rows.iter().any(|&i| i >= self.nrows) {
                return false;
            }
            if self.symmetry == Symmetry::Lower && rows.first().is_some_and(|&i| i < j) {
                return false;
            }
        }
        true
    }
}

/// Split of column indices into N (absorbed into the diagonal) and B.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColumnPartition {
    pub indices_n: Vec<usize>,
    pub indices_b: Vec<usize>,
}

impl ColumnPartition {
    pub fn from_mask(in_n: &[bool]) -> Self {
        let mut p = ColumnPartition::default();
        for (j, &flag) in in_n.iter().enumerate() {
            if flag {
                p.indices_n.push(j);
            } else {
                p.indices_b.push(j);
            }
        }
        p
    }

    pub fn all_b(n: usize) -> Self {
        ColumnPartition { indices_n: Vec::new(), indices_b: (0..n).collect() }
    }

    pub fn n_len(&self) -> usize {
        self.indices_n.len()
    }

    pub fn b_len(&self) -> usize {
        self.indices_b.len()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.indices_n.len() + self.indices_b.len()];
        for &j in &self.indices_n {
            m[j] = true;
        }
        m
    }

    pub fn is_valid(&self, n: usize) -> bool {
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&self.indices_n) || !sorted(&self.indices_b) || self.indices_n.len() + self.indices_b.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &j in self.indices_n.iter().chain(&self.indices_b) {
            if j >= n || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_identity_and_duplicates() {
        let i = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(i.to_dense(), DenseMatrix::identity(2));
        let d = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(d.nnz(), 1);
        assert_eq!(d.get(0, 0), 3.0);
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        let z = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(z.nnz(), 0);
        assert!(z.check_invariants());
    }

    #[test]
    fn spmv_cases() {
        let i = SparseMatrix::identity(2);
        assert_eq!(i.spmv(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        let d = SparseMatrix::diagonal(&[1.0, 2.0]);
        assert_eq!(d.spmv(&[1.0, 1.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(SparseMatrix::zeros(2, 3).spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert!(i.spmv(&[1.0]).is_err());
    }

    #[test]
    fn aat_examples() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0]).to_general();
        let p = a.aat_product(Some(&[1.0, 1.0]), None).unwrap();
        assert_eq!(p.to_dense(), SparseMatrix::diagonal(&[1.0, 4.0]).to_dense());
        let row = SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(row.aat_product(Some(&[1.0, 1.0]), None).unwrap().get(0, 0), 2.0);
        let p = a.aat_product(Some(&[3.0]), Some(&[1])).unwrap();
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(1, 1), 12.0);
        assert!(a.aat_product(Some(&[1.0]), None).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(SparseMatrix::diagonal(&[1.0, 4.0]).inf_norm_sym(), 4.0);
        let m = SparseMatrix::symmetric_from_triplets(2, &[(0, 0, 2.0), (1, 0, -3.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(m.inf_norm_sym(), 5.0);
        assert_eq!(SparseMatrix::zeros(3, 3).inf_norm_sym(), 0.0);
        let d = SparseMatrix::diagonal(&[3.0, 1.0]).to_general();
        assert!((d.two_norm_estimate(200, 1e-12) - 3.0).abs() < 1e-6);
        assert!((SparseMatrix::identity(4).to_general().two_norm_estimate(10, 1e-12) - 1.0).abs() < 1e-12);
        let n = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0)]).unwrap();
        assert!((n.two_norm_estimate(50, 1e-12) - 1.0).abs() < 1e-6);
        assert_eq!(SparseMatrix::zeros(2, 2).two_norm_estimate(5, 1e-6), 0.0);
    }

    #[test]
    fn permutation() {
        let d = SparseMatrix::diagonal(&[1.0, 2.0]);
        assert_eq!(d.permute_symmetric(&[0, 1]).unwrap(), d);
        assert_eq!(d.permute_symmetric(&[1, 0]).unwrap().diagonal_values(), vec![2.0, 1.0]);
        assert!(d.permute_symmetric(&[0, 0]).is_err());
    }

    #[test]
    fn partition_mask_roundtrip() {
        let p = ColumnPartition::from_mask(&[true, false, true]);
        assert_eq!(p.indices_n, vec![0, 2]);
        assert_eq!(p.indices_b, vec![1]);
        assert_eq!(p.mask(), vec![true, false, true]);
        assert!(p.is_valid(3));
        assert!(!ColumnPartition { indices_n: vec![0], indices_b: vec![0] }.is_valid(2));
    }
}
