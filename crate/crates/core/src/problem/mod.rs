//! Problem input and the standard form min cᵀx + ½xᵀQx, Ax = b, x ≥ 0.

pub mod mps;

use std::path::Path;

use crate::error::Error;
use crate::sparse::{SparseMatrix, Symmetry};
pub use mps::{parse_mps, parse_mps_with, Layout, RawProblem, RowKind};

pub const FREE_BOX: f64 = 100.0;

/// How one original column appears in standard form: x = shift + sign·x'.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnMap {
    /// `None` for fixed variables, which are eliminated.
    pub column: Option<usize>,
    pub shift: f64,
    pub sign: f64,
}

/// Box placed around an originally free variable.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeVarBox {
    pub original: usize,
    pub column: usize,
    pub slack: usize,
    pub row: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct StandardQP {
    pub name: String,
    pub c: Vec<f64>,
    /// Lower-stored, n×n; empty for an LP.
    pub q: SparseMatrix,
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub obj_constant: f64,
    pub maximize: bool,
    pub columns: Vec<ColumnMap>,
    pub free_boxes: Vec<FreeVarBox>,
}

impl StandardQP {
    /// Builds a problem that is already in standard form.
    pub fn new(c: Vec<f64>, q: Option<SparseMatrix>, a: SparseMatrix, b: Vec<f64>) -> Result<Self, Error> {
        let n = a.ncols();
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
        }
        let q = q.unwrap_or_else(|| SparseMatrix::symmetric_from_triplets(n, &[]).expect("empty"));
        if q.symmetry() != Symmetry::Lower || q.ncols() != n {
            return Err(Error::NotSymmetric);
        }
        Ok(StandardQP {
            name: String::new(),
            c,
            q,
            a,
            b,
            obj_constant: 0.0,
            maximize: false,
            columns: (0..n).map(|j| ColumnMap { column: Some(j), shift: 0.0, sign: 1.0 }).collect(),
            free_boxes: Vec::new(),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        let raw = parse_mps(&text)?;
        let mut p = to_standard_form(&raw)?;
        if p.name.is_empty() {
            p.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_qp(&self) -> bool {
        !self.q.is_empty()
    }

    /// cᵀx + ½xᵀQx + constant, in standard-form variables.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let qx = self.q.spmv(x).expect("dimension");
        let lin: f64 = self.c.iter().zip(x).map(|(c, x)| c * x).sum();
        let quad: f64 = qx.iter().zip(x).map(|(a, b)| a * b).sum();
        lin + 0.5 * quad + self.obj_constant
    }

    /// Objective in the sense of the original file.
    pub fn original_objective(&self, x: &[f64]) -> f64 {
        let v = self.objective(x);
        if self.maximize {
            -v
        } else {
            v
        }
    }

    /// Values of the original variables.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|m| m.shift + m.column.map_or(0.0, |j| m.sign * x[j]))
            .collect()
    }

    /// Doubles the box of any boxed free variable whose value lies within 1%
    /// of a box end. A lower move shifts the variable, so `x` is updated to
    /// keep representing the same original point. Returns whether anything
    /// changed; when it did, primal feasibility of the iterate is lost.
    pub fn expand_free_boxes(&mut self, x: &mut [f64]) -> bool {
        let mut changed = false;
        for k in 0..self.free_boxes.len() {
            let fb = self.free_boxes[k].clone();
            let value = fb.lower + x[fb.column];
            if value >= fb.upper - 0.01 * fb.upper.abs() {
                let new_upper = 2.0 * fb.upper;
                self.b[fb.row] += new_upper - fb.upper;
                self.free_boxes[k].upper = new_upper;
                changed = true;
            }
            if value <= fb.lower + 0.01 * fb.lower.abs() {
                let new_lower = 2.0 * fb.lower;
                let delta = fb.lower - new_lower;
                self.shift_column(fb.column, delta);
                x[fb.column] += delta;
                self.free_boxes[k].lower = new_lower;
                self.columns[fb.original].shift = new_lower;
                changed = true;
            }
        }
        changed
    }

    /// Substitutes x'_j = x''_j − delta (lowering the shift of column j by delta).
    fn shift_column(&mut self, j: usize, delta: f64) {
        let (rows, vals) = self.a.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            self.b[i] += v * delta;
        }
        // c'ᵀ(x'' − δe_j) + ½(x'' − δe_j)ᵀQ(x'' − δe_j)
        let mut e = vec![0.0; self.n()];
        e[j] = 1.0;
        let qj = self.q.spmv(&e).expect("dimension");
        self.obj_constant += -self.c[j] * delta + 0.5 * delta * delta * qj[j];
        for (ck, qkj) in self.c.iter_mut().zip(&qj) {
            *ck -= qkj * delta;
        }
    }
}

/// Shift-and-slack conversion. Columns: mapped originals, then row slacks,
/// then box slacks. Rows: original constraints, then box rows.
pub fn to_standard_form(raw: &RawProblem) -> Result<StandardQP, Error> {
    let n0 = raw.ncols();
    let m0 = raw.nrows();
    let sense = if raw.maximize { -1.0 } else { 1.0 };
    let q0 = if raw.quadratic.is_empty() {
        SparseMatrix::symmetric_from_triplets(n0, &[])?
    } else {
        let t: Vec<_> = raw.quadratic.iter().map(|&(i, j, v)| (i, j, sense * v)).collect();
        SparseMatrix::symmetric_from_triplets(n0, &t)?
    };
    let c0: Vec<f64> = raw.objective.iter().map(|v| sense * v).collect();

    let mut columns = Vec::with_capacity(n0);
    let mut boxes: Vec<(usize, f64)> = Vec::new(); // (std column, width)
    let mut free: Vec<usize> = Vec::new();
    let mut n = 0;
    for j in 0..n0 {
        let (l, u) = (raw.lower[j], raw.upper[j]);
        if l > u {
            return Err(Error::InfeasibleBounds { name: raw.col_names[j].clone(), lower: l, upper: u });
        }
        let map = if l == u {
            ColumnMap { column: None, shift: l, sign: 1.0 }
        } else if l.is_finite() {
            if u.is_finite() {
                boxes.push((n, u - l));
            }
            ColumnMap { column: Some(n), shift: l, sign: 1.0 }
        } else if u.is_finite() {
            ColumnMap { column: Some(n), shift: u, sign: -1.0 }
        } else {
            free.push(j);
            boxes.push((n, 2.0 * FREE_BOX));
            ColumnMap { column: Some(n), shift: -FREE_BOX, sign: 1.0 }
        };
        if map.column.is_some() {
            n += 1;
        }
        columns.push(map);
    }

    let shifts: Vec<f64> = columns.iter().map(|m| m.shift).collect();
    let mut b = vec![0.0; m0];
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.entries.len() + m0 + 2 * boxes.len());
    let mut activity_shift = vec![0.0; m0];
    for &(i, j, v) in &raw.entries {
        activity_shift[i] += v * shifts[j];
        if let Some(col) = columns[j].column {
            triplets.push((i, col, v * columns[j].sign));
        }
    }
    for i in 0..m0 {
        let (lo, hi) = raw.row_bounds(i);
        let (lo, hi) = (lo - activity_shift[i], hi - activity_shift[i]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => b[i] = lo,
            (true, true) => {
                // a x - s = lo, 0 <= s <= hi - lo
                triplets.push((i, n, -1.0));
                boxes.push((n, hi - lo));
                b[i] = lo;
                n += 1;
            }
            (false, true) => {
                triplets.push((i, n, 1.0));
                b[i] = hi;
                n += 1;
            }
            (true, false) => {
                triplets.push((i, n, -1.0));
                b[i] = lo;
                n += 1;
            }
            (false, false) => return Err(Error::Invalid(format!("row {} has no finite side", raw.row_names[i]))),
        }
    }
    let mut m = m0;
    let mut free_boxes = Vec::new();
    for &(col, width) in &boxes {
        triplets.push((m, col, 1.0));
        triplets.push((m, n, 1.0));
        b.push(width);
        if let Some(pos) = free.iter().position(|&j| columns[j].column == Some(col)) {
            free_boxes.push(FreeVarBox {
                original: free[pos],
                column: col,
                slack: n,
                row: m,
                lower: -FREE_BOX,
                upper: FREE_BOX,
            });
        }
        m += 1;
        n += 1;
    }
    let a = SparseMatrix::from_triplets(m, n, &triplets)?;

    // objective: x = s + S x'
    let q0x = q0.spmv(&shifts)?;
    let mut c = vec![0.0; n];
    let mut constant = -sense * raw.objective_rhs;
    constant += c0.iter().zip(&shifts).map(|(c, s)| c * s).sum::<f64>();
    constant += 0.5 * q0x.iter().zip(&shifts).map(|(a, b)| a * b).sum::<f64>();
    for j in 0..n0 {
        if let Some(col) = columns[j].column {
            c[col] = columns[j].sign * (c0[j] + q0x[j]);
        }
    }
    let mut qt = Vec::new();
    for (i, j, v) in q0.triplets() {
        if let (Some(ci), Some(cj)) = (columns[i].column, columns[j].column) {
            qt.push((ci, cj, v * columns[i].sign * columns[j].sign));
        }
    }
    let q = SparseMatrix::symmetric_from_triplets(n, &qt)?;
    Ok(StandardQP {
        name: raw.name.clone(),
        c,
        q,
        a,
        b,
        obj_constant: constant,
        maximize: raw.maximize,
        columns,
        free_boxes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawProblem {
        parse_mps(text).unwrap()
    }

    #[test]
    fn l_row_gets_slack() {
        let p = to_standard_form(&raw("NAME T
ROWS
 N obj
 L c1
COLUMNS
 x obj 1 c1 1
RHS
 r c1 5
ENDATA
"))
        .unwrap();
        assert_eq!((p.m(), p.n()), (1, 2));
        assert_eq!(p.a.get(0, 1), 1.0);
        assert_eq!(p.b, vec![5.0]);
    }

    #[test]
    fn free_variable_is_boxed() {
        let p = to_standard_form(&raw("NAME T
ROWS
 N obj
 E c1
COLUMNS
 x obj 1 c1 1
RHS
 r c1 5
BOUNDS
 FR b x
ENDATA
"))
        .unwrap();
        assert_eq!(p.free_boxes.len(), 1);
        let fb = &p.free_boxes[0];
        assert_eq!((fb.lower, fb.upper), (-100.0, 100.0));
        assert_eq!(p.b, vec![105.0, 200.0]);
        // x' = 105 means x = 5
        assert_eq!(p.recover(&[105.0, 95.0]), vec![5.0]);
    }

    #[test]
    fn objective_preserved_with_bounds() {
        // min 2x1 - x2 + 0.5*(x1^2) + 3, 1 <= x1 <= 4, x2 <= 2 (lower -inf)
        let p = to_standard_form(&raw("NAME T
ROWS
 N obj
 G c1
COLUMNS
 x1 obj 2 c1 1
 x2 obj -1 c1 1
RHS
 r obj -3 c1 0
BOUNDS
 LO b x1 1
 UP b x1 4
 MI b x2
 UP b x2 2
QUADOBJ
 x1 x1 1
ENDATA
"))
        .unwrap();
        // original point x1 = 2, x2 = 1
        let orig = |x1: f64, x2: f64| 2.0 * x1 - x2 + 0.5 * x1 * x1 + 3.0;
        // x1 = 1 + x1', x2 = 2 - x2'
        let mut x = vec![0.0; p.n()];
        x[0] = 1.0;
        x[1] = 1.0;
        assert_eq!(p.recover(&x), vec![2.0, 1.0]);
        assert!((p.objective(&x) - orig(2.0, 1.0)).abs() < 1e-14);
    }

    #[test]
    fn box_expansion() {
        let mut p = to_standard_form(&raw("NAME T
ROWS
 N obj
 E c1
COLUMNS
 x obj 1 c1 1
 y obj 1 c1 1
RHS
 r c1 0
BOUNDS
 FR b x
 FR b y
ENDATA
"))
        .unwrap();
        let mut x = vec![100.0, 100.0, 100.0, 100.0];
        assert!(!p.expand_free_boxes(&mut x));
        // x at 99.5 (x' = 199.5), y at -99.5 (y' = 0.5)
        let mut x = vec![199.5, 0.5, 0.5, 199.5];
        let before = p.recover(&x);
        let obj_before = p.objective(&x);
        assert!(p.expand_free_boxes(&mut x));
        assert_eq!(p.free_boxes[0].upper, 200.0);
        assert_eq!(p.free_boxes[1].lower, -200.0);
        assert_eq!(p.recover(&x), before);
        assert!((p.objective(&x) - obj_before).abs() < 1e-12);
    }
}
