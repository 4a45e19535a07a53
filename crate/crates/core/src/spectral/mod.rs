//! Dense verification of the eigenvalue claims made about the regularized
//! systems. Everything here is a post-hoc check and never feeds back into the
//! solver.

mod gershgorin;
mod oracle;
mod perturbation;
mod radius;
mod snapshot;
mod theorems;

use std::fmt::{self, Write as _};

use crate::dense::{norm_inf, DenseMatrix};
use crate::error::Error;
use crate::sparse::SparseMatrix;

pub use gershgorin::{gershgorin_certify, min_positive_diagonal, GershgorinReport};
pub use oracle::{newton_residual, NewtonResidual};
pub use perturbation::{perturbation_certify_lp, perturbation_certify_qp, PerturbationReport, CLUSTER_GAP};
pub use radius::{spectral_radius_certify, RadiusReport};
pub use snapshot::{certify_run, certify_snapshot, snapshot_radius, SnapshotReport, CERTIFY_DIMENSION};
pub use theorems::{certify_lp_augmented, certify_lp_reduced, certify_qp_augmented, certify_qp_reduced};

/// Absolute slack added to perturbation bounds.
pub const PERTURBATION_SLACK: f64 = 1e-10;
/// Relative slack on eigenvalue bounds, scaled by 1 + ‖M‖∞.
pub const BOUND_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    LpAugmented,
    LpReduced,
    QpAugmented,
    QpReduced,
    GershgorinDual,
    GershgorinPrimalB,
    GershgorinPrimalN,
    PerturbationLp,
    PerturbationQp,
    SpectralRadius,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::LpAugmented => "lp-augmented",
            SystemKind::LpReduced => "lp-reduced",
            SystemKind::QpAugmented => "qp-augmented",
            SystemKind::QpReduced => "qp-reduced",
            SystemKind::GershgorinDual => "gershgorin-rd",
            SystemKind::GershgorinPrimalB => "gershgorin-rpb",
            SystemKind::GershgorinPrimalN => "gershgorin-rpn",
            SystemKind::PerturbationLp => "perturbation-lp",
            SystemKind::PerturbationQp => "perturbation-qp",
            SystemKind::SpectralRadius => "spectral-radius",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// value ≤ bound + slack
    AtMost,
    /// value ≥ bound − slack
    AtLeast,
    /// value < bound, no slack
    Below,
    /// integer equality
    Equal,
}

impl Relation {
    pub fn holds(self, value: f64, bound: f64, slack: f64) -> bool {
        match self {
            Relation::AtMost => value <= bound + slack,
            Relation::AtLeast => value >= bound - slack,
            Relation::Below => value < bound,
            Relation::Equal => value == bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
            Relation::Equal => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRecord {
    pub name: String,
    pub relation: Relation,
    pub bound: f64,
    pub value: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundRecord {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64, slack: f64) -> Self {
        BoundRecord { name: name.into(), relation, bound, value, slack, pass: relation.holds(value, bound, slack) }
    }

    pub fn is_consistent(&self) -> bool {
        self.pass == self.relation.holds(self.value, self.bound, self.slack)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub neg: usize,
    pub pos: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.neg + self.pos + self.zero
    }

    /// Counts with a threshold relative to the largest magnitude.
    pub fn from_eigenvalues(values: &[f64], rel_tol: f64) -> Self {
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = rel_tol * scale;
        let mut out = Inertia::default();
        for &v in values {
            if v.abs() <= tol {
                out.zero += 1;
            } else if v < 0.0 {
                out.neg += 1;
            } else {
                out.pos += 1;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCertificate {
    pub system: SystemKind,
    /// Problem and iteration the matrix came from, if any.
    pub label: String,
    pub iteration: Option<usize>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub inertia: Inertia,
    pub records: Vec<BoundRecord>,
}

impl SpectralCertificate {
    pub fn new(system: SystemKind, eigenvalues: Vec<f64>, inertia: Inertia) -> Self {
        SpectralCertificate { system, label: String::new(), iteration: None, eigenvalues, inertia, records: Vec::new() }
    }

    pub fn with_origin(mut self, label: &str, iteration: usize) -> Self {
        self.label = label.to_string();
        self.iteration = Some(iteration);
        self
    }

    pub fn push(&mut self, record: BoundRecord) {
        self.records.push(record);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn is_consistent(&self) -> bool {
        self.inertia.dim() == self.eigenvalues.len() && self.records.iter().all(BoundRecord::is_consistent)
    }

    /// One line per bound record.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let iter = self.iteration.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        let label = if self.label.is_empty() { "-" } else { &self.label };
        for r in &self.records {
            let _ = writeln!(
                out,
                "system={} problem={} iter={} bound={} value={:.17e} rel={} limit={:.17e} slack={:.3e} pass={}",
                self.system,
                label,
                iter,
                r.name,
                r.value,
                r.relation.symbol(),
                r.bound,
                r.slack,
                r.pass
            );
        }
        out
    }
}

/// Inertia of a symmetric matrix via the eigenvalues of a congruent copy
/// D·M·D, with D from symmetric Ruiz equilibration (unit row ∞-norms).
pub fn inertia_of(m: &DenseMatrix) -> Result<Inertia, Error> {
    let n = m.nrows();
    let mut scaled = m.clone();
    for _ in 0..RUIZ_SWEEPS {
        let r: Vec<f64> = (0..n).map(|i| norm_inf(scaled.row(i))).collect();
        if r.iter().all(|&v| v == 0.0 || (v - 1.0).abs() <= 1e-3) {
            break;
        }
        let s: Vec<f64> = r.iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        scaled = DenseMatrix::from_fn(n, n, |i, j| s[i] * scaled[(i, j)] * s[j]);
    }
    let values = scaled.symmetric_eigenvalues()?;
    Ok(Inertia::from_eigenvalues(&values, 1e-13 * n.max(1) as f64))
}

const RUIZ_SWEEPS: usize = 50;

/// [−H, Aᵀ; A, D] with H n×n, A m×n, D m×m.
pub fn saddle_matrix(h: &DenseMatrix, a: &DenseMatrix, d: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (a.nrows(), a.ncols());
    let mut out = DenseMatrix::zeros(n + m, n + m);
    out.set_block(0, 0, &h.scaled(-1.0));
    out.set_block(0, n, &a.transpose());
    out.set_block(n, 0, a);
    out.set_block(n, n, d);
    out
}

/// Extreme singular values, numerical rank and a basis of Null(Aᵀ) for an
/// m×n matrix, from the eigendecomposition of AAᵀ.
#[derive(Clone, Debug)]
pub struct SingularInfo {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
    /// Columns span Null(Aᵀ) (m × (m − rank)).
    pub left_null: DenseMatrix,
}

pub fn singular_info(a: &DenseMatrix) -> Result<SingularInfo, Error> {
    let m = a.nrows();
    let aat = a.matmul(&a.transpose());
    let eig = aat.symmetric_eig()?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let tol = 1e-10 * top.max(f64::MIN_POSITIVE);
    let null_idx: Vec<usize> = (0..m).filter(|&k| eig.values[k] <= tol).collect();
    let rank = m - null_idx.len();
    let rows: Vec<usize> = (0..m).collect();
    Ok(SingularInfo {
        sigma_min: eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt(),
        sigma_max: top.sqrt(),
        rank,
        left_null: eig.vectors.select(&rows, &null_idx),
    })
}

pub(crate) fn dense_of(m: &SparseMatrix) -> DenseMatrix {
    m.to_dense()
}

pub(crate) fn extremes(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertia_of_graded_matrix() {
        // diag(−1e30, 1e−8) stays (1, 1) despite the scale gap
        let m = DenseMatrix::from_diag(&[-1e30, 1e-8]);
        assert_eq!(inertia_of(&m).unwrap(), Inertia { neg: 1, pos: 1, zero: 0 });
        let z = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(inertia_of(&z).unwrap(), Inertia { neg: 0, pos: 1, zero: 1 });
    }

    #[test]
    fn record_pass_flags() {
        let r = BoundRecord::new("x", 1.0, Relation::AtMost, 1.0 - 1e-12, 1e-10);
        assert!(r.pass && r.is_consistent());
        let r = BoundRecord::new("x", 1.0, Relation::Below, 1.0, 1.0);
        assert!(!r.pass);
    }

    #[test]
    fn singular_info_duplicate_row() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![1.0, 2.0, 0.0]]);
        let s = singular_info(&a).unwrap();
        assert_eq!(s.rank, 1);
        assert_eq!(s.left_null.ncols(), 1);
        assert!(s.sigma_min < 1e-7);
        assert!((s.sigma_max - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dump_has_one_line_per_record() {
        let mut c = SpectralCertificate::new(SystemKind::LpAugmented, vec![-1.0, 1.0], Inertia { neg: 1, pos: 1, zero: 0 });
        c.push(BoundRecord::new("a", 1.0, Relation::AtMost, 2.0, 0.0));
        c.push(BoundRecord::new("b", 1.0, Relation::AtLeast, 2.0, 0.0));
        let d = c.with_origin("afiro", 3).dump();
        assert_eq!(d.lines().count(), 2);
        assert!(d.contains("problem=afiro iter=3 bound=b") && d.contains("pass=false"));
    }
}
