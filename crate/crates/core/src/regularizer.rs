//! reg_thr schedule, the N/B column split and assembly of the regularized
//! Newton matrices for the non-diagonal, uniform and unregularized modes.
//!
//! Non-diagonal mode adds R_d = δ_d I − off(A_N W A_Nᵀ) (and for QP
//! R_pN = Δ_pN I − off(Q_N), R_pB = Δ_pB I + off(Q_BN W Q_BNᵀ)), where
//! W = Θ_N for LP and W = Q̄_N⁻¹ for QP. Adding these cancels the off-diagonal
//! parts exactly, so they are never formed; the explicit versions exist only
//! for verification.

use crate::factor::Sign;
use crate::sparse::{ColumnPartition, SparseMatrix, Symmetry};

pub const THETA_MIN: f64 = 1e-150;
pub const THETA_MAX: f64 = 1e150;
pub const EPSILON_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    #[serde(rename = "nondiag")]
    NonDiagonal,
    Uniform,
    None,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::NonDiagonal => "nondiag",
            Mode::Uniform => "uniform",
            Mode::None => "none",
        }
    }

    pub const ALL: [Mode; 3] = [Mode::NonDiagonal, Mode::Uniform, Mode::None];
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nondiag" | "non-diagonal" => Ok(Mode::NonDiagonal),
            "uniform" => Ok(Mode::Uniform),
            "none" => Ok(Mode::None),
            other => Err(format!("unknown mode {other}")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegSchedule {
    pub reg_thr: f64,
    pub epsilon: f64,
    pub k: usize,
}

impl RegSchedule {
    /// `norm_a` is (an estimate of) the spectral norm of A.
    pub fn new(tol: f64, norm_a: f64) -> Self {
        RegSchedule { reg_thr: 1.0, epsilon: epsilon_floor(tol, norm_a), k: 0 }
    }

    /// Tracks μ at ratio one, never increasing, floored at ε.
    pub fn update(&self, mu_prev: f64, mu_new: f64) -> RegSchedule {
        let ratio = if mu_prev > 0.0 { (mu_new / mu_prev).min(1.0) } else { 1.0 };
        RegSchedule { reg_thr: (self.reg_thr * ratio).max(self.epsilon), epsilon: self.epsilon, k: self.k + 1 }
    }
}

pub fn epsilon_floor(tol: f64, norm_a: f64) -> f64 {
    if norm_a > 0.0 {
        (0.1 * tol / (norm_a * norm_a)).max(EPSILON_FLOOR)
    } else {
        EPSILON_FLOOR
    }
}

pub fn clamp_theta(x: &[f64], z: &[f64]) -> Vec<f64> {
    x.iter().zip(z).map(|(x, z)| (x / z).clamp(THETA_MIN, THETA_MAX)).collect()
}

/// Norm constants that depend only on A and Q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormConstants {
    pub aat_inf: f64,
    pub qqt_inf: Option<f64>,
}

impl NormConstants {
    pub fn compute(a: &SparseMatrix, q: &SparseMatrix) -> Self {
        let aat_inf = a.aat_product(None, None).expect("shape").inf_norm_sym();
        let qqt_inf = if q.is_empty() {
            None
        } else {
            Some(q.to_general().aat_product(None, None).expect("shape").inf_norm_sym())
        };
        NormConstants { aat_inf, qqt_inf }
    }
}

/// j ∈ N iff Θ_j‖AAᵀ‖∞ ≤ reg_thr and, for QP, Θ_j‖QQᵀ‖∞ ≤ reg_thr.
pub fn partition_columns(theta: &[f64], reg_thr: f64, norm_aat: f64, norm_qqt: Option<f64>) -> ColumnPartition {
    let mask: Vec<bool> = theta
        .iter()
        .map(|&t| t * norm_aat <= reg_thr && norm_qqt.is_none_or(|nq| t * nq <= reg_thr))
        .collect();
    ColumnPartition::from_mask(&mask)
}

/// Regularization decided for one iteration. In `NonDiagonal` mode with an
/// empty N the plan is the uniform one (`fallback` set).
#[derive(Clone, Debug, PartialEq)]
pub struct RegPlan {
    pub mode: Mode,
    pub fallback: bool,
    pub qp: bool,
    pub partition: ColumnPartition,
    pub reg_thr: f64,
    pub delta_d: f64,
    pub delta_pn: f64,
    pub delta_pb: f64,
    /// Uniform primal regularization (QP uniform mode), else zero.
    pub primal_uniform: f64,
    /// diag(Q_N).
    pub q_n_diag: Vec<f64>,
    /// Q̄_N = Θ_N⁻¹ + diag(Q_N) + Δ_pN.
    pub qbar_n: Vec<f64>,
    /// W_N: Θ_N for LP, Q̄_N⁻¹ for QP.
    pub weights_n: Vec<f64>,
}

impl RegPlan {
    pub fn uniform(reg_thr: f64, qp: bool, n: usize) -> RegPlan {
        RegPlan {
            mode: Mode::Uniform,
            fallback: false,
            qp,
            partition: ColumnPartition::all_b(n),
            reg_thr,
            delta_d: reg_thr,
            delta_pn: 0.0,
            delta_pb: 0.0,
            primal_uniform: if qp { reg_thr } else { 0.0 },
            q_n_diag: Vec::new(),
            qbar_n: Vec::new(),
            weights_n: Vec::new(),
        }
    }

    pub fn none(qp: bool, n: usize) -> RegPlan {
        RegPlan { mode: Mode::None, delta_d: 0.0, primal_uniform: 0.0, reg_thr: 0.0, ..Self::uniform(0.0, qp, n) }
    }

    /// True when the absorbed (non-diagonal) construction is in effect.
    pub fn absorbs(&self) -> bool {
        self.mode == Mode::NonDiagonal && !self.fallback
    }

    /// Explicit R_d (m×m, lower stored).
    pub fn explicit_rd(&self, a: &SparseMatrix) -> SparseMatrix {
        let m = a.nrows();
        if !self.absorbs() {
            return SparseMatrix::diagonal(&vec![self.delta_d; m]);
        }
        let anwa = a.aat_product(Some(&self.weights_n), Some(&self.partition.indices_n)).expect("shape");
        let mut t: Vec<(usize, usize, f64)> =
            anwa.triplets().into_iter().filter(|e| e.0 != e.1).map(|(i, j, v)| (i, j, -v)).collect();
        t.extend((0..m).map(|i| (i, i, self.delta_d)));
        SparseMatrix::symmetric_from_triplets(m, &t).expect("in range")
    }

    /// Explicit R_p (n×n, lower stored); zero for LP outside uniform QP.
    pub fn explicit_rp(&self, q: &SparseMatrix) -> SparseMatrix {
        let n = q.ncols();
        if !self.absorbs() {
            return SparseMatrix::diagonal(&vec![self.primal_uniform; n]);
        }
        if !self.qp {
            return SparseMatrix::symmetric_from_triplets(n, &[]).expect("empty");
        }
        let (nset, bset) = (&self.partition.indices_n, &self.partition.indices_b);
        let mask = self.partition.mask();
        let mut t = Vec::new();
        for &j in nset {
            t.push((j, j, self.delta_pn));
        }
        for (i, j, v) in q.triplets() {
            if i != j && mask[i] && mask[j] {
                t.push((i, j, -v));
            }
        }
        for &j in bset {
            t.push((j, j, self.delta_pb));
        }
        let qbn = q.submatrix(Some(bset), nset);
        let prod = qbn.aat_product(Some(&self.weights_n), None).expect("shape");
        for (i, j, v) in prod.triplets() {
            if i != j {
                t.push((bset[i], bset[j], v));
            }
        }
        SparseMatrix::symmetric_from_triplets(n, &t).expect("in range")
    }
}

/// Chooses the plan for one iteration.
pub fn make_plan(
    mode: Mode,
    a: &SparseMatrix,
    q: &SparseMatrix,
    theta: &[f64],
    reg_thr: f64,
    norms: &NormConstants,
) -> RegPlan {
    let qp = !q.is_empty();
    let n = theta.len();
    match mode {
        Mode::None => RegPlan::none(qp, n),
        Mode::Uniform => RegPlan::uniform(reg_thr, qp, n),
        Mode::NonDiagonal => {
            let partition = partition_columns(theta, reg_thr, norms.aat_inf, if qp { norms.qqt_inf } else { None });
            if partition.indices_n.is_empty() {
                return RegPlan { mode: Mode::NonDiagonal, fallback: true, ..RegPlan::uniform(reg_thr, qp, n) };
            }
            if qp {
                qp_plan(a, q, theta, partition, reg_thr)
            } else {
                lp_plan(a, theta, partition, reg_thr)
            }
        }
    }
}

fn lp_plan(a: &SparseMatrix, theta: &[f64], partition: ColumnPartition, reg_thr: f64) -> RegPlan {
    let weights_n: Vec<f64> = partition.indices_n.iter().map(|&j| theta[j]).collect();
    let an_norm = a.aat_product(None, Some(&partition.indices_n)).expect("shape").inf_norm_sym();
    let max_w = weights_n.iter().cloned().fold(0.0, f64::max);
    RegPlan {
        mode: Mode::NonDiagonal,
        fallback: false,
        qp: false,
        partition,
        reg_thr,
        delta_d: max_w * an_norm,
        delta_pn: 0.0,
        delta_pb: 0.0,
        primal_uniform: 0.0,
        q_n_diag: Vec::new(),
        qbar_n: Vec::new(),
        weights_n,
    }
}

fn qp_plan(a: &SparseMatrix, q: &SparseMatrix, theta: &[f64], partition: ColumnPartition, reg_thr: f64) -> RegPlan {
    let (nset, bset) = (&partition.indices_n, &partition.indices_b);
    let q_n = q.submatrix(Some(nset), nset);
    let delta_pn = q_n.inf_norm_sym();
    let q_n_diag: Vec<f64> = nset.iter().map(|&j| q.get(j, j)).collect();
    let qbar_n: Vec<f64> = nset.iter().zip(&q_n_diag).map(|(&j, &qd)| 1.0 / theta[j] + qd + delta_pn).collect();
    let weights_n: Vec<f64> = qbar_n.iter().map(|v| 1.0 / v).collect();
    let max_w = weights_n.iter().cloned().fold(0.0, f64::max);
    let qbn = q.submatrix(Some(bset), nset);
    let delta_pb = if bset.is_empty() { 0.0 } else { max_w * qbn.aat_product(None, None).expect("shape").inf_norm_sym() };
    let an_norm = a.aat_product(None, Some(nset)).expect("shape").inf_norm_sym();
    RegPlan {
        mode: Mode::NonDiagonal,
        fallback: false,
        qp: true,
        partition,
        reg_thr,
        delta_d: max_w * an_norm,
        delta_pn,
        delta_pb,
        primal_uniform: 0.0,
        q_n_diag,
        qbar_n,
        weights_n,
    }
}

/// Normal-equations matrix of the LP path for the given plan:
/// none → AΘAᵀ, uniform → AΘAᵀ + δI,
/// non-diagonal → A_BΘ_BA_Bᵀ + diag(A_NΘ_NA_Nᵀ) + δ_d I.
pub fn build_lp_normal_matrix(a: &SparseMatrix, theta: &[f64], plan: &RegPlan) -> SparseMatrix {
    let m = a.nrows();
    if !plan.absorbs() {
        let full = a.aat_product(Some(theta), None).expect("shape");
        return if plan.delta_d > 0.0 { full.add_diagonal(&vec![plan.delta_d; m]) } else { full };
    }
    let theta_b: Vec<f64> = plan.partition.indices_b.iter().map(|&j| theta[j]).collect();
    let kept = a.aat_product(Some(&theta_b), Some(&plan.partition.indices_b)).expect("shape");
    let mut diag = vec![plan.delta_d; m];
    for (&j, &w) in plan.partition.indices_n.iter().zip(&plan.weights_n) {
        let (rows, vals) = a.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            diag[i] += w * v * v;
        }
    }
    kept.add_diagonal(&diag)
}

/// The quasi-definite matrix of the partially reduced QP system together with
/// what is needed to form its right-hand side and recover Δx_N.
#[derive(Clone, Debug)]
pub struct QpSystem {
    /// Lower stored, unknowns ordered (Δx_B, Δy).
    pub matrix: SparseMatrix,
    pub signs: Vec<Sign>,
    /// Size of the Δx_B block.
    pub nb: usize,
    /// diag(Q_BN W Q_BNᵀ), the part of R_pB that survives on the diagonal.
    pub qbn_w_diag: Vec<f64>,
    /// D* diagonal.
    pub d_star: Vec<f64>,
}

/// Assembles [−H̄, Ãᵀ; Ã, D*] with H̄ = Q_B + Θ_B⁻¹ + Δ_pB − diag(Q_BN W Q_BNᵀ),
/// Ã = A_B − A_N W Q_BNᵀ and D* = diag(A_N W A_Nᵀ) + δ_d. Uniform and none
/// plans use B = all columns with the uniform shifts.
pub fn build_qp_reduced_system(a: &SparseMatrix, q: &SparseMatrix, theta: &[f64], plan: &RegPlan) -> QpSystem {
    let m = a.nrows();
    let (nset, bset) = (&plan.partition.indices_n, &plan.partition.indices_b);
    let nb = bset.len();
    let n = theta.len();
    let absorbs = plan.absorbs();
    let primal_shift = if absorbs { plan.delta_pb } else { plan.primal_uniform };

    // position of each column inside B, usize::MAX for N
    let mut bpos = vec![usize::MAX; n];
    for (p, &j) in bset.iter().enumerate() {
        bpos[j] = p;
    }
    let mut npos = vec![usize::MAX; n];
    for (p, &j) in nset.iter().enumerate() {
        npos[j] = p;
    }
    let w = &plan.weights_n;

    let qg = q.to_general();
    // diag(Q_BN W Q_BNᵀ) per B position
    let mut qbn_w_diag = vec![0.0; nb];
    if absorbs {
        for (p, &j) in bset.iter().enumerate() {
            let (rows, vals) = qg.col(j);
            qbn_w_diag[p] = rows
                .iter()
                .zip(vals)
                .filter(|(&i, _)| npos[i] != usize::MAX)
                .map(|(&i, &v)| w[npos[i]] * v * v)
                .sum();
        }
    }
    let mut d_star = vec![plan.delta_d; m];
    if absorbs {
        for (&j, &wj) in nset.iter().zip(w) {
            let (rows, vals) = a.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                d_star[i] += wj * v * v;
            }
        }
    }

    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    // (1,1): −(Q_B + Θ_B⁻¹ + shift − diag(Q_BN W Q_BNᵀ))
    for (i, j, v) in q.triplets() {
        if bpos[i] != usize::MAX && bpos[j] != usize::MAX {
            t.push((bpos[i], bpos[j], -v));
        }
    }
    for (p, &j) in bset.iter().enumerate() {
        t.push((p, p, -(1.0 / theta[j] + primal_shift - qbn_w_diag[p])));
    }
    // (2,1): Ã = A_B − A_N W Q_NB, column by column of B
    let mut acc = vec![0.0; m];
    let mut mark = vec![usize::MAX; m];
    let mut touched = Vec::new();
    for (p, &jb) in bset.iter().enumerate() {
        touched.clear();
        let (rows, vals) = a.col(jb);
        for (&i, &v) in rows.iter().zip(vals) {
            if mark[i] != p {
                mark[i] = p;
                acc[i] = 0.0;
                touched.push(i);
            }
            acc[i] += v;
        }
        if absorbs {
            let (qrows, qvals) = qg.col(jb);
            for (&jn, &qv) in qrows.iter().zip(qvals) {
                let k = npos[jn];
                if k == usize::MAX {
                    continue;
                }
                let f = w[k] * qv;
                let (arows, avals) = a.col(jn);
                for (&i, &av) in arows.iter().zip(avals) {
                    if mark[i] != p {
                        mark[i] = p;
                        acc[i] = 0.0;
                        touched.push(i);
                    }
                    acc[i] -= av * f;
                }
            }
        }
        for &i in &touched {
            t.push((nb + i, p, acc[i]));
        }
    }
    for (i, &d) in d_star.iter().enumerate() {
        t.push((nb + i, nb + i, d));
    }
    let matrix = SparseMatrix::symmetric_from_triplets(nb + m, &t).expect("in range");
    debug_assert_eq!(matrix.symmetry(), Symmetry::Lower);
    let mut signs = vec![Sign::Negative; nb];
    signs.extend(std::iter::repeat_n(Sign::Positive, m));
    QpSystem { matrix, signs, nb, qbn_w_diag, d_star }
}
