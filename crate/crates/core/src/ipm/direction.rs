use std::time::Instant;

use crate::dense::dot;
use crate::error::FactorizationFailure;
use crate::factor::{
    cholesky_dense, cholesky_with_ordering, ldlt_dense, ldlt_with_ordering, Backend, Sign,
};
use crate::ordering::minimum_degree;
use crate::problem::StandardQP;
use crate::regularizer::{build_lp_normal_matrix, build_qp_reduced_system, Mode, RegPlan};
use crate::sparse::SparseMatrix;

use super::{IterateState, Residuals};

pub const STEP_TAU: f64 = 0.995;

#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dz: Vec<f64>,
    pub dr: Vec<f64>,
    pub ds: Vec<f64>,
}

impl Direction {
    pub fn is_finite(&self) -> bool {
        [&self.dx, &self.dy, &self.dz, &self.dr, &self.ds].iter().all(|v| v.iter().all(|a| a.is_finite()))
    }
}

/// The matrix that was factored for one Newton step.
#[derive(Clone, Debug)]
pub struct Factored {
    pub matrix: SparseMatrix,
    pub nnz_l: usize,
    pub seconds: f64,
    /// (negative, positive) pivot counts of the factorization.
    pub inertia: Option<(usize, usize)>,
}

/// Orderings reused across iterations.
#[derive(Clone, Debug, Default)]
pub struct LinearContext {
    pub backend: Backend,
    pub refine: bool,
    lp_ordering: Option<Vec<usize>>,
    qp_cache: Option<(Vec<usize>, Vec<usize>)>,
}

impl LinearContext {
    pub fn new(backend: Backend, refine: bool) -> Self {
        LinearContext { backend, refine, lp_ordering: None, qp_cache: None }
    }

    /// Minimum degree on the pattern of AAᵀ + I, computed once.
    fn lp_ordering(&mut self, a: &SparseMatrix) -> &[usize] {
        self.lp_ordering.get_or_insert_with(|| {
            let pattern = a.aat_product(None, None).expect("shape").add_diagonal(&vec![1.0; a.nrows()]);
            minimum_degree(&pattern)
        })
    }

    /// Ordering of the reduced QP matrix; its size depends on |B|, so it is
    /// cached per N set.
    fn qp_ordering(&mut self, plan: &RegPlan, matrix: &SparseMatrix, nb: usize) -> Vec<usize> {
        if let Some((key, perm)) = &self.qp_cache {
            if key == &plan.partition.indices_n {
                return perm.clone();
            }
        }
        let mut perm = minimum_degree(matrix);
        if plan.mode == Mode::None {
            // no regularization: the zero (2,2) block can only be pivoted after the x block
            perm.sort_by_key(|&v| v >= nb);
        }
        self.qp_cache = Some((plan.partition.indices_n.clone(), perm.clone()));
        perm
    }
}

pub fn residuals(problem: &StandardQP, state: &IterateState) -> Residuals {
    let ax = problem.a.spmv(&state.x).expect("dimension");
    let primal: Vec<f64> = problem.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let aty = problem.a.spmv_t(&state.y).expect("dimension");
    let qx = problem.q.spmv(&state.x).expect("dimension");
    let dual: Vec<f64> = (0..problem.n()).map(|j| problem.c[j] - aty[j] - state.z[j] + qx[j]).collect();
    Residuals { primal, dual, mu: state.mu }
}

pub fn centring_sigma(step_x: f64, step_z: f64) -> f64 {
    (1.0 - step_x).powi(5).max((1.0 - step_z).powi(5)).clamp(0.05, 0.95)
}

/// τ·min(1, min over Δv_i < 0 of −v_i/Δv_i).
pub fn fraction_to_boundary(v: &[f64], dv: &[f64]) -> f64 {
    let mut a: f64 = 1.0;
    for (&vi, &di) in v.iter().zip(dv) {
        if di < 0.0 {
            a = a.min(-vi / di);
        }
    }
    STEP_TAU * a
}

pub fn step_lengths(state: &IterateState, d: &Direction) -> (f64, f64) {
    (fraction_to_boundary(&state.x, &d.dx), fraction_to_boundary(&state.z, &d.dz))
}

/// ξ_d = c + Qx − Aᵀy − σμX⁻¹e.
fn xi_d(problem: &StandardQP, state: &IterateState, sigma: f64) -> Vec<f64> {
    let aty = problem.a.spmv_t(&state.y).expect("dimension");
    let qx = problem.q.spmv(&state.x).expect("dimension");
    let smu = sigma * state.mu;
    (0..problem.n()).map(|j| problem.c[j] + qx[j] - aty[j] - smu / state.x[j]).collect()
}

fn finish(problem: &StandardQP, state: &IterateState, sigma: f64, dx: Vec<f64>, dy: Vec<f64>) -> Direction {
    let smu = sigma * state.mu;
    let dz: Vec<f64> = (0..problem.n())
        .map(|j| (smu - state.x[j] * state.z[j] - state.z[j] * dx[j]) / state.x[j])
        .collect();
    let dr: Vec<f64> = dy.iter().zip(&state.r).map(|(d, r)| d - r).collect();
    let ds: Vec<f64> = if problem.is_qp() {
        dx.iter().zip(&state.s).map(|(d, s)| d - s).collect()
    } else {
        vec![0.0; problem.n()]
    };
    Direction { dx, dy, dz, dr, ds }
}

/// Normal equations path: [AΘAᵀ + R_d]Δy = b − Ax + AΘξ_d, Δx = Θ(AᵀΔy − ξ_d).
pub fn newton_step_lp(
    problem: &StandardQP,
    state: &IterateState,
    theta: &[f64],
    plan: &RegPlan,
    sigma: f64,
    ctx: &mut LinearContext,
) -> Result<(Direction, Factored), FactorizationFailure> {
    let a = &problem.a;
    let xi = xi_d(problem, state, sigma);
    let ax = a.spmv(&state.x).expect("dimension");
    let txi: Vec<f64> = theta.iter().zip(&xi).map(|(t, x)| t * x).collect();
    let atxi = a.spmv(&txi).expect("dimension");
    let rhs: Vec<f64> = (0..problem.m()).map(|i| problem.b[i] - ax[i] + atxi[i]).collect();

    let matrix = build_lp_normal_matrix(a, theta, plan);
    let perm = ctx.lp_ordering(a).to_vec();
    let start = Instant::now();
    let factor = match ctx.backend {
        Backend::Sparse => cholesky_with_ordering(&matrix, &perm)?,
        Backend::Dense => cholesky_dense(&matrix)?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let dy = if ctx.refine { factor.solve_refined(&matrix, &rhs) } else { factor.solve(&rhs) }.expect("dimension");
    let atdy = a.spmv_t(&dy).expect("dimension");
    let dx: Vec<f64> = (0..problem.n()).map(|j| theta[j] * (atdy[j] - xi[j])).collect();
    let d = finish(problem, state, sigma, dx, dy);
    let nnz_l = factor.nnz_l();
    let inertia = Some(factor.ldl().inertia());
    Ok((d, Factored { matrix, nnz_l, seconds, inertia }))
}

/// Partially reduced augmented system path.
pub fn newton_step_qp(
    problem: &StandardQP,
    state: &IterateState,
    theta: &[f64],
    plan: &RegPlan,
    sigma: f64,
    ctx: &mut LinearContext,
) -> Result<(Direction, Factored), FactorizationFailure> {
    let (a, q) = (&problem.a, &problem.q);
    let (n, m) = (problem.n(), problem.m());
    let xi = xi_d(problem, state, sigma);
    let ax = a.spmv(&state.x).expect("dimension");
    let xi_p: Vec<f64> = problem.b.iter().zip(&ax).map(|(b, a)| b - a).collect();

    let sys = build_qp_reduced_system(a, q, theta, plan);
    let nb = sys.nb;
    let (nset, bset) = (&plan.partition.indices_n, &plan.partition.indices_b);
    let absorbs = plan.absorbs();

    // u = W ξ_dN scattered to full length
    let mut u = vec![0.0; n];
    if absorbs {
        for (&j, &w) in nset.iter().zip(&plan.weights_n) {
            u[j] = w * xi[j];
        }
    }
    let qu = q.spmv(&u).expect("dimension");
    let au = a.spmv(&u).expect("dimension");
    let mut rhs = Vec::with_capacity(nb + m);
    rhs.extend(bset.iter().map(|&j| xi[j] - qu[j]));
    rhs.extend((0..m).map(|i| xi_p[i] + au[i]));

    let perm = ctx.qp_ordering(plan, &sys.matrix, nb);
    let start = Instant::now();
    let factor = match ctx.backend {
        Backend::Sparse => ldlt_with_ordering(&sys.matrix, &sys.signs, &perm)?,
        Backend::Dense => ldlt_dense(&sys.matrix, Some(&sys.signs))?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let sol = if ctx.refine { factor.solve_refined(&sys.matrix, &rhs) } else { factor.solve(&rhs) }.expect("dimension");

    let mut dx = vec![0.0; n];
    for (p, &j) in bset.iter().enumerate() {
        dx[j] = sol[p];
    }
    let dy = sol[nb..].to_vec();
    if absorbs {
        let atdy = a.spmv_t(&dy).expect("dimension");
        let qdxb = q.spmv(&dx).expect("dimension");
        for (&j, &w) in nset.iter().zip(&plan.weights_n) {
            dx[j] = w * (atdy[j] - qdxb[j] - xi[j]);
        }
    }
    let d = finish(problem, state, sigma, dx, dy);
    let inertia = Some(factor.inertia());
    let nnz_l = factor.nnz_l();
    debug_assert!(sys.signs.iter().filter(|s| **s == Sign::Negative).count() == nb);
    Ok((d, Factored { matrix: sys.matrix, nnz_l, seconds, inertia }))
}

pub fn newton_step(
    problem: &StandardQP,
    state: &IterateState,
    theta: &[f64],
    plan: &RegPlan,
    sigma: f64,
    ctx: &mut LinearContext,
) -> Result<(Direction, Factored), FactorizationFailure> {
    let out = if problem.is_qp() {
        newton_step_qp(problem, state, theta, plan, sigma, ctx)?
    } else {
        newton_step_lp(problem, state, theta, plan, sigma, ctx)?
    };
    if !out.0.is_finite() {
        return Err(FactorizationFailure { index: 0, pivot: f64::NAN });
    }
    Ok(out)
}

/// Complementarity μ = xᵀz/n.
pub fn complementarity(x: &[f64], z: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        dot(x, z) / x.len() as f64
    }
}
