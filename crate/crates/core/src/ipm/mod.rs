//! Infeasible primal-dual interior point driver.

pub mod direction;
pub mod start;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dense::norm2;
use crate::factor::Backend;
use crate::problem::StandardQP;
use crate::regularizer::{clamp_theta, make_plan, Mode, NormConstants, RegPlan, RegSchedule};
use crate::sparse::SparseMatrix;

pub use direction::{
    centring_sigma, complementarity, fraction_to_boundary, newton_step, newton_step_lp, newton_step_qp,
    residuals, step_lengths, Direction, Factored, LinearContext, STEP_TAU,
};
pub use start::{initial_point, StartInfo};

pub const DEFAULT_TOL_LP: f64 = 1e-6;
pub const DEFAULT_TOL_QP: f64 = 1e-8;
pub const DEFAULT_MAXIT: usize = 200;
/// Consecutive reg_thr increases tried before giving up on a factorization.
pub const MAX_SAFEGUARD_RETRIES: usize = 6;
pub const FIRST_SIGMA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub mu: f64,
    pub k: usize,
    pub prev_step_x: f64,
    pub prev_step_z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    /// b − Ax
    pub primal: Vec<f64>,
    /// c − Aᵀy − z + Qx
    pub dual: Vec<f64>,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    IterationLimit,
    FactorizationStalled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::IterationLimit => "iteration-limit",
            Status::FactorizationStalled => "factorization-stalled",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimal" => Ok(Status::Optimal),
            "iteration-limit" => Ok(Status::IterationLimit),
            "factorization-stalled" => Ok(Status::FactorizationStalled),
            _ => Err(crate::Error::Invalid(format!("unknown status `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub mode: Mode,
    /// Defaults to 1e−6 for LPs and 1e−8 for QPs.
    pub tol: Option<f64>,
    pub maxit: usize,
    pub backend: Backend,
    /// One step of iterative refinement after each solve.
    pub refine: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::NonDiagonal, tol: None, maxit: DEFAULT_MAXIT, backend: Backend::Sparse, refine: false }
    }
}

impl SolveOptions {
    pub fn with_mode(mode: Mode) -> Self {
        SolveOptions { mode, ..Default::default() }
    }

    pub fn tol_for(&self, problem: &StandardQP) -> f64 {
        self.tol.unwrap_or(if problem.is_qp() { DEFAULT_TOL_QP } else { DEFAULT_TOL_LP })
    }
}

/// One accepted Newton step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub n_size: usize,
    pub reg_thr: f64,
    pub delta_d: f64,
    pub factor_seconds: f64,
    /// Nonzeros in the lower triangle of the factored matrix.
    pub nnz_matrix: usize,
    pub nnz_l: usize,
    pub step_x: f64,
    pub step_z: f64,
    pub sigma: f64,
    pub mu: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub retries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub name: String,
    pub mode: Mode,
    pub status: Status,
    pub iterations: usize,
    /// Objective in the original (file) sense.
    pub objective: f64,
    pub tol: f64,
    /// ‖b − Ax‖₂/(‖b‖₂ + 1) at the final point.
    pub primal_res: f64,
    /// ‖c − Aᵀy − z + Qx‖₂/(‖c‖₂ + 1) at the final point.
    pub dual_res: f64,
    pub mu: f64,
    pub records: Vec<IterationRecord>,
    pub total_seconds: f64,
    pub start: StartInfo,
    /// Final iterate in standard form.
    pub state: IterateState,
    /// Primal solution mapped back to the original variables.
    pub x_original: Vec<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Everything that went into one Newton step, handed to observers before
/// the step is applied.
pub struct IterationSnapshot<'a> {
    pub problem: &'a StandardQP,
    pub state: &'a IterateState,
    pub theta: &'a [f64],
    pub plan: &'a RegPlan,
    pub sigma: f64,
    pub direction: &'a Direction,
    pub factored: &'a Factored,
}

impl IterationSnapshot<'_> {
    pub fn to_owned(&self) -> OwnedSnapshot {
        OwnedSnapshot {
            problem: self.problem.clone(),
            state: self.state.clone(),
            theta: self.theta.to_vec(),
            plan: self.plan.clone(),
            sigma: self.sigma,
            direction: self.direction.clone(),
            matrix: self.factored.matrix.clone(),
            inertia: self.factored.inertia,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OwnedSnapshot {
    pub problem: StandardQP,
    pub state: IterateState,
    pub theta: Vec<f64>,
    pub plan: RegPlan,
    pub sigma: f64,
    pub direction: Direction,
    pub matrix: SparseMatrix,
    pub inertia: Option<(usize, usize)>,
}

pub fn solve(problem: &StandardQP, options: &SolveOptions) -> SolveReport {
    solve_observed(problem, options, &mut |_| {})
}

pub fn solve_observed(
    problem: &StandardQP,
    options: &SolveOptions,
    observer: &mut dyn FnMut(&IterationSnapshot<'_>),
) -> SolveReport {
    let clock = Instant::now();
    let mut problem = problem.clone();
    let tol = options.tol_for(&problem);
    let norms = NormConstants::compute(&problem.a, &problem.q);
    let norm_a = problem.a.two_norm_estimate(100, 1e-10);
    let mut sched = RegSchedule::new(tol, norm_a);
    let mut ctx = LinearContext::new(options.backend, options.refine);
    let (mut state, start) = initial_point(&problem);
    let mut records = Vec::new();
    let mut mu_prev = state.mu;
    let mut sigma_next = FIRST_SIGMA;

    let status = loop {
        let res = residuals(&problem, &state);
        let (pr, dr) = relative_residuals(&problem, &res);
        if pr <= tol && dr <= tol && state.mu <= tol {
            break Status::Optimal;
        }
        if state.k >= options.maxit {
            break Status::IterationLimit;
        }
        if !(pr.is_finite() && dr.is_finite() && state.mu.is_finite()) {
            break Status::FactorizationStalled;
        }
        if state.k > 0 {
            sched = sched.update(mu_prev, state.mu);
        }
        let theta = clamp_theta(&state.x, &state.z);
        let sigma = sigma_next;

        let mut retries = 0;
        let outcome = loop {
            let plan = make_plan(options.mode, &problem.a, &problem.q, &theta, sched.reg_thr, &norms);
            match newton_step(&problem, &state, &theta, &plan, sigma, &mut ctx) {
                Ok((d, f)) => break Some((plan, d, f)),
                Err(_) if options.mode == Mode::None || retries >= MAX_SAFEGUARD_RETRIES => break None,
                Err(_) => {
                    retries += 1;
                    sched.reg_thr *= 10.0;
                }
            }
        };
        let Some((plan, d, factored)) = outcome else {
            break Status::FactorizationStalled;
        };
        observer(&IterationSnapshot {
            problem: &problem,
            state: &state,
            theta: &theta,
            plan: &plan,
            sigma,
            direction: &d,
            factored: &factored,
        });

        let (ax, az) = step_lengths(&state, &d);
        for j in 0..problem.n() {
            state.x[j] += ax * d.dx[j];
            state.z[j] += az * d.dz[j];
            state.s[j] += az * d.ds[j];
        }
        for i in 0..problem.m() {
            state.r[i] += ax * d.dr[i];
            state.y[i] += az * d.dy[i];
        }
        mu_prev = state.mu;
        state.mu = complementarity(&state.x, &state.z);
        state.k += 1;
        state.prev_step_x = ax;
        state.prev_step_z = az;
        sigma_next = centring_sigma(ax, az);
        records.push(IterationRecord {
            k: state.k,
            n_size: plan.partition.n_len(),
            reg_thr: sched.reg_thr,
            delta_d: plan.delta_d,
            factor_seconds: factored.seconds,
            nnz_matrix: factored.matrix.nnz(),
            nnz_l: factored.nnz_l,
            step_x: ax,
            step_z: az,
            sigma,
            mu: state.mu,
            primal_res: pr,
            dual_res: dr,
            retries,
        });
        if problem.expand_free_boxes(&mut state.x) {
            state.mu = complementarity(&state.x, &state.z);
        }
    };

    let res = residuals(&problem, &state);
    let (primal_res, dual_res) = relative_residuals(&problem, &res);
    SolveReport {
        name: problem.name.clone(),
        mode: options.mode,
        status,
        iterations: state.k,
        objective: problem.original_objective(&state.x),
        tol,
        primal_res,
        dual_res,
        mu: state.mu,
        records,
        total_seconds: clock.elapsed().as_secs_f64(),
        start,
        x_original: problem.recover(&state.x),
        state,
    }
}

fn relative_residuals(problem: &StandardQP, res: &Residuals) -> (f64, f64) {
    (norm2(&res.primal) / (norm2(&problem.b) + 1.0), norm2(&res.dual) / (norm2(&problem.c) + 1.0))
}
