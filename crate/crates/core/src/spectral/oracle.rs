use crate::dense::{norm_inf, DenseMatrix};
use crate::ipm::{Direction, IterateState};
use crate::problem::StandardQP;
use crate::regularizer::RegPlan;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonResidual {
    /// ‖Kd − rhs‖∞ / (‖K‖∞‖d‖∞ + ‖rhs‖∞)
    pub relative: f64,
    pub absolute: f64,
}

/// Residual of a direction in the full five-block Newton system, assembled
/// densely with the explicit R_p and R_d of the plan and x̃ = x, ỹ = y.
/// Unknowns are ordered (Δx, Δr, Δs, Δy, Δz); block rows use the same
/// offsets since the sizes coincide.
pub fn newton_residual(
    problem: &StandardQP,
    state: &IterateState,
    plan: &RegPlan,
    sigma: f64,
    d: &Direction,
) -> NewtonResidual {
    let (n, m) = (problem.n(), problem.m());
    let a = problem.a.to_dense();
    let q = problem.q.to_dense();
    let rp = plan.explicit_rp(&problem.q).to_dense();
    let rd = plan.explicit_rd(&problem.a).to_dense();
    let (ox, or, os, oy, oz) = (0, n, n + m, 2 * n + m, 2 * n + 2 * m);
    let dim = 3 * n + 2 * m;
    let mut k = DenseMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            k[(ox + i, ox + j)] = q[(i, j)];
            k[(ox + i, os + j)] = rp[(i, j)];
            k[(os + i, ox + j)] = rp[(i, j)];
            k[(os + i, os + j)] = -rp[(i, j)];
        }
        for j in 0..m {
            k[(ox + i, oy + j)] = -a[(j, i)];
        }
        k[(ox + i, oz + i)] = -1.0;
        k[(oz + i, ox + i)] = state.z[i];
        k[(oz + i, oz + i)] = state.x[i];
    }
    for i in 0..m {
        for j in 0..m {
            k[(or + i, or + j)] = rd[(i, j)];
            k[(or + i, oy + j)] = -rd[(i, j)];
            k[(oy + i, or + j)] = rd[(i, j)];
        }
        for j in 0..n {
            k[(oy + i, ox + j)] = a[(i, j)];
        }
    }
    let qx = q.matvec(&state.x);
    let aty = a.transpose().matvec(&state.y);
    let ax = a.matvec(&state.x);
    let rps = rp.matvec(&state.s);
    let rdr = rd.matvec(&state.r);
    let smu = sigma * state.mu;
    let mut rhs = vec![0.0; dim];
    for i in 0..n {
        rhs[ox + i] = -(problem.c[i] + qx[i] + rps[i] - aty[i] - state.z[i]);
        rhs[os + i] = rps[i];
        rhs[oz + i] = -(state.x[i] * state.z[i] - smu);
    }
    for i in 0..m {
        rhs[or + i] = -rdr[i];
        rhs[oy + i] = -(ax[i] + rdr[i] - problem.b[i]);
    }
    let mut v = Vec::with_capacity(dim);
    v.extend_from_slice(&d.dx);
    v.extend_from_slice(&d.dr);
    v.extend_from_slice(&d.ds);
    v.extend_from_slice(&d.dy);
    v.extend_from_slice(&d.dz);
    let kd = k.matvec(&v);
    let diff: Vec<f64> = kd.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let absolute = norm_inf(&diff);
    let denom = k.inf_norm() * norm_inf(&v) + norm_inf(&rhs);
    NewtonResidual { relative: if denom > 0.0 { absolute / denom } else { absolute }, absolute }
}
