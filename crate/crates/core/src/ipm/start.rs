use crate::dense::dot;
use crate::factor::cholesky;
use crate::problem::StandardQP;

use super::IterateState;

/// How the starting point was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct StartInfo {
    pub delta_x: f64,
    pub delta_z: f64,
    pub shift_x: f64,
    pub shift_z: f64,
    /// AAᵀ needed a ridge.
    pub ridge: bool,
    /// A zero denominator or non-positive result forced a unit shift.
    pub guard_x: bool,
    pub guard_z: bool,
}

/// x̃ = Aᵀ(AAᵀ)⁻¹b, ỹ = (AAᵀ)⁻¹A(c + Qx̃), z̃ = c − Aᵀỹ + Qx̃, then shifted into
/// the positive orthant.
pub fn initial_point(problem: &StandardQP) -> (IterateState, StartInfo) {
    let a = &problem.a;
    let (m, n) = (problem.m(), problem.n());
    let aat = a.aat_product(None, None).expect("shape");
    let mut ridge = false;
    let factor = match cholesky(&aat) {
        Ok(f) => Some(f),
        Err(_) => {
            ridge = true;
            let r = 1e-8 * aat.inf_norm_sym().max(1.0);
            cholesky(&aat.add_diagonal(&vec![r; m])).ok()
        }
    };
    let solve = |v: &[f64]| -> Vec<f64> {
        match &factor {
            Some(f) => f.solve(v).expect("dimension"),
            None => vec![0.0; m],
        }
    };
    let x_t = a.spmv_t(&solve(&problem.b)).expect("dimension");
    let qx = problem.q.spmv(&x_t).expect("dimension");
    let cq: Vec<f64> = problem.c.iter().zip(&qx).map(|(c, q)| c + q).collect();
    let y = solve(&a.spmv(&cq).expect("dimension"));
    let aty = a.spmv_t(&y).expect("dimension");
    let z_t: Vec<f64> = cq.iter().zip(&aty).map(|(c, a)| c - a).collect();

    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let delta_x = if n > 0 { (-1.5 * min(&x_t)).max(0.0) } else { 0.0 };
    let delta_z = if n > 0 { (-1.5 * min(&z_t)).max(0.0) } else { 0.0 };
    let xs: Vec<f64> = x_t.iter().map(|v| v + delta_x).collect();
    let zs: Vec<f64> = z_t.iter().map(|v| v + delta_z).collect();
    let prod = dot(&xs, &zs);
    let sum_x: f64 = xs.iter().sum();
    let sum_z: f64 = zs.iter().sum();

    let mut guard_x = false;
    let mut guard_z = false;
    let mut shift_x = if sum_z > 0.0 { delta_x + 0.5 * prod / sum_z } else { f64::NAN };
    if !(shift_x.is_finite() && x_t.iter().all(|v| v + shift_x > 0.0)) {
        guard_x = true;
        shift_x = delta_x + 1.0;
    }
    let mut shift_z = if sum_x > 0.0 { delta_z + 0.5 * prod / sum_x } else { f64::NAN };
    if !(shift_z.is_finite() && z_t.iter().all(|v| v + shift_z > 0.0)) {
        guard_z = true;
        shift_z = delta_z + 1.0;
    }
    let x: Vec<f64> = x_t.iter().map(|v| v + shift_x).collect();
    let z: Vec<f64> = z_t.iter().map(|v| v + shift_z).collect();
    let mu = if n > 0 { dot(&x, &z) / n as f64 } else { 0.0 };
    let state = IterateState {
        x,
        y,
        z,
        r: vec![0.0; m],
        s: vec![0.0; n],
        mu,
        k: 0,
        prev_step_x: 1.0,
        prev_step_z: 1.0,
    };
    (state, StartInfo { delta_x, delta_z, shift_x, shift_z, ridge, guard_x, guard_z })
}
