#![allow(dead_code)]

use std::path::PathBuf;

use ndreg::dense::DenseMatrix;
use ndreg::problem::StandardQP;
use rand::Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn load(rel: &str) -> StandardQP {
    StandardQP::from_file(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every bundled fixture that parses.
pub const CORPUS: [&str; 15] = [
    "lp/afiro.mps",
    "lp/adlittle.mps",
    "lp/sc50a.mps",
    "lp/sc50b.mps",
    "lp/blend.mps",
    "lp/kb2.mps",
    "lp/share2b.mps",
    "lp/bigm150.mps",
    "qp/hs118.qps",
    "qp/portfolio.qps",
    "toy/tiny_lp.mps",
    "toy/rankdef_lp.mps",
    "toy/freevar_lp.mps",
    "toy/infeasible_lp.mps",
    "toy/tiny_qp.qps",
];

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Sparse-ish m×n with no empty row.
pub fn random_a(rng: &mut impl Rng, m: usize, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            if rng.gen_bool(0.3) {
                a[(i, j)] = rng.gen_range(-2.0..2.0);
            }
        }
        let j = rng.gen_range(0..n);
        a[(i, j)] = rng.gen_range(0.5..2.0);
    }
    a
}

/// B·Bᵀ with B n×k, so positive semidefinite with rank ≤ k.
pub fn random_psd(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let k = rng.gen_range(1..=n);
    let mut b = DenseMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            if rng.gen_bool(0.4) {
                b[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
    }
    b.matmul(&b.transpose())
}

pub struct LpSnapshot {
    pub a: DenseMatrix,
    pub theta: Vec<f64>,
    pub delta_d: f64,
}

pub struct QpSnapshot {
    pub a: DenseMatrix,
    pub q: DenseMatrix,
    pub theta: Vec<f64>,
    pub delta_p: Vec<f64>,
    pub delta_d: f64,
}

/// m ≤ 20, n ≤ 40, Θ log-uniform in [1e−4, 1e4], δ_d log-uniform in
/// [1e−8, 1e−1].
pub fn random_lp_snapshot(rng: &mut impl Rng) -> LpSnapshot {
    let m = rng.gen_range(2..=20);
    let n = rng.gen_range(m..=40);
    let a = random_a(rng, m, n);
    let theta = (0..n).map(|_| log_uniform(rng, 1e-4, 1e4)).collect();
    LpSnapshot { a, theta, delta_d: log_uniform(rng, 1e-8, 1e-1) }
}

pub fn random_qp_snapshot(rng: &mut impl Rng) -> QpSnapshot {
    let lp = random_lp_snapshot(rng);
    let n = lp.theta.len();
    let q = random_psd(rng, n);
    let top = log_uniform(rng, 1e-8, 1e-1);
    let delta_p = (0..n).map(|_| rng.gen_range(0.0..top)).collect();
    QpSnapshot { a: lp.a, q, theta: lp.theta, delta_p, delta_d: lp.delta_d }
}
