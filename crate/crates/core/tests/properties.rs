mod common;

use ndreg::dense::DenseMatrix;
use ndreg::factor::{cholesky, ldlt_quasidefinite, Sign};
use ndreg::ipm::{solve_observed, SolveOptions};
use ndreg::problem::StandardQP;
use ndreg::regularizer::{build_lp_normal_matrix, make_plan, Mode, NormConstants, RegPlan, RegSchedule};
use ndreg::spectral::{gershgorin_certify, min_positive_diagonal, SystemKind};
use ndreg::SparseMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_of_triplets(m: usize, n: usize, t: &[(usize, usize, f64)]) -> DenseMatrix {
    let mut d = DenseMatrix::zeros(m, n);
    for &(i, j, v) in t {
        d[(i, j)] += v;
    }
    d
}

fn triplets(max_dim: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1..max_dim, 1..max_dim).prop_flat_map(|(m, n)| {
        let entry = (0..m, 0..n, -10.0..10.0f64);
        (Just(m), Just(n), prop::collection::vec(entry, 0..3 * (m + n)))
    })
}

fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
    a.nrows() == b.nrows() && a.ncols() == b.ncols() && a.sub(b).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

/// Dense symmetric copy of a lower-stored matrix.
fn full(s: &SparseMatrix) -> DenseMatrix {
    let d = s.to_dense();
    DenseMatrix::from_fn(d.nrows(), d.ncols(), |i, j| if i >= j { d[(i, j)] } else { d[(j, i)] })
}

fn random_feasible_lp(seed: u64) -> StandardQP {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(2..8);
    let n = rng.gen_range(m + 1..16);
    let a = common::random_a(&mut rng, m, n);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    let y0: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let z0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    let b = a.matvec(&x0);
    let aty = a.transpose().matvec(&y0);
    let c: Vec<f64> = aty.iter().zip(&z0).map(|(u, v)| u + v).collect();
    let mut t = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if a[(i, j)] != 0.0 {
                t.push((i, j, a[(i, j)]));
            }
        }
    }
    StandardQP::new(c, None, SparseMatrix::from_triplets(m, n, &t).unwrap(), b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparse_matches_dense((m, n, t) in triplets(12)) {
        let s = SparseMatrix::from_triplets(m, n, &t).unwrap();
        prop_assert!(s.check_invariants());
        let d = dense_of_triplets(m, n, &t);
        prop_assert!(close(&s.to_dense(), &d, 1e-14));
        prop_assert!(close(&s.transpose().to_dense(), &d.transpose(), 0.0));
        let v: Vec<f64> = (0..n).map(|j| (j as f64 * 0.37).sin()).collect();
        let sv = s.spmv(&v).unwrap();
        let dv = d.matvec(&v);
        for (a, b) in sv.iter().zip(&dv) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn scaled_gram_matches_dense((m, n, t) in triplets(10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = SparseMatrix::from_triplets(m, n, &t).unwrap();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5.0)).collect();
        let cols: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        let got = full(&s.aat_product(Some(&cols.iter().map(|&j| w[j]).collect::<Vec<_>>()), Some(&cols)).unwrap());
        let d = dense_of_triplets(m, n, &t);
        let rows: Vec<usize> = (0..m).collect();
        let dc = d.select(&rows, &cols);
        let wc = DenseMatrix::from_fn(dc.nrows(), dc.ncols(), |i, k| dc[(i, k)] * w[cols[k]]);
        prop_assert!(close(&got, &wc.matmul(&dc.transpose()), 1e-12));
    }

    #[test]
    fn cholesky_solves_spd(seed in any::<u64>(), n in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = common::random_a(&mut rng, n, n);
        let spd = b.matmul(&b.transpose()).add(&DenseMatrix::identity(n));
        let mut t = Vec::new();
        for i in 0..n { for j in 0..=i { if spd[(i, j)] != 0.0 { t.push((i, j, spd[(i, j)])); } } }
        let s = SparseMatrix::symmetric_from_triplets(n, &t).unwrap();
        let f = cholesky(&s).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = f.solve(&rhs).unwrap();
        let r = spd.matvec(&x);
        for (a, b) in r.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
        prop_assert_eq!(f.ldl().inertia(), (0, n));
    }

    #[test]
    fn quasidefinite_ldlt_inertia(seed in any::<u64>(), n in 1usize..15, m in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_a(&mut rng, m, n);
        let h: Vec<f64> = (0..n).map(|_| common::log_uniform(&mut rng, 1e-4, 1e4)).collect();
        let mut t = Vec::new();
        for j in 0..n { t.push((j, j, -h[j])); }
        for i in 0..m {
            for j in 0..n { if a[(i, j)] != 0.0 { t.push((n + i, j, a[(i, j)])); } }
            t.push((n + i, n + i, 1e-6));
        }
        let s = SparseMatrix::symmetric_from_triplets(n + m, &t).unwrap();
        let mut signs = vec![Sign::Negative; n];
        signs.extend(vec![Sign::Positive; m]);
        let f = ldlt_quasidefinite(&s, &signs).unwrap();
        prop_assert_eq!(f.inertia(), (n, m));
        let perm = f.perm().to_vec();
        let dense = full(&s);
        let permuted = DenseMatrix::from_fn(n + m, n + m, |i, j| dense[(perm[i], perm[j])]);
        prop_assert!(close(&f.reconstruct(), &permuted, 1e-9));
    }

    /// The absorbed matrix equals AΘAᵀ + R_d, δ_d < reg_thr, nnz never grows
    /// and R_d sits in its Gershgorin enclosure.
    #[test]
    fn regularizer_absorption(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2..10);
        let n = rng.gen_range(m..20);
        let ad = common::random_a(&mut rng, m, n);
        let mut t = Vec::new();
        for i in 0..m { for j in 0..n { if ad[(i, j)] != 0.0 { t.push((i, j, ad[(i, j)])); } } }
        let a = SparseMatrix::from_triplets(m, n, &t).unwrap();
        let q = SparseMatrix::symmetric_from_triplets(n, &[]).unwrap();
        let theta: Vec<f64> = (0..n).map(|_| common::log_uniform(&mut rng, 1e-9, 1e3)).collect();
        let reg_thr = common::log_uniform(&mut rng, 1e-6, 1.0);
        let norms = NormConstants::compute(&a, &q);
        let plan = make_plan(Mode::NonDiagonal, &a, &q, &theta, reg_thr, &norms);
        let absorbed = build_lp_normal_matrix(&a, &theta, &plan);
        let uniform = build_lp_normal_matrix(&a, &theta, &RegPlan::uniform(plan.delta_d, false, n));
        prop_assert!(absorbed.nnz() <= uniform.nnz());
        if plan.absorbs() {
            prop_assert!(plan.delta_d < reg_thr);
            let explicit = full(&a.aat_product(Some(&theta), None).unwrap()).add(&full(&plan.explicit_rd(&a)));
            prop_assert!(close(&full(&absorbed), &explicit, 1e-12));
            let rows: Vec<usize> = (0..m).collect();
            let an = ad.select(&rows, &plan.partition.indices_n);
            let anw = DenseMatrix::from_fn(m, an.ncols(), |i, k| an[(i, k)] * plan.weights_n[k]);
            let s = anw.matmul(&an.transpose());
            let lower = min_positive_diagonal(&s).unwrap_or(0.0);
            let rd = full(&plan.explicit_rd(&a));
            if plan.delta_d > 0.0 {
                let g = gershgorin_certify(SystemKind::GershgorinDual, &rd, plan.delta_d, lower).unwrap();
                prop_assert!(g.passed(), "{}", g.certificate.dump());
            } else {
                // N holds only empty columns, nothing to absorb
                prop_assert_eq!(rd.max_abs(), 0.0);
            }
        } else {
            prop_assert_eq!(absorbed.nnz(), uniform.nnz());
        }
    }

    #[test]
    fn schedule_never_increases(tol in 1e-10..1e-4f64, norm in 0.1..1e3f64, mus in prop::collection::vec(1e-12..10.0f64, 2..30)) {
        let mut s = RegSchedule::new(tol, norm);
        for w in mus.windows(2) {
            let next = s.update(w[0], w[1]);
            prop_assert!(next.reg_thr <= s.reg_thr);
            prop_assert!(next.reg_thr >= s.epsilon);
            s = next;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// x, z stay strictly positive and μ = xᵀz/n at every iterate.
    #[test]
    fn iterates_positive_and_mu_consistent(seed in any::<u64>(), mode in prop::sample::select(Mode::ALL.to_vec())) {
        let p = random_feasible_lp(seed);
        let n = p.n() as f64;
        let mut bad = Vec::new();
        let r = solve_observed(&p, &SolveOptions::with_mode(mode), &mut |s| {
            let st = s.state;
            let mu = st.x.iter().zip(&st.z).map(|(a, b)| a * b).sum::<f64>() / n;
            if st.x.iter().chain(&st.z).any(|&v| !(v > 0.0)) || (mu - st.mu).abs() > 1e-12 * mu.max(1e-300) {
                bad.push(st.k);
            }
        });
        prop_assert!(bad.is_empty(), "iterations {:?}", bad);
        prop_assert!(r.state.x.iter().chain(&r.state.z).all(|&v| v > 0.0));
        if mode != Mode::None {
            prop_assert!(r.converged(), "{} {:?}", seed, r.status);
        }
    }
}
