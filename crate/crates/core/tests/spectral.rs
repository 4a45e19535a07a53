mod common;

use ndreg::dense::DenseMatrix;
use ndreg::ipm::{solve_observed, SolveOptions};
use ndreg::par::Execution;
use ndreg::regularizer::Mode;
use ndreg::spectral::{
    certify_run, perturbation_certify_lp, perturbation_certify_qp, snapshot_radius, spectral_radius_certify,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn perturbation_lp_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..25 {
        let a = common::random_a(&mut rng, 4, 6);
        let theta: Vec<f64> = (0..6).map(|_| common::log_uniform(&mut rng, 1e-3, 1e3)).collect();
        let delta_d = common::log_uniform(&mut rng, 1e-8, 1e-2);
        let rep = perturbation_certify_lp(&a, &theta, delta_d).unwrap();
        assert!(rep.passed(), "{}", rep.certificate.dump());
        assert_eq!(rep.perturbed.len(), 10);
        assert!(rep.checked > 0);
    }
}

#[test]
fn perturbation_qp_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    for _ in 0..25 {
        let a = common::random_a(&mut rng, 4, 6);
        let q = common::random_psd(&mut rng, 6);
        let theta: Vec<f64> = (0..6).map(|_| common::log_uniform(&mut rng, 1e-3, 1e3)).collect();
        let delta_p: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1e-4)).collect();
        let rep = perturbation_certify_qp(&a, &q, &theta, &delta_p, 1e-5).unwrap();
        assert!(rep.passed(), "{}", rep.certificate.dump());
        assert!(rep.checked + rep.skipped_clustered + rep.not_qualifying == 10);
    }
}

#[test]
fn radius_closed_forms() {
    let k = DenseMatrix::identity(2);
    let half = DenseMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]);
    let r = spectral_radius_certify(&k, &half).unwrap();
    assert!((r.rho - 0.5).abs() < 1e-15 && r.passed());

    let one = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let r = spectral_radius_certify(&k, &one).unwrap();
    assert!((r.rho - 1.0).abs() < 1e-15 && !r.passed());

    // K = diag(4, 1): generalized eigenvalues of [[0, 1], [1, 0]] are ±1/2
    let k = DenseMatrix::from_diag(&[4.0, 1.0]);
    let r = spectral_radius_certify(&k, &one).unwrap();
    assert!((r.rho - 0.5).abs() < 1e-14 && r.passed());

    let indefinite = DenseMatrix::from_diag(&[1.0, -1.0]);
    let r = spectral_radius_certify(&indefinite, &half).unwrap();
    assert!(r.rho.is_infinite() && !r.passed());
}

#[test]
fn radius_below_one_along_runs() {
    let mut seen = 0;
    for rel in ["toy/rankdef_lp.mps", "toy/freevar_lp.mps", "lp/sc50a.mps", "lp/bigm150.mps"] {
        let p = common::load(rel);
        let mut snaps = Vec::new();
        solve_observed(&p, &SolveOptions::with_mode(Mode::NonDiagonal), &mut |s| snaps.push(s.to_owned()));
        for s in &snaps {
            if let Some(r) = snapshot_radius(s).unwrap() {
                assert!(r.passed() && r.rho < 1.0, "{rel} k={} rho={}", s.state.k, r.rho);
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn certify_run_same_in_both_executions() {
    let p = common::load("qp/hs118.qps");
    let mut snaps = Vec::new();
    solve_observed(&p, &SolveOptions::with_mode(Mode::NonDiagonal), &mut |s| snaps.push(s.to_owned()));
    let seq = certify_run(&snaps, Execution::Sequential);
    let par = certify_run(&snaps, Execution::Parallel);
    assert_eq!(seq.len(), snaps.len());
    for (a, b) in seq.iter().zip(&par) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert!(a.passed());
        assert_eq!(a.dump(), b.dump());
    }
}
