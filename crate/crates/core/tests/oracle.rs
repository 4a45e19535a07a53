//! The in-house dense kernels against nalgebra.

mod common;

use nalgebra::{DMatrix, DVector};
use ndreg::dense::DenseMatrix;
use ndreg::factor::{ldlt_dense, ldlt_quasidefinite, Sign};
use ndreg::spectral::{inertia_of, Inertia};
use ndreg::{Error, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn random_symmetric(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let b = DenseMatrix::from_fn(n, n, |i, j| ((i * 31 + j * 17) as f64).sin());
    let mut m = b.add(&b.transpose());
    for i in 0..n {
        m[(i, i)] += rng.gen_range(-3.0..3.0);
    }
    m
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [1, 2, 5, 17, 40, 80] {
        let m = random_symmetric(&mut rng, n);
        let ours = m.symmetric_eigenvalues().unwrap();
        let mut theirs: Vec<f64> = to_na(&m).symmetric_eigen().eigenvalues.iter().cloned().collect();
        theirs.sort_by(f64::total_cmp);
        let scale = 1.0 + m.max_abs() * n as f64;
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-12 * scale, "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn reconstruction_and_residuals_n200() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_symmetric(&mut rng, 200);
    let eig = m.symmetric_eig().unwrap();
    assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    let v = &eig.vectors;
    let lam = DenseMatrix::from_diag(&eig.values);
    let back = v.matmul(&lam).matmul(&v.transpose());
    let norm = m.frobenius();
    assert!(back.sub(&m).frobenius() <= 1e-9 * norm);
    let vtv = v.transpose().matmul(v);
    assert!(vtv.sub(&DenseMatrix::identity(200)).max_abs() <= 1e-10);
    let mv = m.matmul(v);
    for k in 0..200 {
        let r: f64 = (0..200).map(|i| (mv[(i, k)] - eig.values[k] * v[(i, k)]).powi(2)).sum::<f64>().sqrt();
        assert!(r <= 1e-9 * norm);
    }
}

#[test]
fn small_closed_forms() {
    assert_eq!(DenseMatrix::identity(3).symmetric_eigenvalues().unwrap(), vec![1.0; 3]);
    assert_eq!(DenseMatrix::from_diag(&[3.0, -2.0]).symmetric_eigenvalues().unwrap(), vec![-2.0, 3.0]);
    let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
    let v = swap.symmetric_eigenvalues().unwrap();
    assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
}

#[test]
fn dimension_cap() {
    let big = DenseMatrix::zeros(401, 401);
    assert!(matches!(big.symmetric_eig(), Err(Error::DimensionCap { dim: 401, cap: 400 })));
}

/// Quasi-definite [−H, Aᵀ; A, D] solved by the sparse and dense LDLᵀ
/// against nalgebra's LU; inertia by Sylvester against nalgebra eigenvalues.
#[test]
fn quasidefinite_solve_matches_lu() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.gen_range(1..20);
        let m = rng.gen_range(1..12);
        let a = common::random_a(&mut rng, m, n);
        let mut t = Vec::new();
        for j in 0..n {
            t.push((j, j, -common::log_uniform(&mut rng, 1e-3, 1e3)));
        }
        for i in 0..m {
            for j in 0..n {
                if a[(i, j)] != 0.0 {
                    t.push((n + i, j, a[(i, j)]));
                }
            }
            t.push((n + i, n + i, common::log_uniform(&mut rng, 1e-8, 1e-2)));
        }
        let s = SparseMatrix::symmetric_from_triplets(n + m, &t).unwrap();
        let mut signs = vec![Sign::Negative; n];
        signs.extend(vec![Sign::Positive; m]);
        let rhs: Vec<f64> = (0..n + m).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let d = s.to_dense();
        let full = DenseMatrix::from_fn(n + m, n + m, |i, j| if i >= j { d[(i, j)] } else { d[(j, i)] });
        let lu = to_na(&full).lu().solve(&DVector::from_vec(rhs.clone())).expect("nonsingular");
        for x in [ldlt_quasidefinite(&s, &signs).unwrap().solve(&rhs).unwrap(), ldlt_dense(&s, Some(&signs)).unwrap().solve(&rhs).unwrap()] {
            let err = x.iter().zip(lu.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = lu.amax().max(1.0);
            assert!(err <= 1e-6 * scale, "err {err:e}");
        }
        let eig = to_na(&full).symmetric_eigen().eigenvalues;
        let neg = eig.iter().filter(|&&v| v < 0.0).count();
        assert_eq!(neg, n);
        assert_eq!(inertia_of(&full).unwrap(), Inertia { neg: n, pos: m, zero: 0 });
    }
}

#[test]
fn cholesky_factor_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 30;
    let b = common::random_a(&mut rng, n, n);
    let spd = b.matmul(&b.transpose()).add(&DenseMatrix::identity(n));
    let ours = spd.cholesky().expect("spd");
    let theirs = to_na(&spd).cholesky().expect("spd").l();
    for i in 0..n {
        for j in 0..=i {
            assert!((ours[(i, j)] - theirs[(i, j)]).abs() <= 1e-10 * (1.0 + theirs[(i, j)].abs()));
        }
    }
}
