use crate::dense::{norm2, DenseMatrix};
use crate::error::Error;
use crate::sparse::SparseMatrix;

use super::{
    dense_of, extremes, inertia_of, saddle_matrix, singular_info, BoundRecord, Relation, SpectralCertificate,
    SystemKind, BOUND_SLACK,
};

/// First-block norm below which an eigenvector counts as lying in {0}×ℝᵐ.
const NULL_VECTOR_TOL: f64 = 1e-8;

/// Scalars entering the four displayed bounds of a saddle matrix
/// [−H, Aᵀ; A, D].
struct SaddleBounds {
    /// λ_min of the (1,1) block taken positively.
    h_min: f64,
    h_max: f64,
    /// λ_min of the (2,2) block.
    d_min: f64,
    /// t in μ_m ≤ ½(t + √(t² + 4σ_max²)).
    top: f64,
}

/// ½((d − h) − √((h + d)² + 4s²)) without cancellation.
fn neg_root(h: f64, d: f64, s: f64) -> f64 {
    let root = ((h + d).powi(2) + 4.0 * s * s).sqrt();
    if d - h <= 0.0 {
        0.5 * ((d - h) - root)
    } else {
        -0.5 * (4.0 * h * d + 4.0 * s * s) / ((d - h) + root)
    }
}

/// ½((d − h) + √((h + d)² + 4s²)) without cancellation.
fn pos_root(h: f64, d: f64, s: f64) -> f64 {
    let root = ((h + d).powi(2) + 4.0 * s * s).sqrt();
    if d - h >= 0.0 {
        0.5 * ((d - h) + root)
    } else {
        0.5 * (4.0 * h * d + 4.0 * s * s) / ((h - d) + root)
    }
}

fn certify_saddle(
    system: SystemKind,
    h: &DenseMatrix,
    a: &DenseMatrix,
    d: &DenseMatrix,
    b: &SaddleBounds,
) -> Result<SpectralCertificate, Error> {
    let (m, n) = (a.nrows(), a.ncols());
    let mat = saddle_matrix(h, a, d);
    let eig = mat.symmetric_eig()?;
    let inertia = inertia_of(&mat)?;
    let sv = singular_info(a)?;
    let slack = BOUND_SLACK * (1.0 + mat.inf_norm());
    let vals = &eig.values;
    let mut cert = SpectralCertificate::new(system, vals.clone(), inertia);
    cert.push(BoundRecord::new("negative_count", inertia.neg as f64, Relation::Equal, n as f64, 0.0));
    cert.push(BoundRecord::new("positive_count", inertia.pos as f64, Relation::Equal, m as f64, 0.0));
    if n > 0 {
        cert.push(BoundRecord::new("mu_neg_1", vals[n - 1], Relation::AtMost, -b.h_min, slack));
        cert.push(BoundRecord::new("mu_neg_n", vals[0], Relation::AtLeast, neg_root(b.h_max, b.d_min, sv.sigma_max), slack));
    }
    if m > 0 {
        let top = 0.5 * (b.top + (b.top * b.top + 4.0 * sv.sigma_max * sv.sigma_max).sqrt());
        cert.push(BoundRecord::new("mu_m", vals[n + m - 1], Relation::AtMost, top, slack));
        let h_max = if n > 0 { b.h_max } else { 0.0 };
        cert.push(BoundRecord::new("mu_1", vals[n], Relation::AtLeast, pos_root(h_max, b.d_min, sv.sigma_min), slack));
    }

    // Rank-deficient A: eigenvectors of the form (0, p), p ∈ Null(Aᵀ). They
    // exist when D maps Null(Aᵀ) into itself, which holds for diagonal-uniform
    // D and is checked numerically otherwise.
    let deficit = m - sv.rank;
    if deficit > 0 {
        let v = &sv.left_null;
        let dv = d.matmul(v);
        let leak = a.transpose().matmul(&dv).max_abs();
        let scale = (1.0 + sv.sigma_max) * (1.0 + d.max_abs());
        if leak <= 1e-10 * scale {
            let count = (0..n + m)
                .filter(|&k| {
                    let col = eig.vectors.column(k);
                    norm2(&col[..n]) <= NULL_VECTOR_TOL
                })
                .count();
            cert.push(BoundRecord::new("null_space_eigenvectors", count as f64, Relation::AtLeast, deficit as f64, 0.0));
        }
    }
    Ok(cert)
}

fn theta_inverse(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| 1.0 / t).collect()
}

/// Augmented LP matrix [−Θ⁻¹, Aᵀ; A, R_d] with the explicit R_d.
pub fn certify_lp_augmented(
    a: &SparseMatrix,
    theta: &[f64],
    rd: &DenseMatrix,
    delta_d: f64,
) -> Result<SpectralCertificate, Error> {
    let inv = theta_inverse(theta);
    let (h_min, h_max) = extremes(&inv);
    let rd_min = extremes(&rd.symmetric_eigenvalues()?).0;
    let bounds = SaddleBounds { h_min, h_max, d_min: rd_min, top: 2.0 * delta_d };
    certify_saddle(SystemKind::LpAugmented, &DenseMatrix::from_diag(&inv), &dense_of(a), rd, &bounds)
}

/// Partially reduced LP matrix [−Θ_B⁻¹, A_Bᵀ; A_B, D*], D* diagonal.
pub fn certify_lp_reduced(
    a_b: &DenseMatrix,
    theta_b: &[f64],
    d_star: &[f64],
    delta_d: f64,
) -> Result<SpectralCertificate, Error> {
    let inv = theta_inverse(theta_b);
    let (h_min, h_max) = extremes(&inv);
    let (d_min, d_max) = extremes(d_star);
    let bounds = SaddleBounds { h_min, h_max, d_min, top: d_max };
    let mut cert =
        certify_saddle(SystemKind::LpReduced, &DenseMatrix::from_diag(&inv), a_b, &DenseMatrix::from_diag(d_star), &bounds)?;
    push_dstar_records(&mut cert, a_b.ncols(), d_min, delta_d);
    Ok(cert)
}

/// min D* ≥ δ_d, and the smallest positive eigenvalue is at least min D*.
fn push_dstar_records(cert: &mut SpectralCertificate, n2: usize, d_min: f64, delta_d: f64) {
    let slack = BOUND_SLACK * (1.0 + d_min.abs());
    cert.push(BoundRecord::new("min_dstar_vs_delta_d", d_min, Relation::AtLeast, delta_d, slack));
    if let Some(&mu1) = cert.eigenvalues.get(n2) {
        let slack = BOUND_SLACK * (1.0 + cert.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        cert.push(BoundRecord::new("mu_1_vs_min_dstar", mu1, Relation::AtLeast, d_min, slack));
        cert.push(BoundRecord::new("mu_1_vs_delta_d", mu1, Relation::AtLeast, delta_d, slack));
    }
}

/// Augmented QP matrix [−(Q + Θ⁻¹ + R_p), Aᵀ; A, R_d].
pub fn certify_qp_augmented(
    a: &SparseMatrix,
    q: &SparseMatrix,
    theta: &[f64],
    rp: &DenseMatrix,
    rd: &DenseMatrix,
    delta_d: f64,
) -> Result<SpectralCertificate, Error> {
    let n = theta.len();
    let mut h = dense_of(q).add(rp);
    for (j, t) in theta.iter().enumerate() {
        h[(j, j)] += 1.0 / t;
    }
    debug_assert_eq!(h.nrows(), n);
    let (h_min, h_max) = extremes(&h.symmetric_eigenvalues()?);
    let rd_min = extremes(&rd.symmetric_eigenvalues()?).0;
    let bounds = SaddleBounds { h_min, h_max, d_min: rd_min, top: 2.0 * delta_d };
    certify_saddle(SystemKind::QpAugmented, &h, &dense_of(a), rd, &bounds)
}

/// Partially reduced QP matrix [−H̄, Ãᵀ; Ã, D*] with Ã = A_B − A_N Q̄_N⁻¹ Q_BNᵀ.
pub fn certify_qp_reduced(
    h_bar: &DenseMatrix,
    a_tilde: &DenseMatrix,
    d_star: &[f64],
    delta_d: f64,
) -> Result<SpectralCertificate, Error> {
    let (h_min, h_max) = if h_bar.nrows() > 0 { extremes(&h_bar.symmetric_eigenvalues()?) } else { (0.0, 0.0) };
    let (d_min, d_max) = extremes(d_star);
    let bounds = SaddleBounds { h_min, h_max, d_min, top: d_max };
    let mut cert = certify_saddle(SystemKind::QpReduced, h_bar, a_tilde, &DenseMatrix::from_diag(d_star), &bounds)?;
    push_dstar_records(&mut cert, h_bar.nrows(), d_min, delta_d);
    Ok(cert)
}
