use crate::dense::DenseMatrix;
use crate::error::Error;

use super::{
    saddle_matrix, singular_info, BoundRecord, Inertia, Relation, SpectralCertificate, SystemKind,
    PERTURBATION_SLACK,
};

/// Eigenvalues closer than this to a neighbour are treated as clustered and
/// skipped.
pub const CLUSTER_GAP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub certificate: SpectralCertificate,
    /// Eigenvalues of M + E, ascending.
    pub perturbed: Vec<f64>,
    pub checked: usize,
    /// Qualifying indices skipped because of a neighbour within `CLUSTER_GAP`.
    pub skipped_clustered: usize,
    /// Indices outside the region where the bound applies.
    pub not_qualifying: usize,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }
}

fn clustered(values: &[f64], i: usize) -> bool {
    let left = i > 0 && (values[i] - values[i - 1]).abs() < CLUSTER_GAP;
    let right = i + 1 < values.len() && (values[i + 1] - values[i]).abs() < CLUSTER_GAP;
    left || right
}

/// M = [−Θ⁻¹, Aᵀ; A, 0] against M + blkdiag(0, δ_d I): for |λᵢ| > 2δ_d,
/// |λᵢ − λ̃ᵢ| ≤ δ_d φᵢ² with φᵢ = ‖A‖/√((|λᵢ| − 2δ_d)² + ‖A‖²).
pub fn perturbation_certify_lp(a: &DenseMatrix, theta: &[f64], delta_d: f64) -> Result<PerturbationReport, Error> {
    let m = a.nrows();
    let h = DenseMatrix::from_diag(&theta.iter().map(|t| 1.0 / t).collect::<Vec<_>>());
    let base = saddle_matrix(&h, a, &DenseMatrix::zeros(m, m));
    let pert = saddle_matrix(&h, a, &DenseMatrix::from_diag(&vec![delta_d; m]));
    let lam = base.symmetric_eigenvalues()?;
    let lam_t = pert.symmetric_eigenvalues()?;
    let norm_a = singular_info(a)?.sigma_max;
    let norm_e = delta_d;

    let mut cert = SpectralCertificate::new(SystemKind::PerturbationLp, lam.clone(), Inertia::from_eigenvalues(&lam, 1e-13));
    let (mut checked, mut skipped, mut outside) = (0, 0, 0);
    for i in 0..lam.len() {
        if lam[i].abs() <= 2.0 * norm_e {
            outside += 1;
            continue;
        }
        if clustered(&lam, i) {
            skipped += 1;
            continue;
        }
        let phi = phi(norm_a, lam[i].abs() - 2.0 * norm_e);
        let diff = (lam[i] - lam_t[i]).abs();
        cert.push(BoundRecord::new(format!("eig_{i}"), diff, Relation::AtMost, norm_e * phi * phi, PERTURBATION_SLACK));
        checked += 1;
    }
    Ok(PerturbationReport { certificate: cert, perturbed: lam_t, checked, skipped_clustered: skipped, not_qualifying: outside })
}

/// ‖A‖/√(gap² + ‖A‖²), zero when A vanishes.
fn phi(norm_a: f64, gap: f64) -> f64 {
    if norm_a == 0.0 {
        0.0
    } else {
        norm_a / (gap * gap + norm_a * norm_a).sqrt()
    }
}

/// M = [−Q − Θ⁻¹, Aᵀ; A, 0] against M + blkdiag(Δ_p, δ_d I), Δ_p diagonal.
/// For |λᵢ| > δ_d + ‖E‖ and ζᵢ > ‖Δ_p‖ + ‖E‖:
/// |λᵢ − λ̃ᵢ| ≤ ‖Δ_p‖ϕᵢ² + δ_d φᵢ².
pub fn perturbation_certify_qp(
    a: &DenseMatrix,
    q: &DenseMatrix,
    theta: &[f64],
    delta_p: &[f64],
    delta_d: f64,
) -> Result<PerturbationReport, Error> {
    let m = a.nrows();
    let mut h = q.clone();
    for (j, t) in theta.iter().enumerate() {
        h[(j, j)] += 1.0 / t;
    }
    let base = saddle_matrix(&h, a, &DenseMatrix::zeros(m, m));
    // E = blkdiag(Δ_p, δ_d I) added to M, so the (1,1) block becomes −H + Δ_p
    let mut h_pert = h.clone();
    for (j, d) in delta_p.iter().enumerate() {
        h_pert[(j, j)] -= d;
    }
    let pert = saddle_matrix(&h_pert, a, &DenseMatrix::from_diag(&vec![delta_d; m]));
    let lam = base.symmetric_eigenvalues()?;
    let lam_t = pert.symmetric_eigenvalues()?;
    // λ(−Q − Θ⁻¹)
    let block: Vec<f64> = h.symmetric_eigenvalues()?.into_iter().map(|v| -v).collect();
    let norm_a = singular_info(a)?.sigma_max;
    let norm_dp = delta_p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let norm_e = norm_dp.max(delta_d);

    let mut cert = SpectralCertificate::new(SystemKind::PerturbationQp, lam.clone(), Inertia::from_eigenvalues(&lam, 1e-13));
    let (mut checked, mut skipped, mut outside) = (0, 0, 0);
    for i in 0..lam.len() {
        let zeta = block.iter().map(|mu| (lam[i] - mu).abs()).fold(f64::INFINITY, f64::min);
        if lam[i].abs() <= delta_d + norm_e || zeta <= norm_dp + norm_e {
            outside += 1;
            continue;
        }
        if clustered(&lam, i) {
            skipped += 1;
            continue;
        }
        let phi2 = phi(norm_a, lam[i].abs() - delta_d - norm_e);
        let vphi = phi(norm_a, zeta - norm_dp - norm_e);
        let bound = norm_dp * vphi * vphi + delta_d * phi2 * phi2;
        let diff = (lam[i] - lam_t[i]).abs();
        cert.push(BoundRecord::new(format!("eig_{i}"), diff, Relation::AtMost, bound, PERTURBATION_SLACK));
        checked += 1;
    }
    Ok(PerturbationReport { certificate: cert, perturbed: lam_t, checked, skipped_clustered: skipped, not_qualifying: outside })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_perturbation() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 2.0]]);
        let r = perturbation_certify_lp(&a, &[1.0, 0.1, 10.0], 0.0).unwrap();
        assert!(r.passed());
        assert!(r.certificate.records.iter().all(|x| x.value == 0.0));
    }

    #[test]
    fn decoupled_blocks() {
        // A = 0: the second block shifts by exactly δ_d, the first not at all
        let a = DenseMatrix::zeros(2, 3);
        let r = perturbation_certify_lp(&a, &[1.0, 2.0, 4.0], 0.1).unwrap();
        assert!(r.passed());
        assert_eq!(r.not_qualifying, 2);
        assert!(r.perturbed.iter().filter(|&&v| (v - 0.1).abs() < 1e-15).count() == 2);
    }

    #[test]
    fn qp_reduces_to_lp_without_primal_part() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 2.0]]);
        let theta = [1.0, 0.1, 10.0];
        let lp = perturbation_certify_lp(&a, &theta, 1e-3).unwrap();
        let qp = perturbation_certify_qp(&a, &DenseMatrix::zeros(3, 3), &theta, &[0.0; 3], 1e-3).unwrap();
        assert_eq!(lp.perturbed, qp.perturbed);
        assert!(lp.passed() && qp.passed());
    }
}
