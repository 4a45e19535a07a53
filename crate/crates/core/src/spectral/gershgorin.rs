use crate::dense::DenseMatrix;
use crate::error::Error;

use super::{extremes, BoundRecord, Inertia, Relation, SpectralCertificate, SystemKind};

/// Relative slack on the lower enclosure (rounding in the eigensolver).
const LOWER_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GershgorinReport {
    pub certificate: SpectralCertificate,
    /// Off-diagonal absolute row sums rᵢ.
    pub radii: Vec<f64>,
}

impl GershgorinReport {
    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }
}

/// Smallest strictly positive diagonal entry, if any.
pub fn min_positive_diagonal(m: &DenseMatrix) -> Option<f64> {
    m.diag().into_iter().filter(|&v| v > 0.0).reduce(f64::min)
}

/// Checks lower ≤ λ(R) ≤ δ + max rᵢ and λ(R) < 2δ.
pub fn gershgorin_certify(system: SystemKind, r: &DenseMatrix, delta: f64, lower: f64) -> Result<GershgorinReport, Error> {
    let n = r.nrows();
    let radii: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| r[(i, j)].abs()).sum()).collect();
    let values = r.symmetric_eigenvalues()?;
    let (lo, hi) = if n > 0 { extremes(&values) } else { (f64::INFINITY, f64::NEG_INFINITY) };
    let max_r = radii.iter().cloned().fold(0.0, f64::max);
    let slack = LOWER_SLACK * (1.0 + r.max_abs());
    let inertia = Inertia::from_eigenvalues(&values, 0.0);
    let mut c = SpectralCertificate::new(system, values, inertia);
    c.push(BoundRecord::new("lambda_min_vs_min_diag", lo, Relation::AtLeast, lower, slack));
    c.push(BoundRecord::new("lambda_max_vs_disc", hi, Relation::AtMost, delta + max_r, slack));
    c.push(BoundRecord::new("lambda_max_vs_two_delta", hi, Relation::Below, 2.0 * delta, 0.0));
    Ok(GershgorinReport { certificate: c, radii })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_block() {
        let r = DenseMatrix::from_diag(&[0.5; 4]);
        let g = gershgorin_certify(SystemKind::GershgorinDual, &r, 0.5, 0.5).unwrap();
        assert!(g.passed());
        assert!(g.certificate.eigenvalues.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn two_by_two_closed_form() {
        // S = [[s, t], [t, s]] → δ = s + t, R = δI − off(S) has eigenvalues δ ± t
        let (s, t) = (1.0, 0.4);
        let delta = s + t;
        let r = DenseMatrix::from_rows(&[vec![delta, -t], vec![-t, delta]]);
        let g = gershgorin_certify(SystemKind::GershgorinDual, &r, delta, s).unwrap();
        assert!((g.certificate.eigenvalues[0] - (delta - t)).abs() < 1e-15);
        assert!((g.certificate.eigenvalues[1] - (delta + t)).abs() < 1e-15);
        assert_eq!(g.radii, vec![t, t]);
        assert!(g.passed());
    }

    #[test]
    fn too_small_delta_fails() {
        let t = 0.4;
        let delta = 0.3;
        let r = DenseMatrix::from_rows(&[vec![delta, -t], vec![-t, delta]]);
        let g = gershgorin_certify(SystemKind::GershgorinDual, &r, delta, 0.1).unwrap();
        assert!(!g.passed());
    }
}
