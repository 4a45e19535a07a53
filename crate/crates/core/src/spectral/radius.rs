use crate::dense::DenseMatrix;
use crate::error::Error;

use super::{BoundRecord, Inertia, Relation, SpectralCertificate, SystemKind};

/// Required gap below one.
pub const RADIUS_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct RadiusReport {
    pub certificate: SpectralCertificate,
    /// ρ(K⁻¹R), infinite when K is not numerically positive definite.
    pub rho: f64,
}

impl RadiusReport {
    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }
}

/// Generalized eigenvalues of uᵀRu = λuᵀKu through C = L⁻¹RL⁻ᵀ, K = LLᵀ,
/// after a symmetric Jacobi scaling of both matrices.
pub fn spectral_radius_certify(k: &DenseMatrix, r: &DenseMatrix) -> Result<RadiusReport, Error> {
    let n = k.nrows();
    let s: Vec<f64> = (0..n).map(|i| if k[(i, i)] > 0.0 { 1.0 / k[(i, i)].sqrt() } else { 1.0 }).collect();
    let ks = DenseMatrix::from_fn(n, n, |i, j| s[i] * k[(i, j)] * s[j]);
    let rs = DenseMatrix::from_fn(n, n, |i, j| s[i] * r[(i, j)] * s[j]);
    let (values, rho) = match ks.cholesky() {
        Some(l) => {
            let x = l.forward_solve(&rs);
            let c = l.forward_solve(&x.transpose());
            let c = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
            let values = c.symmetric_eigenvalues()?;
            let rho = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            (values, rho)
        }
        None => (Vec::new(), f64::INFINITY),
    };
    let inertia = Inertia::from_eigenvalues(&values, 0.0);
    let mut c = SpectralCertificate::new(SystemKind::SpectralRadius, values, inertia);
    c.push(BoundRecord::new("rho", rho, Relation::Below, 1.0 - RADIUS_MARGIN, 0.0));
    Ok(RadiusReport { certificate: c, rho })
}
