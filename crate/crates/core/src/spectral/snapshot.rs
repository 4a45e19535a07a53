use crate::dense::DenseMatrix;
use crate::error::Error;
use crate::ipm::OwnedSnapshot;
use crate::par::{self, Execution};
use crate::regularizer::Mode;

use super::{
    certify_lp_augmented, certify_lp_reduced, certify_qp_augmented, certify_qp_reduced, gershgorin_certify,
    min_positive_diagonal, newton_residual, spectral_radius_certify, BoundRecord, NewtonResidual, RadiusReport,
    Relation, SpectralCertificate, SystemKind,
};

/// Snapshots with n + m above this are not certified.
pub const CERTIFY_DIMENSION: usize = 300;

#[derive(Clone, Debug)]
pub struct SnapshotReport {
    pub label: String,
    pub iteration: usize,
    pub mode: Mode,
    pub n_size: usize,
    pub newton: NewtonResidual,
    pub certificates: Vec<SpectralCertificate>,
    /// ρ(K⁻¹R) for LP iterations with N ≠ ∅.
    pub rho: Option<f64>,
}

impl SnapshotReport {
    pub fn passed(&self) -> bool {
        self.certificates.iter().all(SpectralCertificate::passed)
    }

    pub fn dump(&self) -> String {
        self.certificates.iter().map(SpectralCertificate::dump).collect()
    }
}

/// Adds the LDLᵀ pivot-sign agreement: `extra_neg` counts negative pivots
/// eliminated before the factored matrix (Schur complement).
fn push_factor_agreement(cert: &mut SpectralCertificate, factor: Option<(usize, usize)>, extra_neg: usize) {
    if let Some((neg, pos)) = factor {
        cert.push(BoundRecord::new("ldl_negative", cert.inertia.neg as f64, Relation::Equal, (neg + extra_neg) as f64, 0.0));
        cert.push(BoundRecord::new("ldl_positive", cert.inertia.pos as f64, Relation::Equal, pos as f64, 0.0));
    }
}

/// Every certificate that applies to one iteration. Unregularized
/// iterations only get the Newton residual.
pub fn certify_snapshot(snap: &OwnedSnapshot) -> Result<SnapshotReport, Error> {
    let p = &snap.problem;
    let plan = &snap.plan;
    let (n, m) = (p.n(), p.m());
    if n + m > CERTIFY_DIMENSION {
        return Err(Error::DimensionCap { dim: n + m, cap: CERTIFY_DIMENSION });
    }
    let newton = newton_residual(p, &snap.state, plan, snap.sigma, &snap.direction);
    let mut certs = Vec::new();
    let mut rho = None;
    let theta = &snap.theta;
    let (nset, bset) = (&plan.partition.indices_n, &plan.partition.indices_b);

    if plan.mode != Mode::None {
        let rd = plan.explicit_rd(&p.a).to_dense();
        if !plan.qp {
            let mut aug = certify_lp_augmented(&p.a, theta, &rd, plan.delta_d)?;
            if !plan.absorbs() {
                push_factor_agreement(&mut aug, snap.inertia, n);
            }
            certs.push(aug);
            if plan.absorbs() {
                let a = p.a.to_dense();
                let rows: Vec<usize> = (0..m).collect();
                let a_b = a.select(&rows, bset);
                let a_n = a.select(&rows, nset);
                let theta_b: Vec<f64> = bset.iter().map(|&j| theta[j]).collect();
                let s = scaled_gram(&a_n, &plan.weights_n);
                let d_star: Vec<f64> = (0..m).map(|i| s[(i, i)] + plan.delta_d).collect();
                let mut red = certify_lp_reduced(&a_b, &theta_b, &d_star, plan.delta_d)?;
                push_factor_agreement(&mut red, snap.inertia, bset.len());
                certs.push(red);
                if plan.delta_d > 0.0 {
                    let lower = min_positive_diagonal(&s).unwrap_or(0.0);
                    certs.push(gershgorin_certify(SystemKind::GershgorinDual, &rd, plan.delta_d, lower)?.certificate);
                }
                if let Some(rep) = snapshot_radius(snap)? {
                    rho = Some(rep.rho);
                    certs.push(rep.certificate);
                }
            }
        } else {
            let rp = plan.explicit_rp(&p.q).to_dense();
            let mut aug = certify_qp_augmented(&p.a, &p.q, theta, &rp, &rd, plan.delta_d)?;
            if !plan.absorbs() {
                push_factor_agreement(&mut aug, snap.inertia, 0);
            }
            certs.push(aug);
            if plan.absorbs() {
                let nb = bset.len();
                let mat = snap.matrix.to_dense();
                let top: Vec<usize> = (0..nb).collect();
                let bottom: Vec<usize> = (nb..nb + m).collect();
                let h_bar = mat.select(&top, &top).scaled(-1.0);
                let a_tilde = mat.select(&bottom, &top);
                let d_star: Vec<f64> = bottom.iter().map(|&i| mat[(i, i)]).collect();
                let mut red = certify_qp_reduced(&h_bar, &a_tilde, &d_star, plan.delta_d)?;
                push_factor_agreement(&mut red, snap.inertia, 0);
                certs.push(red);

                let a = p.a.to_dense();
                let q = p.q.to_dense();
                let rows: Vec<usize> = (0..m).collect();
                let a_n = a.select(&rows, nset);
                if plan.delta_d > 0.0 {
                    let s = scaled_gram(&a_n, &plan.weights_n);
                    let lower = min_positive_diagonal(&s).unwrap_or(0.0);
                    certs.push(gershgorin_certify(SystemKind::GershgorinDual, &rd, plan.delta_d, lower)?.certificate);
                }
                if plan.delta_pb > 0.0 && nb > 0 {
                    let qbn = q.select(bset, nset);
                    let s = scaled_gram(&qbn, &plan.weights_n);
                    let lower = min_positive_diagonal(&s).unwrap_or(0.0);
                    let block = rp.select(bset, bset);
                    certs.push(gershgorin_certify(SystemKind::GershgorinPrimalB, &block, plan.delta_pb, lower)?.certificate);
                }
                if plan.delta_pn > 0.0 {
                    let qn = q.select(nset, nset);
                    let lower = min_positive_diagonal(&qn).unwrap_or(0.0);
                    let block = rp.select(nset, nset);
                    certs.push(gershgorin_certify(SystemKind::GershgorinPrimalN, &block, plan.delta_pn, lower)?.certificate);
                }
            }
        }
    }
    let label = p.name.clone();
    let k = snap.state.k;
    let certificates = certs.into_iter().map(|c| c.with_origin(&label, k)).collect();
    Ok(SnapshotReport { label, iteration: k, mode: plan.mode, n_size: nset.len(), newton, certificates, rho })
}

/// ρ(K⁻¹R) with K = AΘAᵀ + δ_d I and R = off(A_NΘ_N A_Nᵀ), for LP
/// iterations whose plan absorbs something. Only K is dense (m×m), so this
/// also runs on problems above `CERTIFY_DIMENSION`.
pub fn snapshot_radius(snap: &OwnedSnapshot) -> Result<Option<RadiusReport>, Error> {
    let plan = &snap.plan;
    if plan.qp || plan.mode == Mode::None || !plan.absorbs() {
        return Ok(None);
    }
    let p = &snap.problem;
    let m = p.m();
    let a = p.a.to_dense();
    let rows: Vec<usize> = (0..m).collect();
    let a_n = a.select(&rows, &plan.partition.indices_n);
    let s = scaled_gram(&a_n, &plan.weights_n);
    let mut k = scaled_gram(&a, &snap.theta);
    for i in 0..m {
        k[(i, i)] += plan.delta_d;
    }
    let r = DenseMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { s[(i, j)] });
    spectral_radius_certify(&k, &r).map(Some)
}

/// B·diag(w)·Bᵀ.
fn scaled_gram(b: &DenseMatrix, w: &[f64]) -> DenseMatrix {
    let bw = DenseMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * w[j]);
    bw.matmul(&b.transpose())
}

/// Certifies many snapshots, in input order.
pub fn certify_run(snapshots: &[OwnedSnapshot], exec: Execution) -> Vec<Result<SnapshotReport, Error>> {
    par::map(exec, snapshots, certify_snapshot)
}
