use nalgebra::DMatrix;
use serde::Serialize;

use super::{RdPoint, StageAllocation};
use crate::constructions::distortion_check;
use crate::error::{Error, Result};
use crate::gauss::{causality_audit, mutual_information, ArSourceModel, CausalityVariant, CovarianceMatrix, JointProcessModel};
use crate::report::{AuditReport, Check};

/// Joint law of the stage channels `y_k = a y_{k-1} + β_k (x_k - a y_{k-1} + v_k)`
/// with `var v_k = θ_k = p_k d_k / (p_k - d_k)` and `β_k = p_k / (p_k + θ_k)`.
/// Stages with `d_k = p_k` transmit nothing (`β_k = 0`).
pub fn realize_allocation(model: &ArSourceModel, alloc: &StageAllocation) -> Result<JointProcessModel> {
    if model.order() > 1 {
        return Err(Error::UnsupportedOrder { order: model.order() });
    }
    let a = model.coeff(1);
    let n = alloc.horizon();
    // y = Lx x + Lv v
    let mut lx = DMatrix::<f64>::zeros(n, n);
    let mut lv = DMatrix::<f64>::zeros(n, n);
    let mut theta = vec![0.0; n];
    for k in 0..n {
        let (p, d) = (alloc.p[k], alloc.d[k]);
        let beta = if d >= p * (1.0 - 1e-12) {
            0.0
        } else {
            theta[k] = p * d / (p - d);
            p / (p + theta[k])
        };
        if k > 0 {
            let carry = a * (1.0 - beta);
            let (prev_x, prev_v) = (lx.row(k - 1).clone_owned(), lv.row(k - 1).clone_owned());
            lx.set_row(k, &(prev_x * carry));
            lv.set_row(k, &(prev_v * carry));
        }
        lx[(k, k)] += beta;
        lv[(k, k)] += beta;
    }
    let kx = model.toeplitz(n);
    let kv = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(theta));
    let kyx = &lx * &kx;
    let ky = &kyx * lx.transpose() + &lv * kv * lv.transpose();
    let mut sigma = DMatrix::<f64>::zeros(2 * n, 2 * n);
    sigma.view_mut((0, 0), (n, n)).copy_from(&kx);
    sigma.view_mut((n, 0), (n, n)).copy_from(&kyx);
    sigma.view_mut((0, n), (n, n)).copy_from(&kyx.transpose());
    sigma.view_mut((n, n), (n, n)).copy_from(&ky);
    JointProcessModel::new(n, CovarianceMatrix::new(sigma)?, "stage channels")?.with_source(model.clone(), 1e-12)
}

#[derive(Debug, Clone, Serialize)]
pub struct AllocationAudit {
    pub report: AuditReport,
}

/// The realized pair of an optimum is causal, meets the distortion budget and
/// has `I(x;y)/n` equal to the reported rate when every stage transmits.
pub fn audit_allocation(model: &ArSourceModel, point: &RdPoint, tol: f64) -> Result<AllocationAudit> {
    let alloc = point
        .allocation
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("point carries no allocation".into()))?;
    let m = realize_allocation(model, alloc)?;
    let mut report = AuditReport::new("realized allocation");
    let n = alloc.horizon();
    if n > 1 {
        let certs = causality_audit(&m, CausalityVariant::Short, tol)?;
        let worst = certs.iter().fold(0.0_f64, |a, c| a.max(c.residual));
        report.push(Check::flag("stage channels causal", "MC_causality_0", worst, tol, certs.iter().all(|c| c.holds)));
    }
    let dc = distortion_check(&m, point.distortion);
    report.push(Check::le("realized distortion", "RcitD_lim_inf", dc.average_mse, point.distortion, 1e-10));
    let transmits = alloc.d.iter().zip(&alloc.p).all(|(d, p)| *d < *p * (1.0 - 1e-12));
    if transmits {
        let mi = mutual_information(&m, &m.xs(1, n), &m.ys(1, n))? / n as f64;
        report.push(Check::eq("I(x;y)/n equals the stage rate", "RcitD_lim_inf", mi, point.rate_bits, tol));
    }
    Ok(AllocationAudit { report })
}
