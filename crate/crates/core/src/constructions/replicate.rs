use nalgebra::DMatrix;

use super::channel::BlockChannel;
use crate::error::{Error, Result};
use crate::gauss::{markov_chain_check, mutual_information, ArSourceModel, CovarianceMatrix, JointProcessModel};
use crate::report::{AuditReport, Check};

/// Stationary source with one block channel applied independently to each of
/// `blocks` consecutive blocks.
#[derive(Debug, Clone)]
pub struct ReplicatedModel {
    pub base: ArSourceModel,
    pub channel: BlockChannel,
    pub blocks: usize,
    pub joint: JointProcessModel,
}

impl ReplicatedModel {
    pub fn n(&self) -> usize {
        self.channel.n()
    }

    pub fn horizon(&self) -> usize {
        self.joint.horizon()
    }

    /// `I(x-block ℓ; y-block ℓ)` for `ℓ = 1..=blocks`.
    pub fn block_mi(&self, block: usize) -> Result<f64> {
        let n = self.n();
        let lo = (block - 1) * n + 1;
        let hi = block * n;
        mutual_information(&self.joint, &self.joint.xs(lo, hi), &self.joint.ys(lo, hi))
    }
}

/// Block-diagonal replication of the channel over `blocks` blocks of the
/// stationary source.
pub fn replicate_blocks(base: &ArSourceModel, channel: &BlockChannel, blocks: usize) -> Result<ReplicatedModel> {
    if blocks == 0 {
        return Err(Error::InvalidArgument("need at least one block".into()));
    }
    let n = channel.n();
    let total = n * blocks;
    let kx = base.toeplitz(total);
    let mut g = DMatrix::<f64>::zeros(total, total);
    let mut v = DMatrix::<f64>::zeros(total, total);
    for b in 0..blocks {
        g.view_mut((b * n, b * n), (n, n)).copy_from(channel.gain());
        v.view_mut((b * n, b * n), (n, n)).copy_from(channel.noise_cov().matrix());
    }
    let kyx = &g * &kx;
    let ky = &kyx * g.transpose() + v;
    let mut sigma = DMatrix::<f64>::zeros(2 * total, 2 * total);
    sigma.view_mut((0, 0), (total, total)).copy_from(&kx);
    sigma.view_mut((total, 0), (total, total)).copy_from(&kyx);
    sigma.view_mut((0, total), (total, total)).copy_from(&kyx.transpose());
    sigma.view_mut((total, total), (total, total)).copy_from(&ky);
    let joint = JointProcessModel::new(total, CovarianceMatrix::new(sigma)?, format!("replicated x{blocks}"))?
        .with_source(base.clone(), 1e-12)?;
    Ok(ReplicatedModel {
        base: base.clone(),
        channel: channel.clone(),
        blocks,
        joint,
    })
}

#[derive(Debug, Clone)]
pub struct BlockIdentities {
    /// `I(x-block ℓ; y-block ℓ)`, one per block.
    pub block_mi: Vec<f64>,
    /// `(1/(ℓn)) I(x(1..ℓn); y(1..ℓn))`, one per prefix length `ℓ`.
    pub prefix_rates: Vec<f64>,
    /// `(1/n) I(block)`.
    pub block_rate: f64,
    pub report: AuditReport,
}

/// Per-block MI equality and the prefix-rate bound of the replicated pair.
pub fn verify_block_identities(r: &ReplicatedModel, tol: f64) -> Result<BlockIdentities> {
    let n = r.n();
    let block_mi = (1..=r.blocks).map(|b| r.block_mi(b)).collect::<Result<Vec<_>>>()?;
    let base = block_mi[0];
    let block_rate = base / n as f64;
    let mut report = AuditReport::new("block identities");
    for (i, mi) in block_mi.iter().enumerate() {
        report.push(Check::eq(
            &format!("block {} mutual information equals first block", i + 1),
            "i_same0",
            *mi,
            base,
            tol,
        ));
    }
    let mut prefix_rates = Vec::with_capacity(r.blocks);
    for l in 1..=r.blocks {
        let len = l * n;
        let rate = mutual_information(&r.joint, &r.joint.xs(1, len), &r.joint.ys(1, len))? / len as f64;
        report.push(Check::le(
            &format!("rate of {l} blocks <= single-block rate"),
            "Irate_of_block_less_than_sequence_of_blocks0",
            rate,
            block_rate,
            tol,
        ));
        prefix_rates.push(rate);
    }
    Ok(BlockIdentities {
        block_mi,
        prefix_rates,
        block_rate,
        report,
    })
}

/// Each y-block depends on the rest only through its own x-block.
pub fn block_conditional_independence(r: &ReplicatedModel, tol: f64) -> Result<AuditReport> {
    let n = r.n();
    let total = r.horizon();
    let mut report = AuditReport::new("block conditional independence");
    for b in 1..=r.blocks {
        let (lo, hi) = ((b - 1) * n + 1, b * n);
        let own_x = r.joint.xs(lo, hi);
        let own_y = r.joint.ys(lo, hi);
        let mut rest = crate::gauss::IndexSet::empty();
        if lo > 1 {
            rest = rest.union(&r.joint.xs(1, lo - 1)).union(&r.joint.ys(1, lo - 1));
        }
        if hi < total {
            rest = rest.union(&r.joint.xs(hi + 1, total)).union(&r.joint.ys(hi + 1, total));
        }
        if rest.is_empty() {
            continue;
        }
        let cert = markov_chain_check(&r.joint, &own_y, &own_x, &rest, tol)?;
        report.push(Check::flag(
            &format!("y-block {b} independent of the rest given its x-block"),
            "same_conditional_distributions0",
            cert.residual,
            tol,
            cert.holds,
        ));
    }
    Ok(report)
}

/// `x(m+k+1..) ↔ x(m+2-κ..m+k) ↔ y(m+1..m+k)` over the whole horizon.
pub fn kappa_causality_audit(m: &JointProcessModel, kappa: usize, tol: f64) -> Result<AuditReport> {
    let total = m.horizon();
    let mut report = AuditReport::new("kappa-lagged causality");
    for start in 0..total {
        for k in 1..total.saturating_sub(start) {
            let future = m.xs(start + k + 1, total);
            let lo = (start + 2).saturating_sub(kappa).max(1);
            let window = if lo <= start + k {
                m.xs(lo, start + k)
            } else {
                crate::gauss::IndexSet::empty()
            };
            let cert = markov_chain_check(m, &future, &window, &m.ys(start + 1, start + k), tol)?;
            report.push(Check::flag(
                &format!("kappa causality m={start} k={k}"),
                "MC_causality_kappa",
                cert.residual,
                tol,
                cert.holds,
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_is_the_base_model() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let ch = BlockChannel::additive(3, 0.1).unwrap();
        let r = replicate_blocks(&src, &ch, 1).unwrap();
        let direct = crate::gauss::LinearChannelSpec::filter(3, &[(0, 1.0)], 0.1, 0)
            .build(&src, "direct")
            .unwrap();
        let d = r.joint.sigma().matrix() - direct.sigma().matrix();
        assert!(crate::linalg::max_abs(&d) < 1e-14);
    }

    #[test]
    fn iid_source_gives_block_diagonal_joint() {
        let src = ArSourceModel::new(vec![0.0], 1.0).unwrap();
        let ch = BlockChannel::additive(2, 0.5).unwrap();
        let r = replicate_blocks(&src, &ch, 2).unwrap();
        let s = r.joint.sigma().matrix();
        // x1 vs y3, y1 vs y3: different blocks.
        assert_eq!(s[(0, 6)], 0.0);
        assert_eq!(s[(4, 6)], 0.0);
    }

    #[test]
    fn cross_block_y_covariance_matches_x() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let ch = BlockChannel::additive(2, 0.1).unwrap();
        let r = replicate_blocks(&src, &ch, 3).unwrap();
        let s = r.joint.sigma().matrix();
        let t = 6;
        for i in 0..t {
            for j in 0..t {
                if i / 2 != j / 2 {
                    assert!((s[(t + i, t + j)] - s[(i, j)]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_blocks_rejected() {
        let src = ArSourceModel::ar1(0.5, 1.0).unwrap();
        let ch = BlockChannel::additive(2, 0.1).unwrap();
        assert!(replicate_blocks(&src, &ch, 0).is_err());
    }
}
