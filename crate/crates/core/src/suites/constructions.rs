use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::{
    block_conditional_independence, concatenate_first_samples, concatenated_causality, conditionally_independent_copy,
    kappa_causality_audit, mixture_conditional_mi, mixture_stationarity, qjs_audit, replicate_blocks,
    shift_stationarize, verify_block_identities, BlockChannel,
};
use crate::error::Result;
use crate::gauss::{causality_audit, ArSourceModel, CausalityVariant, CovarianceMatrix, LinearChannelSpec};
use crate::report::{AuditReport, Check};

/// Block length used for the mixture and rate-bound checks.
pub const BLOCK: usize = 4;
/// Window lengths `m` for the mixture rate bound.
pub const MIXTURE_WINDOWS: [usize; 4] = [BLOCK, 2 * BLOCK, 4 * BLOCK, 16 * BLOCK];
pub const QJS_HORIZONS: [usize; 4] = [8, 16, 32, 64];

/// Random causal block channel: lower-triangular gain with unit diagonal and
/// decaying off-diagonal entries, diagonal noise.
pub fn random_causal_channel(rng: &mut ChaCha8Rng, n: usize) -> Result<BlockChannel> {
    let decay: f64 = rng.random_range(0.2..0.8);
    let g = DMatrix::from_fn(n, n, |i, j| if j <= i { decay.powi((i - j) as i32) } else { 0.0 });
    let noise = DMatrix::from_fn(n, n, |i, j| if i == j { 0.05 + 0.1 * ((i * 7 + 3) % 5) as f64 / 5.0 } else { 0.0 });
    BlockChannel::new(g, CovarianceMatrix::new(noise)?)
}

pub fn constructions_suite(seed: u64) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::new("constructions");
    let ar1 = ArSourceModel::normalized(vec![rng.random_range(0.5..0.95)])?;
    let ar2 = ArSourceModel::normalized(vec![0.5, 0.3])?;

    // Replication identities over 8 blocks.
    let channel = random_causal_channel(&mut rng, BLOCK)?;
    let r = replicate_blocks(&ar1, &channel, 8)?;
    report.extend(verify_block_identities(&r, 1e-9)?.report);
    report.extend(block_conditional_independence(&r, 1e-9)?);
    let small = replicate_blocks(&ar2, &random_causal_channel(&mut rng, 2)?, 3)?;
    report.extend(kappa_causality_audit(&small.joint, 2, 1e-9)?);
    let iid = ArSourceModel::new(vec![0.0], 1.0)?;
    let ri = verify_block_identities(&replicate_blocks(&iid, &channel, 4)?, 1e-9)?;
    let tight = ri.prefix_rates.iter().fold(0.0_f64, |a, p| a.max((p - ri.block_rate).abs()));
    report.push(Check::le(
        "i.i.d. source: prefix rates equal the block rate",
        "Irate_of_block_less_than_sequence_of_blocks0",
        tight,
        0.0,
        1e-9,
    ));

    // Shift mixture: stationarity and the rate bound.
    let window = *MIXTURE_WINDOWS.last().expect("non-empty");
    let long = replicate_blocks(&ar1, &channel, (window + 2 * BLOCK).div_ceil(BLOCK))?;
    let block_mi = long.block_mi(1)?;
    let mix = shift_stationarize(&long, window, 0)?;
    let st = mixture_stationarity(&mix, 8)?;
    report.push(Check::le("mixture window covariances shift-invariant", "xbar_ybar_def", st.covariance_residual, 0.0, 1e-9));
    report.push(Check::le("mixture component phases shift cyclically", "xbar_ybar_def", st.component_residual, 0.0, 1e-9));
    for m in MIXTURE_WINDOWS {
        report.extend(mixture_conditional_mi(&mix, m, block_mi, 1e-9)?.report);
    }

    // First-sample concatenation over an AR(2) source.
    let qjs_window = *QJS_HORIZONS.last().expect("non-empty");
    let r2 = replicate_blocks(&ar2, &channel, (qjs_window + 2 * BLOCK).div_ceil(BLOCK))?;
    let block2 = r2.block_mi(1)?;
    let tail = shift_stationarize(&r2, qjs_window, 1)?;
    let head = BlockChannel::additive(1, 1.0)?;
    let c = concatenate_first_samples(&tail, Some(&head), 2)?;
    report.extend(concatenated_causality(&c, 1e-8)?);
    let q = qjs_audit(&c, &QJS_HORIZONS, block2, 1e-6)?;
    let last = *q.gaps.last().expect("non-empty");
    report.push(Check::le(
        &format!("QJS gap at horizon {qjs_window}"),
        "ddot_xy_is_kappa_QJS",
        last,
        0.02,
        0.0,
    ));
    report.extend(q.report);

    // Conditionally independent copy realizes strong-prefix causality.
    let n = 5;
    let pre = LinearChannelSpec::filter(n, &[(0, 1.0), (1, 0.7)], 0.1, 1).build(&ar1, "uses x(0)")?;
    let copy = conditionally_independent_copy(&pre, &pre.ys(1, n), &pre.xs(1, n), &pre.past_set())?;
    let certs = causality_audit(&copy, CausalityVariant::StrongPrefix, 1e-8)?;
    let worst = certs.iter().fold(0.0_f64, |a, c| a.max(c.residual));
    report.push(Check::flag(
        "copy satisfies strong-prefix causality",
        "strong_causality_ybar",
        worst,
        1e-8,
        certs.iter().all(|c| c.holds),
    ));
    Ok(report)
}
