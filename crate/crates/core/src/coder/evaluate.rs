use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::stream::{decode, encode, kraft_sum, noise_moments, BitstreamStats};
use super::{design_coder, CoderConfig};
use crate::error::{Error, Result};
use crate::gauss::ArSourceModel;
use crate::report::{ser_sig, AuditReport, Check};
use crate::solver::stationary_irdf;

/// Gap allowed between the conditional-entropy rate and `R(D)`.
pub const ENTROPY_GAP: f64 = 0.254;
/// Gap allowed for the instantaneous zero-delay code.
pub const PREFIX_GAP: f64 = 1.254;
/// Statistical slack added on the entropy side.
pub const ENTROPY_SLACK: f64 = 0.05;

const MIN_SAMPLES: usize = 10_000;

/// `n` samples of a stationary AR(1) source. Uses stream 1 of the seeded
/// generator so it never overlaps the dither (stream 0).
pub fn synthesize_ar1(model: &ArSourceModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if model.order() > 1 {
        return Err(Error::UnsupportedOrder { order: model.order() });
    }
    let a = model.coeff(1);
    let sw = model.innovation_variance().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut x = Vec::with_capacity(n);
    let mut prev = 0.0;
    for k in 0..n {
        let g: f64 = rng.sample(StandardNormal);
        prev = if k == 0 {
            model.stationary_variance().sqrt() * g
        } else {
            a * prev + sw * g
        };
        x.push(prev);
    }
    Ok(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub config: CoderConfig,
    pub stats: BitstreamStats,
    /// `R̄` at the measured distortion.
    #[serde(serialize_with = "ser_sig")]
    pub rate_at_measured_bits: f64,
    #[serde(serialize_with = "ser_sig")]
    pub entropy_gap_bits: f64,
    #[serde(serialize_with = "ser_sig")]
    pub prefix_gap_bits: f64,
    pub report: AuditReport,
}

/// Synthesize, design, encode and decode, then compare the two rate figures
/// with `R̄(D_measured)`.
pub fn evaluate(model: &ArSourceModel, distortion: f64, samples: usize, seed: u64) -> Result<Evaluation> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let cfg = design_coder(model, distortion, seed)?;
    let x = synthesize_ar1(model, samples, seed)?;
    let enc = encode(&x, &cfg)?;
    let dec = decode(&enc.bitstream, &cfg)?;
    let stats = enc.stats.clone();
    let r = stationary_irdf(model, stats.mse)?.rate_bits;
    let entropy_gap = stats.entropy_rate_bits - r;
    let prefix_gap = stats.prefix_rate_bits - r;

    let mut report = AuditReport::new("coder evaluation");
    report.push(Check::flag(
        "decoder reproduces the encoder loop",
        "MC_causality_0",
        0.0,
        0.0,
        dec == enc.reconstruction,
    ));
    report.push(Check::le("Kraft sum", "kraft", kraft_sum(), 1.0, 0.0));
    report.push(Check::le(
        "prefix rate at least entropy rate",
        "kraft",
        stats.entropy_rate_bits,
        stats.prefix_rate_bits,
        1e-9,
    ));
    report.push(Check::le(
        "R(D_measured) below entropy rate",
        "causal-gap-0.254",
        r,
        stats.entropy_rate_bits,
        ENTROPY_SLACK,
    ));
    report.push(Check::le(
        "entropy gap",
        "causal-gap-0.254",
        entropy_gap,
        ENTROPY_GAP,
        ENTROPY_SLACK,
    ));
    report.push(Check::le("prefix gap", "zero-delay-gap-1.254", prefix_gap, PREFIX_GAP, 0.0));
    report.extend(dither_noise_audit(&enc.noise[stats.skipped..], &enc.inputs[stats.skipped..], cfg.step)?);
    Ok(Evaluation {
        config: cfg,
        stats,
        rate_at_measured_bits: r,
        entropy_gap_bits: entropy_gap,
        prefix_gap_bits: prefix_gap,
        report,
    })
}

/// Subtractive-dither noise model: variance `Δ²/12` within 2%, lag-1..8
/// autocorrelation and input correlation below 0.02 in magnitude.
pub fn dither_noise_audit(noise: &[f64], inputs: &[f64], step: f64) -> Result<AuditReport> {
    if noise.len() < MIN_SAMPLES || noise.len() != inputs.len() {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} paired noise/input samples, got {} and {}",
            noise.len(),
            inputs.len()
        )));
    }
    let (var, acf, corr) = noise_moments(noise, inputs);
    let target = step * step / 12.0;
    let mut report = AuditReport::new("dither noise");
    report.push(Check::le(
        "noise variance relative to step²/12",
        "subtractive-dither",
        (var / target - 1.0).abs(),
        0.02,
        0.0,
    ));
    for (lag, r) in acf.iter().enumerate() {
        report.push(Check::le(
            &format!("noise autocorrelation lag {}", lag + 1),
            "subtractive-dither",
            r.abs(),
            0.02,
            0.0,
        ));
    }
    report.push(Check::le("noise/input correlation", "subtractive-dither", corr.abs(), 0.02, 0.0));
    Ok(report)
}
