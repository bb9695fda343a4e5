//! Zero-delay predictive quantizer with subtractive dither.
//!
//! Per sample: `u = x − a·y_prev`, dither `z` uniform on `(−Δ/2, Δ/2]`,
//! index `i = round((u + z)/Δ)`, reconstruction `y = a·y_prev + β(iΔ − z)`.
//! Indices are written with an Elias-gamma code; the entropy figure is the
//! ideal codelength of an adaptive model given the dither phase.

mod bits;
mod entropy;
mod evaluate;
mod stream;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::ArSourceModel;

pub use evaluate::{dither_noise_audit, evaluate, synthesize_ar1, Evaluation};
pub use stream::{
    decode, encode, kraft_sum, BitstreamStats, Encoded, StreamDecoder, ESCAPE, HEADER_LEN, VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoderConfig {
    /// Quantizer step `Δ`.
    pub step: f64,
    /// In-loop scaling `β`.
    pub scaling: f64,
    /// AR(1) coefficient used by the predictor.
    pub predictor: f64,
    pub dither_seed: u64,
    pub target_distortion: f64,
}

impl CoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if !(self.scaling > 0.0 && self.scaling <= 1.0) {
            return Err(Error::InvalidArgument(format!("scaling must be in (0, 1], got {}", self.scaling)));
        }
        if !(self.predictor.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("predictor must satisfy |a| < 1, got {}", self.predictor)));
        }
        Ok(())
    }

    /// `θ = Δ²/12`.
    pub fn noise_variance(&self) -> f64 {
        self.step * self.step / 12.0
    }

    /// Number of leading samples left out of the statistics.
    pub fn startup_skip(&self) -> usize {
        (5.0 / (1.0 - self.predictor.abs())).ceil() as usize
    }
}

/// Steady-state design: `p = a²D + σ²`, `θ = pD/(p − D)`, `Δ = √(12θ)`,
/// `β = p/(p + θ)`.
pub fn design_coder(model: &ArSourceModel, distortion: f64, seed: u64) -> Result<CoderConfig> {
    if model.order() > 1 {
        return Err(Error::UnsupportedOrder { order: model.order() });
    }
    if !(distortion > 0.0 && distortion.is_finite()) {
        return Err(Error::InvalidArgument(format!("distortion must be positive, got {distortion}")));
    }
    let a = model.coeff(1);
    let s2 = model.innovation_variance();
    let rho0 = model.stationary_variance();
    if distortion >= rho0 {
        return Err(Error::ZeroRateRegime {
            distortion,
            variance: rho0,
        });
    }
    let p = a * a * distortion + s2;
    let theta = p * distortion / (p - distortion);
    Ok(CoderConfig {
        step: (12.0 * theta).sqrt(),
        scaling: p / (p + theta),
        predictor: a,
        dither_seed: seed,
        target_distortion: distortion,
    })
}
