//! Causal information rate-distortion function of scalar AR(1) Gaussian
//! sources under average squared error.
//!
//! The finite-horizon problem is restricted to sequential Gaussian stage
//! channels: stage `k` sees the prediction error of variance
//! `p_k = a² d_{k-1} + σ²` (with `p_1 = ϱ₀`) and leaves error `d_k`.

mod brute;
mod finite;
mod realize;
mod sweep;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauss::ArSourceModel;
use crate::report::{ser_sig, ser_sig_vec};

pub use brute::brute_force_irdf;
pub use finite::{finite_horizon_irdf, SolverOptions};
pub use realize::{realize_allocation, AllocationAudit, audit_allocation};
pub use sweep::{convergence_report, rd_sweep, sweep_csv, ConvergenceReport, ConvergenceRow, SweepReport, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RdMethod {
    Stationary,
    FiniteHorizon,
    BruteForce,
}

/// Per-stage distortions and prediction-error variances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageAllocation {
    #[serde(serialize_with = "ser_sig_vec")]
    pub d: Vec<f64>,
    #[serde(serialize_with = "ser_sig_vec")]
    pub p: Vec<f64>,
}

impl StageAllocation {
    /// Builds `p` from `d` by the stage recursion.
    pub fn from_distortions(model: &ArSourceModel, d: Vec<f64>) -> Result<Self> {
        let (a2, s2, rho0) = ar1_params(model)?;
        let mut p = Vec::with_capacity(d.len());
        let mut prev = None;
        for &dk in &d {
            p.push(match prev {
                None => rho0,
                Some(x) => a2 * x + s2,
            });
            prev = Some(dk);
        }
        Ok(StageAllocation { d, p })
    }

    pub fn horizon(&self) -> usize {
        self.d.len()
    }

    pub fn average_distortion(&self) -> f64 {
        self.d.iter().sum::<f64>() / self.d.len() as f64
    }

    /// `(1/n) Σ max(0, ½ log₂(p_k/d_k))`.
    pub fn rate_bits(&self) -> f64 {
        let total: f64 = self.d.iter().zip(&self.p).map(|(d, p)| stage_rate(*p, *d)).sum();
        total / self.d.len() as f64
    }

    /// `0 < d_k <= p_k` and the average-distortion budget.
    pub fn is_feasible(&self, distortion: f64) -> bool {
        self.d.iter().zip(&self.p).all(|(d, p)| *d > 0.0 && *d <= *p * (1.0 + 1e-12))
            && self.average_distortion() <= distortion + 1e-10
    }
}

pub(crate) fn stage_rate(p: f64, d: f64) -> f64 {
    (0.5 * (p / d).log2()).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdPoint {
    #[serde(rename = "D", serialize_with = "ser_sig")]
    pub distortion: f64,
    #[serde(rename = "R_bits", serialize_with = "ser_sig")]
    pub rate_bits: f64,
    /// `None` for the stationary value.
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<StageAllocation>,
    pub method: RdMethod,
}

/// `(a², σ², ϱ₀)` of a first-order model.
pub(crate) fn ar1_params(model: &ArSourceModel) -> Result<(f64, f64, f64)> {
    if model.order() > 1 {
        return Err(Error::UnsupportedOrder { order: model.order() });
    }
    let a = model.coeff(1);
    let s2 = model.innovation_variance();
    Ok((a * a, s2, s2 / (1.0 - a * a)))
}

/// `D >= ϱ₀` up to rounding in `ϱ₀ = σ²/(1-a²)`.
pub(crate) fn at_or_above_variance(distortion: f64, rho0: f64) -> bool {
    distortion >= rho0 * (1.0 - 1e-12)
}

pub(crate) fn check_distortion(distortion: f64) -> Result<()> {
    if distortion > 0.0 && distortion.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("distortion must be positive, got {distortion}")))
    }
}

/// `R̄(D) = ½ log₂(a² + σ²/D)` for `D < ϱ₀`, zero otherwise.
pub fn stationary_irdf(model: &ArSourceModel, distortion: f64) -> Result<RdPoint> {
    let (a2, s2, rho0) = ar1_params(model)?;
    check_distortion(distortion)?;
    let rate_bits = if at_or_above_variance(distortion, rho0) {
        0.0
    } else {
        0.5 * (a2 + s2 / distortion).log2()
    };
    Ok(RdPoint {
        distortion,
        rate_bits,
        horizon: None,
        allocation: None,
        method: RdMethod::Stationary,
    })
}
