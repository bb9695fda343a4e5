//! Causality, stationarity and Markov-order certificates for finite-horizon
//! Gaussian models.

use serde::Serialize;

use super::covariance::{CovarianceMatrix, IndexSet, JointProcessModel};
use super::info::{conditional_mutual_information, markov_chain_check, MarkovCertificate};
use super::source::ArSourceModel;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, spd_solve};

/// Default absolute tolerance for certificates on unit-variance models.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalityVariant {
    /// `x(k+1..n) ↔ x(1..k) ↔ y(1..k)`.
    Short,
    /// `(x_past, x(k+1..n)) ↔ x(1..k) ↔ y(1..k)`, using the model's pre-samples.
    StrongPrefix,
}

/// One certificate per `k = 1..n-1`.
pub fn causality_audit(
    m: &JointProcessModel,
    variant: CausalityVariant,
    tol: f64,
) -> Result<Vec<MarkovCertificate>> {
    let n = m.horizon();
    (1..n)
        .map(|k| {
            let mut future = m.xs(k + 1, n);
            if variant == CausalityVariant::StrongPrefix {
                future = future.union(&m.past_set());
            }
            markov_chain_check(m, &future, &m.xs(1, k), &m.ys(1, k), tol)
        })
        .collect()
}

/// `x(k+1..n) ↔ x(k) ↔ y(k)` for `k = 1..n-1`: the condition every jointly
/// stationary and causal pair must satisfy.
pub fn present_sample_audit(m: &JointProcessModel, tol: f64) -> Result<Vec<MarkovCertificate>> {
    let n = m.horizon();
    (1..n)
        .map(|k| markov_chain_check(m, &m.xs(k + 1, n), &m.xs(k, k), &m.ys(k, k), tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationarityAudit {
    pub residual: f64,
    pub holds: bool,
}

/// Window-law shift invariance: the largest entrywise difference between any
/// two window covariances. For Gaussian windows equal covariance means equal law.
pub fn joint_stationarity_audit(blocks: &[CovarianceMatrix], tol: f64) -> Result<StationarityAudit> {
    if blocks.len() < 2 {
        return Err(Error::InvalidArgument("stationarity audit needs at least two windows".into()));
    }
    let dim = blocks[0].dim();
    if blocks.iter().any(|b| b.dim() != dim) {
        return Err(Error::DimensionMismatch("window covariances differ in dimension".into()));
    }
    let mut residual = 0.0_f64;
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            residual = residual.max(max_abs(&(a.matrix() - b.matrix())));
        }
    }
    Ok(StationarityAudit {
        residual,
        holds: residual <= tol,
    })
}

/// All windows of length `len` of a model, `k = 1..=n-len+1`.
pub fn window_blocks(m: &JointProcessModel, len: usize) -> Result<Vec<CovarianceMatrix>> {
    let n = m.horizon();
    if len == 0 || len > n {
        return Err(Error::InvalidArgument(format!("window length {len} for horizon {n}")));
    }
    (1..=n - len + 1).map(|k| m.window(k, len)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricStatus {
    Geometric,
    MemorylessInconclusive,
    Violated,
}

/// Fit of `K_yx = A K_x` for a jointly stationary model and the resulting
/// test of `ϱ_k = ζ ϱ_{k-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricCertificate {
    /// `(a11 - a22) / a21`; undefined when the fitted gain is diagonal.
    pub zeta: Option<f64>,
    pub geometric_residual: Option<f64>,
    pub status: GeometricStatus,
    pub a21: f64,
    /// Largest strictly-upper entry of the fitted gain (zero for causal fits).
    pub causal_residual: f64,
    pub stationarity_residual: f64,
}

/// A jointly stationary, causally related Gaussian pair forces the source's
/// autocovariance to be geometric. The certificate reports whether the model
/// exhibits that structure.
pub fn stationary_causal_certificate(m: &JointProcessModel, tol: f64) -> Result<GeometricCertificate> {
    let n = m.horizon();
    if n < 3 {
        return Err(Error::InvalidArgument("certificate needs horizon >= 3".into()));
    }
    let stat = joint_stationarity_audit(&window_blocks(m, n - 1)?, tol)?;
    if !stat.holds {
        return Err(Error::NotJointlyStationary {
            residual: stat.residual,
            tol,
        });
    }
    let xs = m.xs(1, n).zero_based();
    let ys = m.ys(1, n).zero_based();
    let kx = m.sigma().restrict(&xs);
    let kxy = m.sigma().cross(&xs, &ys);
    // A = K_yx K_x⁻¹, so Aᵀ = K_x⁻¹ K_xy.
    let gain = spd_solve(&kx, &kxy, "K_x")?.transpose();
    let causal_residual = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .fold(0.0_f64, |acc, (i, j)| acc.max(gain[(i, j)].abs()));
    let (a11, a21, a22) = (gain[(0, 0)], gain[(1, 0)], gain[(1, 1)]);
    if a21.abs() <= tol {
        return Ok(GeometricCertificate {
            zeta: None,
            geometric_residual: None,
            status: GeometricStatus::MemorylessInconclusive,
            a21,
            causal_residual,
            stationarity_residual: stat.residual,
        });
    }
    let zeta = (a11 - a22) / a21;
    let rho: Vec<f64> = (0..n).map(|k| kx[(0, k)]).collect();
    let residual = (1..n).fold(0.0_f64, |acc, k| acc.max((rho[k] - zeta * rho[k - 1]).abs())) / rho[0];
    Ok(GeometricCertificate {
        zeta: Some(zeta),
        geometric_residual: Some(residual),
        status: if residual <= tol {
            GeometricStatus::Geometric
        } else {
            GeometricStatus::Violated
        },
        a21,
        causal_residual,
        stationarity_residual: stat.residual,
    })
}

/// Smallest `κ` with `x(1..i) ↔ x(i+1..i+κ) ↔ x(i+κ+1..h)` for every split of
/// the probe horizon `h = max(2·order + 3, 8)`.
pub fn markov_order(model: &ArSourceModel, tol: f64) -> Result<usize> {
    let h = (2 * model.order() + 3).max(8);
    let k = model.toeplitz_covariance(h)?;
    'order: for kappa in 0..h - 1 {
        for i in 1..h - kappa {
            let past = IndexSet::range(1, i);
            let middle = IndexSet::range(i + 1, i + kappa);
            let future = IndexSet::range(i + kappa + 1, h);
            if conditional_mutual_information(&k, &past, &future, &middle)? > tol {
                continue 'order;
            }
        }
        return Ok(kappa);
    }
    Ok(h - 1)
}
