use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::replicate::ReplicatedModel;
use crate::error::{Error, Result};
use crate::gauss::{mutual_information, CovarianceMatrix, JointProcessModel};
use crate::linalg::{compensated_sum, max_abs};
use crate::report::{AuditReport, Check};

/// Uniform mixture over the `n` block phases of a replicated pair: component
/// `t` is the law of the replicated pair observed from sample `n+1+t` on.
#[derive(Debug, Clone)]
pub struct ShiftMixtureModel {
    pub n: usize,
    /// Extra leading x samples carried by every component.
    pub lead: usize,
    pub components: Vec<JointProcessModel>,
}

impl ShiftMixtureModel {
    pub fn weight(&self) -> f64 {
        1.0 / self.components.len() as f64
    }

    pub fn window(&self) -> usize {
        self.components[0].horizon()
    }

    /// Mixture covariance of `(x(k..k+len-1), y(k..k+len-1))`: the uniform
    /// average of the component window covariances (all components are zero-mean).
    pub fn window_covariance(&self, k: usize, len: usize) -> Result<DMatrix<f64>> {
        let mut acc = DMatrix::<f64>::zeros(2 * len, 2 * len);
        for c in &self.components {
            acc += c.window(k, len)?.matrix();
        }
        Ok(acc * self.weight())
    }
}

/// Extracts the `n` shifted windows of length `window`, each with `lead`
/// leading x samples.
pub fn shift_stationarize(r: &ReplicatedModel, window: usize, lead: usize) -> Result<ShiftMixtureModel> {
    let n = r.n();
    let total = r.horizon();
    let required = window + 2 * n;
    if window == 0 || total < required {
        return Err(Error::InsufficientHorizon {
            required,
            available: total,
        });
    }
    if lead > n {
        return Err(Error::InvalidArgument(format!("lead {lead} exceeds block length {n}")));
    }
    let components = (0..n)
        .map(|t| {
            let first_x = n + 1 + t - lead;
            let first = n + 1 + t;
            let last = n + t + window;
            let pos = r.joint.xs(first_x, last).union(&r.joint.ys(first, last));
            let sigma = CovarianceMatrix::new(r.joint.sigma().restrict(&pos_zero(&pos)))?;
            JointProcessModel::with_past(window, lead, sigma, format!("shift t={t}"))?.with_source(r.base.clone(), 1e-12)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShiftMixtureModel { n, lead, components })
}

fn pos_zero(s: &crate::gauss::IndexSet) -> Vec<usize> {
    s.indices().iter().map(|i| i - 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureStationarity {
    /// Largest difference between mixture window covariances at `k` and `k+1`.
    pub covariance_residual: f64,
    /// Largest difference under the phase matching `t -> t+1 (mod n)`.
    pub component_residual: f64,
}

/// Shift invariance of the mixture's window laws, checked both on mixture
/// covariances and on the component multiset.
pub fn mixture_stationarity(s: &ShiftMixtureModel, len: usize) -> Result<MixtureStationarity> {
    let w = s.window();
    if len == 0 || len >= w {
        return Err(Error::InvalidArgument(format!("window length {len} must be in 1..{w}")));
    }
    let mut covariance_residual = 0.0_f64;
    let mut component_residual = 0.0_f64;
    for k in 1..=(w - len) {
        let here = s.window_covariance(k, len)?;
        let next = s.window_covariance(k + 1, len)?;
        covariance_residual = covariance_residual.max(max_abs(&(here - next)));
        for t in 0..s.n {
            let shifted = s.components[t].window(k + 1, len)?;
            let matched = s.components[(t + 1) % s.n].window(k, len)?;
            component_residual = component_residual.max(max_abs(&(shifted.matrix() - matched.matrix())));
        }
    }
    Ok(MixtureStationarity {
        covariance_residual,
        component_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureBound {
    pub m: usize,
    /// `I(x̄(1..m); ȳ(1..m) | T)` in bits.
    pub conditional_mi: f64,
    /// Per-component `I(x̄(1..m); ȳ(1..m) | T = t)`.
    pub component_mi: Vec<f64>,
    pub block_mi: f64,
    pub report: AuditReport,
}

impl MixtureBound {
    pub fn per_sample(&self) -> f64 {
        self.conditional_mi / self.m as f64
    }

    /// `(1/n + 2/m) I(block)`.
    pub fn bound(&self, n: usize) -> f64 {
        (1.0 / n as f64 + 2.0 / self.m as f64) * self.block_mi
    }
}

/// Conditional mutual information of the mixture given the shift, with the
/// per-component and averaged rate bounds.
pub fn mixture_conditional_mi(s: &ShiftMixtureModel, m: usize, block_mi: f64, tol: f64) -> Result<MixtureBound> {
    if m == 0 || m > s.window() {
        return Err(Error::InsufficientHorizon {
            required: m,
            available: s.window(),
        });
    }
    let component_mi = s
        .components
        .par_iter()
        .map(|c| mutual_information(c, &c.xs(1, m), &c.ys(1, m)))
        .collect::<Result<Vec<_>>>()?;
    let conditional_mi = compensated_sum(component_mi.iter().copied()) * s.weight();
    let rhs = (1.0 / s.n as f64 + 2.0 / m as f64) * block_mi;
    let mut report = AuditReport::new("shift mixture rate bound");
    for (t, mi) in component_mi.iter().enumerate() {
        report.push(Check::le(
            &format!("component t={t} window rate (m={m})"),
            "I_inequality",
            mi / m as f64,
            rhs,
            tol,
        ));
    }
    report.push(Check::le(
        &format!("conditional mixture rate (m={m})"),
        "lalalala",
        conditional_mi / m as f64,
        rhs,
        tol,
    ));
    Ok(MixtureBound {
        m,
        conditional_mi,
        component_mi,
        block_mi,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{replicate_blocks, BlockChannel};
    use crate::gauss::ArSourceModel;

    fn causal_channel(n: usize) -> BlockChannel {
        let g = DMatrix::from_fn(n, n, |i, j| if j <= i { 0.5_f64.powi((i - j) as i32) } else { 0.0 });
        BlockChannel::new(g, CovarianceMatrix::new(DMatrix::identity(n, n) * 0.1).unwrap()).unwrap()
    }

    #[test]
    fn single_phase_degenerates() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = replicate_blocks(&src, &BlockChannel::additive(1, 0.1).unwrap(), 8).unwrap();
        let s = shift_stationarize(&r, 4, 0).unwrap();
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.weight(), 1.0);
    }

    #[test]
    fn phases_differ_before_mixing() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = replicate_blocks(&src, &causal_channel(2), 6).unwrap();
        let s = shift_stationarize(&r, 4, 0).unwrap();
        let d = s.components[0].sigma().matrix() - s.components[1].sigma().matrix();
        assert!(max_abs(&d) > 1e-3);
        let st = mixture_stationarity(&s, 2).unwrap();
        assert!(st.covariance_residual < 1e-12);
        assert!(st.component_residual < 1e-12);
    }

    #[test]
    fn insufficient_horizon_reports_requirement() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = replicate_blocks(&src, &causal_channel(2), 3).unwrap();
        match shift_stationarize(&r, 4, 0) {
            Err(Error::InsufficientHorizon { required, available }) => {
                assert_eq!((required, available), (8, 6));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iid_memoryless_rates_coincide() {
        let src = ArSourceModel::new(vec![0.0], 1.0).unwrap();
        let n = 4;
        let r = replicate_blocks(&src, &BlockChannel::additive(n, 0.2).unwrap(), 4).unwrap();
        let block = r.block_mi(1).unwrap();
        let s = shift_stationarize(&r, n, 0).unwrap();
        let b = mixture_conditional_mi(&s, n, block, 1e-9).unwrap();
        assert!((b.per_sample() - block / n as f64).abs() < 1e-12);
        assert!(b.report.passed());
    }
}
