use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::channel::BlockChannel;
use super::shift::ShiftMixtureModel;
use crate::error::{Error, Result};
use crate::gauss::{causality_audit, mutual_information, CausalityVariant, CovarianceMatrix, JointProcessModel};
use crate::linalg::{compensated_sum, max_abs};
use crate::report::{AuditReport, Check};

/// Pair obtained by prefixing the shift mixture with `κ-1` head samples: the
/// head source is the mixture's leading x samples and the head reconstruction
/// is produced from them alone.
#[derive(Debug, Clone)]
pub struct ConcatenatedModel {
    pub kappa: usize,
    /// `(x̂, ŷ)` over `κ-1` samples; `None` when `κ <= 1`.
    pub head: Option<JointProcessModel>,
    /// Per-shift law of the concatenated pair over `κ-1+window` samples.
    pub windows: Vec<JointProcessModel>,
}

impl ConcatenatedModel {
    /// `I(x̂; ŷ)`, zero when there is no head.
    pub fn head_mi(&self) -> Result<f64> {
        match &self.head {
            None => Ok(0.0),
            Some(h) => mutual_information(h, &h.xs(1, h.horizon()), &h.ys(1, h.horizon())),
        }
    }

    pub fn horizon(&self) -> usize {
        self.windows[0].horizon()
    }
}

/// Prefixes every shift component with the head pair `(x̂, ŷ)`, where `x̂` is the
/// component's `κ-1` leading x samples and `ŷ = H x̂ + w` with `w` independent of
/// everything else.
pub fn concatenate_first_samples(
    tail: &ShiftMixtureModel,
    head_channel: Option<&BlockChannel>,
    kappa: usize,
) -> Result<ConcatenatedModel> {
    if kappa <= 1 {
        let windows = tail
            .components
            .iter()
            .map(|c| {
                let pos = c.xs(1, c.horizon()).union(&c.ys(1, c.horizon()));
                let zb: Vec<usize> = pos.indices().iter().map(|i| i - 1).collect();
                JointProcessModel::new(c.horizon(), CovarianceMatrix::new(c.sigma().restrict(&zb))?, c.label())
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(ConcatenatedModel {
            kappa,
            head: None,
            windows,
        });
    }
    let p = kappa - 1;
    let head_channel = head_channel.ok_or_else(|| Error::InvalidArgument("κ >= 2 needs a head channel".into()))?;
    if head_channel.n() != p {
        return Err(Error::DimensionMismatch(format!(
            "head channel has length {}, κ-1 = {p}",
            head_channel.n()
        )));
    }
    if tail.lead != p {
        return Err(Error::InvalidArgument(format!(
            "tail carries {} leading samples, κ-1 = {p}",
            tail.lead
        )));
    }
    let h = head_channel.gain();
    let windows = tail
        .components
        .iter()
        .map(|c| {
            let w = c.horizon();
            let s = c.sigma().matrix();
            // Source layout of the component: [x_lead (p), x̄ (w), ȳ (w)].
            let dim = p + w + w;
            let past: Vec<usize> = (0..p).collect();
            let all: Vec<usize> = (0..dim).collect();
            let s_past_all = crate::linalg::submatrix(s, &past, &all);
            let s_pp = crate::linalg::submatrix(s, &past, &past);
            let yhat_all = h * s_past_all; // cov(ŷ, ·)
            let yhat_yhat = h * s_pp * h.transpose() + head_channel.noise_cov().matrix();
            // Target layout: [x_lead, x̄ | ŷ, ȳ].
            let nx = p + w;
            let total = 2 * nx;
            let src_of = |i: usize| -> Option<usize> {
                if i < nx {
                    Some(i)
                } else if i < nx + p {
                    None
                } else {
                    Some(i - p)
                }
            };
            let out = DMatrix::from_fn(total, total, |i, j| match (src_of(i), src_of(j)) {
                (Some(a), Some(b)) => s[(a, b)],
                (None, Some(b)) => yhat_all[(i - nx, b)],
                (Some(a), None) => yhat_all[(j - nx, a)],
                (None, None) => yhat_yhat[(i - nx, j - nx)],
            });
            JointProcessModel::new(nx, CovarianceMatrix::new(out)?, format!("concat {}", c.label()))
        })
        .collect::<Result<Vec<_>>>()?;
    let head = {
        let w0 = &windows[0];
        let pos = w0.xs(1, p).union(&w0.ys(1, p));
        let zb: Vec<usize> = pos.indices().iter().map(|i| i - 1).collect();
        JointProcessModel::new(p, CovarianceMatrix::new(w0.sigma().restrict(&zb))?, "head")?
    };
    Ok(ConcatenatedModel {
        kappa,
        head: Some(head),
        windows,
    })
}

/// Short causality of every shift component, plus equality of the x-marginals
/// across shifts (the source is independent of the shift), which together give
/// causality of the mixture.
pub fn concatenated_causality(c: &ConcatenatedModel, tol: f64) -> Result<AuditReport> {
    let mut report = AuditReport::new("concatenated causality");
    for w in &c.windows {
        let certs = causality_audit(w, CausalityVariant::Short, tol)?;
        let worst = certs.iter().fold(0.0_f64, |a, m| a.max(m.residual));
        report.push(Check::flag(
            &format!("{} causal", w.label()),
            "ddots_are_causal",
            worst,
            tol,
            certs.iter().all(|m| m.holds),
        ));
    }
    let nx = c.horizon();
    let xs: Vec<usize> = (0..nx).collect();
    let first = c.windows[0].sigma().restrict(&xs);
    let dev = c
        .windows
        .iter()
        .map(|w| max_abs(&(w.sigma().restrict(&xs) - &first)))
        .fold(0.0_f64, f64::max);
    report.push(Check::le("source independent of shift", "xbar_ybar_def", dev, 0.0, tol));
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct QjsAudit {
    pub horizons: Vec<usize>,
    /// `g_i = (1/i)|I(ẍ(1..i); ÿ(1..i) | T) - I(ẍ(κ..i); ÿ(κ..i) | T)|`.
    pub gaps: Vec<f64>,
    /// `(I(head) + I(block) + slack) / i`.
    pub bounds: Vec<f64>,
    pub report: AuditReport,
}

/// Gap between the mutual information rates from sample 1 and from sample κ,
/// computed given the shift, against the head-plus-block bound.
pub fn qjs_audit(c: &ConcatenatedModel, horizons: &[usize], block_mi: f64, slack: f64) -> Result<QjsAudit> {
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("horizons must be increasing".into()));
    }
    let kappa = c.kappa.max(1);
    if let Some(&bad) = horizons.iter().find(|&&i| i < kappa || i > c.horizon()) {
        return Err(Error::InvalidArgument(format!(
            "horizon {bad} outside [{kappa}, {}]",
            c.horizon()
        )));
    }
    let head_mi = c.head_mi()?;
    let weight = 1.0 / c.windows.len() as f64;
    let mut report = AuditReport::new("quasi-joint stationarity");
    let mut gaps = Vec::with_capacity(horizons.len());
    let mut bounds = Vec::with_capacity(horizons.len());
    for &i in horizons {
        let diffs = c
            .windows
            .par_iter()
            .map(|w| {
                let full = mutual_information(w, &w.xs(1, i), &w.ys(1, i))?;
                let tail = mutual_information(w, &w.xs(kappa, i), &w.ys(kappa, i))?;
                Ok(full - tail)
            })
            .collect::<Result<Vec<f64>>>()?;
        let gap = (compensated_sum(diffs) * weight).abs() / i as f64;
        let bound = (head_mi + block_mi + slack) / i as f64;
        report.push(Check::le(&format!("rate gap at horizon {i}"), "ddot_xy_is_kappa_QJS", gap, bound, 0.0));
        gaps.push(gap);
        bounds.push(bound);
    }
    for (k, w) in gaps.windows(2).enumerate() {
        report.push(Check::le(
            &format!("gap non-increasing {} -> {}", horizons[k], horizons[k + 1]),
            "ddot_xy_is_kappa_QJS",
            w[1],
            w[0],
            1e-12,
        ));
    }
    Ok(QjsAudit {
        horizons: horizons.to_vec(),
        gaps,
        bounds,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{replicate_blocks, shift_stationarize};
    use crate::gauss::ArSourceModel;

    fn causal_channel(n: usize) -> BlockChannel {
        let g = DMatrix::from_fn(n, n, |i, j| if j <= i { 0.5_f64.powi((i - j) as i32) } else { 0.0 });
        BlockChannel::new(g, CovarianceMatrix::new(DMatrix::identity(n, n) * 0.1).unwrap()).unwrap()
    }

    fn ar2_concat(window: usize) -> (ConcatenatedModel, f64) {
        let src = ArSourceModel::normalized(vec![0.5, 0.3]).unwrap();
        let n = 4;
        let blocks = (window + 2 * n).div_ceil(n);
        let r = replicate_blocks(&src, &causal_channel(n), blocks).unwrap();
        let block = r.block_mi(1).unwrap();
        let s = shift_stationarize(&r, window, 1).unwrap();
        let c = concatenate_first_samples(&s, Some(&BlockChannel::additive(1, 1.0).unwrap()), 2).unwrap();
        (c, block)
    }

    #[test]
    fn kappa_one_is_identity() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = replicate_blocks(&src, &causal_channel(2), 8).unwrap();
        let s = shift_stationarize(&r, 8, 0).unwrap();
        let c = concatenate_first_samples(&s, None, 1).unwrap();
        assert_eq!(c.head_mi().unwrap(), 0.0);
        for (w, comp) in c.windows.iter().zip(&s.components) {
            assert_eq!(w.sigma().matrix(), comp.sigma().matrix());
        }
        let q = qjs_audit(&c, &[2, 4, 8], r.block_mi(1).unwrap(), 1e-6).unwrap();
        assert!(q.gaps.iter().all(|&g| g.abs() < 1e-12));
    }

    #[test]
    fn ar2_head_is_causal_and_gaps_shrink() {
        let (c, block) = ar2_concat(64);
        assert_eq!(c.head.as_ref().unwrap().horizon(), 1);
        let h = c.head_mi().unwrap();
        assert!(h.is_finite() && h > 0.0);
        assert!(concatenated_causality(&c, 1e-8).unwrap().passed());
        let q = qjs_audit(&c, &[8, 16, 32, 64], block, 1e-6).unwrap();
        assert!(q.report.passed(), "{:?}", q.report);
        assert!(q.gaps.windows(2).all(|w| w[1] < w[0]));
        for (g, &i) in q.gaps.iter().zip(&q.horizons) {
            assert!(g * i as f64 <= h + block + 1e-6);
        }
    }

    #[test]
    fn head_length_must_match() {
        let src = ArSourceModel::ar1(0.9, 0.19).unwrap();
        let r = replicate_blocks(&src, &causal_channel(2), 8).unwrap();
        let s = shift_stationarize(&r, 8, 1).unwrap();
        let bad = BlockChannel::additive(2, 1.0).unwrap();
        assert!(concatenate_first_samples(&s, Some(&bad), 2).is_err());
        assert!(concatenate_first_samples(&s, None, 2).is_err());
    }
}
