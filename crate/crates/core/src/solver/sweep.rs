use rayon::prelude::*;
use serde::Serialize;

use super::{finite_horizon_irdf, stationary_irdf, RdPoint, SolverOptions, StageAllocation};
use crate::error::{Error, Result};
use crate::gauss::ArSourceModel;
use crate::report::{fmt_sig, ser_sig, AuditReport, Check};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub horizon: usize,
    #[serde(serialize_with = "ser_sig")]
    pub rate_bits: f64,
    #[serde(serialize_with = "ser_sig")]
    pub gap_bits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    #[serde(rename = "D", serialize_with = "ser_sig")]
    pub distortion: f64,
    #[serde(serialize_with = "ser_sig")]
    pub stationary_bits: f64,
    pub rows: Vec<ConvergenceRow>,
    pub report: AuditReport,
}

/// `|R̂ₙ(D) − R̄(D)|` over increasing horizons, with the final gap checked
/// against `tol` and against the first gap, and successive gaps non-increasing.
pub fn convergence_report(
    model: &ArSourceModel,
    distortion: f64,
    horizons: &[usize],
    tol: f64,
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("horizons must be non-empty and increasing".into()));
    }
    let stationary = stationary_irdf(model, distortion)?.rate_bits;
    let rows = horizons
        .par_iter()
        .map(|&n| {
            let r = finite_horizon_irdf(model, distortion, n, opts)?.rate_bits;
            Ok(ConvergenceRow {
                horizon: n,
                rate_bits: r,
                gap_bits: (r - stationary).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = AuditReport::new(format!("convergence at D={}", fmt_sig(distortion)));
    for w in rows.windows(2) {
        report.push(Check::le(
            &format!("gap non-increasing n={} -> n={}", w[0].horizon, w[1].horizon),
            "RcitD_equals_Rcitd_hat",
            w[1].gap_bits,
            w[0].gap_bits,
            1e-12,
        ));
    }
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    if rows.len() > 1 && first.gap_bits > 0.0 {
        report.push(Check::flag(
            "final gap below first gap",
            "RcitD_equals_Rcitd_hat",
            last.gap_bits,
            first.gap_bits,
            last.gap_bits < first.gap_bits,
        ));
    }
    report.push(Check::flag(
        &format!("final gap at n={}", last.horizon),
        "RcitD_equals_Rcitd_hat",
        last.gap_bits,
        tol,
        last.gap_bits < tol,
    ));
    Ok(ConvergenceReport {
        distortion,
        stationary_bits: stationary,
        rows,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "D", serialize_with = "ser_sig")]
    pub distortion: f64,
    #[serde(rename = "R_stationary_bits", serialize_with = "ser_sig")]
    pub stationary_bits: f64,
    #[serde(rename = "R_finite_bits", serialize_with = "ser_sig")]
    pub finite_bits: f64,
    pub horizon: usize,
    #[serde(rename = "gap_bits", serialize_with = "ser_sig")]
    pub gap_bits: f64,
    pub allocation: StageAllocation,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub report: AuditReport,
}

/// Stationary and finite-horizon values for every `D`, in input order.
pub fn rd_sweep(model: &ArSourceModel, distortions: &[f64], horizon: usize, opts: &SolverOptions) -> Result<SweepReport> {
    if distortions.is_empty() {
        return Err(Error::InvalidArgument("empty distortion list".into()));
    }
    let rows = distortions
        .par_iter()
        .map(|&d| {
            let s = stationary_irdf(model, d)?;
            let f: RdPoint = finite_horizon_irdf(model, d, horizon, opts)?;
            Ok(SweepRow {
                distortion: d,
                stationary_bits: s.rate_bits,
                finite_bits: f.rate_bits,
                horizon,
                gap_bits: (f.rate_bits - s.rate_bits).abs(),
                allocation: f.allocation.expect("finite solver returns an allocation"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| rows[i].distortion.total_cmp(&rows[j].distortion));
    let mut report = AuditReport::new("rate-distortion sweep");
    for w in order.windows(2) {
        let (lo, hi) = (&rows[w[0]], &rows[w[1]]);
        for (name, a, b) in [
            ("stationary", lo.stationary_bits, hi.stationary_bits),
            ("finite", lo.finite_bits, hi.finite_bits),
        ] {
            report.push(Check::le(
                &format!("{name} R non-increasing D={} -> D={}", fmt_sig(lo.distortion), fmt_sig(hi.distortion)),
                "Overline_RCitd_redef",
                b,
                a,
                1e-12,
            ));
        }
    }
    Ok(SweepReport { rows, report })
}

/// CSV with columns `D,R_stationary_bits,R_finite_bits,horizon,gap_bits`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("D,R_stationary_bits,R_finite_bits,horizon,gap_bits\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(r.distortion),
            fmt_sig(r.stationary_bits),
            fmt_sig(r.finite_bits),
            r.horizon,
            fmt_sig(r.gap_bits)
        ));
    }
    out
}
