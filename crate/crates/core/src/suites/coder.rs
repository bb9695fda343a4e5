use crate::coder::{design_coder, encode, evaluate, kraft_sum, synthesize_ar1};
use crate::error::Result;
use crate::gauss::ArSourceModel;
use crate::report::{AuditReport, Check};

pub const CODER_SAMPLES: usize = 200_000;

pub fn coder_suite(seed: u64) -> Result<AuditReport> {
    let mut report = AuditReport::new("coder");
    let m = ArSourceModel::ar1(0.9, 0.19)?;
    let e = evaluate(&m, 0.1, CODER_SAMPLES, seed)?;
    report.push(Check::eq(
        "measured distortion relative to target",
        "ddots_meets_distorsion",
        e.stats.mse / 0.1,
        1.0,
        0.03,
    ));
    report.extend(e.report);
    let iid = ArSourceModel::new(vec![0.0], 1.0)?;
    let e = evaluate(&iid, 0.5, CODER_SAMPLES, seed)?;
    report.push(Check::eq(
        "i.i.d. measured distortion relative to target",
        "ddots_meets_distorsion",
        e.stats.mse / 0.5,
        1.0,
        0.03,
    ));
    report.push(Check::le("Kraft sum of the index code", "kraft", kraft_sum(), 1.0, 0.0));
    let cfg = design_coder(&m, 0.1, seed)?;
    let x = synthesize_ar1(&m, 20_000, seed)?;
    let (a, b) = (encode(&x, &cfg)?, encode(&x, &cfg)?);
    report.push(Check::flag(
        "identical input, config and seed give identical streams",
        "determinism",
        0.0,
        0.0,
        a.bitstream == b.bitstream && a.stats == b.stats,
    ));
    Ok(report)
}
