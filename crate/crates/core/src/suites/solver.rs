use crate::error::Result;
use crate::gauss::ArSourceModel;
use crate::report::{AuditReport, Check};
use crate::solver::{
    audit_allocation, brute_force_irdf, convergence_report, finite_horizon_irdf, stationary_irdf, SolverOptions,
};

/// (a, σ², D, n) queries for the brute-force comparison; D is a multiple of
/// the 1e-3 grid step.
pub const SOLVER_QUERIES: [(f64, f64, f64, usize); 10] = [
    (0.9, 0.19, 0.1, 1),
    (0.9, 0.19, 0.1, 2),
    (0.9, 0.19, 0.1, 3),
    (0.9, 0.19, 0.05, 2),
    (0.9, 0.19, 0.3, 3),
    (0.5, 0.75, 0.1, 2),
    (0.5, 0.75, 0.25, 3),
    (0.0, 1.0, 0.25, 3),
    (0.7, 0.51, 0.5, 2),
    (0.9, 0.19, 0.9, 3),
];

pub const CONVERGENCE_HORIZONS: [usize; 5] = [4, 16, 64, 256, 1024];

/// The seed is unused: every check here is deterministic.
pub fn solver_suite(_seed: u64) -> Result<AuditReport> {
    let opts = SolverOptions::default();
    let mut report = AuditReport::new("solver");
    let m = ArSourceModel::ar1(0.9, 0.19)?;
    report.push(Check::eq(
        "stationary IRDF at (0.9, 0.19, 0.1)",
        "RcitD_equals_Rcitd_hat",
        stationary_irdf(&m, 0.1)?.rate_bits,
        0.5 * 2.71_f64.log2(),
        1e-5,
    ));
    for (a, s2, d, n) in SOLVER_QUERIES {
        let m = ArSourceModel::ar1(a, s2)?;
        let fin = finite_horizon_irdf(&m, d, n, &opts)?;
        let brute = brute_force_irdf(&m, d, n, 1e-3)?;
        report.push(Check::eq(
            &format!("finite vs brute force a={a} D={d} n={n}"),
            "RcitD_lim_inf",
            fin.rate_bits,
            brute.rate_bits,
            5e-3,
        ));
        report.extend(audit_allocation(&m, &fin, 1e-8)?.report);
    }
    for a in [0.5, 0.9] {
        let m = ArSourceModel::normalized(vec![a])?;
        for d in [0.05, 0.1, 0.3] {
            report.extend(convergence_report(&m, d, &CONVERGENCE_HORIZONS, 1e-3, &opts)?.report);
        }
    }
    Ok(report)
}
