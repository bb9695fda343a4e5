//! Seeded invariant suites. Each returns an [`AuditReport`]; a suite passes
//! when every check passes.

mod constructions;
mod coder;
mod gauss;
mod random;
mod solver;

use crate::error::{Error, Result};
use crate::report::AuditReport;

pub use constructions::constructions_suite;
pub use coder::coder_suite;
pub use gauss::gauss_suite;
pub use random::{random_partition, random_spd, schur_cmi};
pub use solver::{solver_suite, SOLVER_QUERIES};

pub const SUITES: [&str; 4] = ["gauss", "constructions", "solver", "coder"];

/// Runs one named suite, or all of them for `"all"`.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<AuditReport>> {
    match name {
        "gauss" => Ok(vec![gauss_suite(seed)?]),
        "constructions" => Ok(vec![constructions_suite(seed)?]),
        "solver" => Ok(vec![solver_suite(seed)?]),
        "coder" => Ok(vec![coder_suite(seed)?]),
        "all" => SUITES.iter().map(|s| run_suite(s, seed).map(|mut v| v.remove(0))).collect(),
        other => Err(Error::InvalidArgument(format!(
            "unknown suite {other:?}; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}
