//! Causal rate-distortion laboratory for scalar Gauss–Markov sources.
//!
//! - [`gauss`]: covariance assembly, Gaussian mutual information and
//!   causality/stationarity certificates.
//! - [`constructions`]: block replication, random-shift stationarization,
//!   first-sample concatenation and conditionally independent copies.
//! - [`solver`]: finite-horizon and stationary causal IRDF for AR(1) sources.
//! - [`coder`]: zero-delay entropy-coded subtractively dithered predictive quantizer.
//! - [`suites`]: the invariant suites behind `crdlab audit`.

pub mod coder;
pub mod constructions;
pub mod error;
pub mod gauss;
pub mod linalg;
pub mod report;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};
pub use gauss::{ArSourceModel, CovarianceMatrix, IndexSet, JointProcessModel};
