//! Second-order algebra for jointly Gaussian source/reconstruction pairs:
//! covariance assembly, mutual information and Markov/causality certificates.
//!
//! Information quantities are in bits. All processes are zero-mean.

mod certify;
mod covariance;
mod info;
mod source;

pub use certify::{
    causality_audit, joint_stationarity_audit, markov_order, present_sample_audit, stationary_causal_certificate,
    window_blocks, CausalityVariant, GeometricCertificate, GeometricStatus, StationarityAudit, DEFAULT_TOL,
};
pub use covariance::{CovarianceMatrix, IndexSet, JointProcessModel, LinearChannelSpec};
pub use info::{conditional_mutual_information, markov_chain_check, mutual_information, MarkovCertificate};
pub use source::ArSourceModel;
