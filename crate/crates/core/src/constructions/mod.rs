//! Process constructions: block replication of a finite-horizon channel,
//! random-shift stationarization, first-sample concatenation and
//! conditionally independent copies, with the information inequalities each
//! construction is supposed to satisfy.
//!
//! Mixture-level quantities are computed given the shift variable, where every
//! component is exactly Gaussian.

mod channel;
mod concat;
mod copy;
mod replicate;
mod shift;

pub use channel::{distortion_check, BlockChannel, DistortionCheck};
pub use concat::{concatenate_first_samples, concatenated_causality, qjs_audit, ConcatenatedModel, QjsAudit};
pub use copy::conditionally_independent_copy;
pub use replicate::{
    block_conditional_independence, kappa_causality_audit, replicate_blocks, verify_block_identities,
    BlockIdentities, ReplicatedModel,
};
pub use shift::{
    mixture_conditional_mi, mixture_stationarity, shift_stationarize, MixtureBound, MixtureStationarity,
    ShiftMixtureModel,
};
