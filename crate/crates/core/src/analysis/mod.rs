//! Tampering experiments, the simulator distribution and security bounds.

mod bounds;
mod certify;
mod distribution;

pub use bounds::{
    epsilon_bound, epsilon_bound_exact, epsilon_tail_raw, tail_bound, tail_bound_exact,
    tail_bound_raw, BoundReport, Components, Premises, SQUARED_FORM_NOTE,
};
pub use certify::{
    build_df, nm_certify, offset_distribution, structural_identity, tamper_distribution,
    tampered_distribution, verify_fact, FactReport, MessageReport, Mode, NmReport, ThresholdKind,
    DEFAULT_SAMPLES, EXACT_MESSAGE_BITS_LIMIT, SAMPLED_MESSAGES,
};
pub use distribution::{Distribution, ExactDistribution, SampledDistribution};
