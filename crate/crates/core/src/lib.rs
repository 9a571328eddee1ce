pub mod amd;
pub mod analysis;
pub mod error;
pub mod gf2;
pub mod instances;
pub mod lecss;
pub mod nmcode;
pub mod scalar;
pub mod tamper;

pub use error::{NmcError, Result};
pub use scalar::{Probability, Rational};

pub type ExactDistribution = analysis::ExactDistribution;
pub type SampledDistribution = analysis::SampledDistribution;
pub type BoundReport64 = analysis::BoundReport<f64>;
pub type BoundReport32 = analysis::BoundReport<f32>;
