//! Numerical laboratory for K-hop distributed hypothesis testing against
//! independence.
//!
//! * [`probcore`]: exact pmfs, information measures, strong typicality.
//! * [`exponents`]: the per-hop curves `eta_l(R)`, the exponent region,
//!   Wyner-Ziv and lossless rates.
//! * [`schemes`]: quantize-and-forward encoders and typicality deciders.
//! * [`simulator`]: Monte Carlo error estimates, exponent fits and the
//!   type-I sweep.
//! * [`diagnostics`]: exact small-blocklength checks of the change-of-measure
//!   converse.
//! * [`cli`]: configuration parsing and reproducible output.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod exponents;
pub mod probcore;
pub mod report;
pub mod schemes;
pub mod seeding;
pub mod simulator;

pub use error::{Error, Result};
