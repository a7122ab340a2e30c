//! Information optimizations: the per-hop curves `eta_l(R)`, the exponent
//! region, the Wyner-Ziv rate and the lossless bound. All quantities are
//! in bits.

mod eta;
mod oracle;
mod pair;
mod region;
mod wz;

pub use eta::{eta, eta_with, lagrangian_sweep, EtaCurve, EtaPoint, SolverOptions};
pub use oracle::{eta_oracle, eta_oracle_many, ORACLE_EVALUATION_LIMIT};
pub use region::{exponent_region, region_for_rates, ExponentRegion};
pub use wz::{lossless_bound, wyner_ziv_rmin, wyner_ziv_rmin_with, DistortionSpec, WynerZivSolution, MAP_ENUMERATION_LIMIT};
