//! Exact small-blocklength checks of the change-of-measure converse:
//! acceptance regions, `D_k` and `Delta_k`, the restricted measure, its
//! single-letterization and the finite-n inequalities behind the exponent
//! bound.

mod enumerate;
mod fixture;
mod measure;
mod single;

pub use enumerate::{enumerate_region, AcceptanceRegion, LevelTables, TupleSet, TupleSpace};
pub use fixture::{diagnose_code, standard_chain, DiagnosticFixture, InstanceReport};
pub use measure::{
    delta_k, entropy_convergence, restricted_measure, ConvergenceTable, DeltaReport, EntropyGap, RestrictedMeasure,
};
pub use single::{
    chain_gap, lemma1_certificate, markov_gap, single_letterize, HopCertificate, Lemma1Report, SingleLetterization,
};
