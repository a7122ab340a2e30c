//! Concrete K-hop encoders and deciders: random quantization codebooks with
//! joint-typicality encoding per hop, a reserved REJECT index, and
//! typicality decisions at every center.

mod codebook;
mod ensemble;
mod network;
mod protocol;

pub use codebook::{
    build_codebooks, compact_channel, decide_hop, decision_deviation, encode_hop, entry_count, message_bits, Codebook,
    CodebookDescriptor, DecisionRule, HopMessage, EXPLICIT_ENTRY_LIMIT, RECOMMENDED_RATE_MARGIN,
};
pub use ensemble::EnsembleCode;
pub use network::HopNetworkSpec;
pub use protocol::{ConstantCode, HopCode, IdentityCode, OpenTrace, Protocol, Trace};
