//! Two-phase coded delivery and its decoder.
//!
//! Phase 1 sends one order-2 symbol `x_{i,j} ^ x_{j,i}` for every point pair
//! that two workers exchange in opposite directions. What remains forms the
//! leftover multigraph (an edge `i -> j` per point still owed by `w_i` to
//! `w_j`). In Phase 2 every worker except one ignored worker `w_k` has its
//! incoming leftover edges matched one-to-one with its outgoing ones, and each
//! match is sent as `incoming ^ outgoing`. The ignored worker never gets a
//! symbol of its own; it peels its needs off the chains that start at its
//! outgoing edges.

mod decoder;
mod encoder;
mod pairing;

pub use decoder::{decode_worker, update_cache, DecodeResult, WorkerCache};
pub use encoder::{encode, encode_phase1, encode_phase2, encode_with_ignored, residual_counts, LeftoverEdge};
pub use pairing::{build_pairing, PairingTable};
