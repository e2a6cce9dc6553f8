//! Coded data shuffling for master/worker systems with no excess storage.
//!
//! Between two epochs every worker `w_i` drops part of its batch and needs the
//! points that moved to it from other workers. The master broadcasts XOR
//! combinations of point payloads so that every worker can rebuild its next
//! batch from its current one:
//!
//! * [`analysis`] computes the shuffle and leftover matrices, checks their
//!   conservation laws and evaluates the uncoded rate, the achievable rate and
//!   the permutation lower bound.
//! * [`codec`] builds the two-phase broadcast (pairwise order-2 symbols, then
//!   chained leftovers with one ignored worker) and decodes it at any worker.
//! * [`sim`] drives encode/decode/update over many epochs.
//! * [`cli`] is the command-line front end.
//!
//! Rates are counted in symbols; each symbol carries one `d`-byte payload.
//! Worker indices are 0-based in the API and 1-based in every rendered output.

pub mod analysis;
pub mod cli;
pub mod codec;
mod error;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
pub use model::{Assignment, CodedSymbol, Dataset, PointId, ShufflePair, SymbolKind, TransmissionPlan};
