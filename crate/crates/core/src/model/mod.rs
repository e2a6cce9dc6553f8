//! Domain types shared by the analysis, codec and simulation layers.

pub(crate) mod assignment;

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use assignment::{Assignment, AssignmentReport, AssignmentViolation, ShufflePair};

/// Identifier of a data point, stable across epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `N` opaque payload blocks of `d` bytes each, addressed by [`PointId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n_points: usize,
    block_size: usize,
    bytes: Vec<u8>,
}

impl Dataset {
    /// Deterministic pseudorandom payloads: the same `(n_points, block_size, seed)`
    /// always produces the same bytes.
    pub fn generate(n_points: usize, block_size: usize, seed: u64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one point".into()));
        }
        if block_size == 0 {
            return Err(Error::InvalidArgument("block size must be at least one byte".into()));
        }
        if n_points > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("{n_points} points exceed the id range")));
        }
        let len = n_points
            .checked_mul(block_size)
            .ok_or_else(|| Error::InvalidArgument("dataset size overflows".into()))?;
        let mut bytes = vec![0u8; len];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut bytes);
        Ok(Dataset { n_points, block_size, bytes })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Panics if `id` is outside `[0, N)`.
    pub fn block(&self, id: PointId) -> &[u8] {
        let start = id.index() * self.block_size;
        &self.bytes[start..start + self.block_size]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (PointId, &[u8])> {
        self.bytes.chunks_exact(self.block_size).enumerate().map(|(i, b)| (PointId(i as u32), b))
    }
}

/// Shorthand for [`Dataset::generate`].
pub fn make_dataset(n_points: usize, block_size: usize, seed: u64) -> Result<Dataset> {
    Dataset::generate(n_points, block_size, seed)
}

pub fn validate_assignment(assignment: &Assignment, n_points: usize) -> AssignmentReport {
    assignment.validate(n_points)
}

pub(crate) fn xor_blocks(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// Pairwise symbol useful to both of its endpoint workers.
    Order2,
    /// Leftover combination created for `served_worker`: one point it needs
    /// XOR one leftover point it holds.
    Chain { served_worker: usize },
}

/// XOR of two point payloads. Component ids travel alongside the payload and
/// are not counted in the rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSymbol {
    pub kind: SymbolKind,
    /// Order-2: `[point moving i -> j, point moving j -> i]` with `i < j`.
    /// Chain: `[point needed by the served worker, point it holds]`.
    pub components: [PointId; 2],
    pub payload: Vec<u8>,
}

impl CodedSymbol {
    pub(crate) fn combine(kind: SymbolKind, a: PointId, b: PointId, data: &Dataset) -> Self {
        debug_assert_ne!(a, b);
        CodedSymbol { kind, components: [a, b], payload: xor_blocks(data.block(a), data.block(b)) }
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.components.contains(&id)
    }

    /// The component that is not `id`, if `id` is one of the two.
    pub fn other(&self, id: PointId) -> Option<PointId> {
        match self.components {
            [a, b] if a == id => Some(b),
            [a, b] if b == id => Some(a),
            _ => None,
        }
    }
}

/// Everything the master broadcasts for one epoch transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionPlan {
    pub k_workers: usize,
    pub phase1: Vec<CodedSymbol>,
    pub phase2: Vec<CodedSymbol>,
    pub ignored_worker: usize,
}

impl TransmissionPlan {
    /// Number of broadcast symbols, i.e. the rate in units of one payload.
    pub fn rate_points(&self) -> usize {
        self.phase1.len() + self.phase2.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &CodedSymbol> {
        self.phase1.iter().chain(&self.phase2)
    }
}

/// Debug dump: `P1 a^b`, `P2@w<i> a^b`, then `IGNORED w<k>`. Workers are
/// 1-based, payloads omitted.
impl fmt::Display for TransmissionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sym in self.symbols() {
            let [a, b] = sym.components;
            match sym.kind {
                SymbolKind::Order2 => writeln!(f, "P1 {a}^{b}")?,
                SymbolKind::Chain { served_worker } => writeln!(f, "P2@w{} {a}^{b}", served_worker + 1)?,
            }
        }
        writeln!(f, "IGNORED w{}", self.ignored_worker + 1)
    }
}
