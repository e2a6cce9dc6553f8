use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::{xor_blocks, Assignment, Dataset, PointId, ShufflePair, SymbolKind, TransmissionPlan};

/// The blocks a worker currently stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkerCache {
    pub worker: usize,
    pub blocks: BTreeMap<PointId, Vec<u8>>,
}

impl WorkerCache {
    pub fn from_dataset(data: &Dataset, assignment: &Assignment, worker: usize) -> Self {
        let blocks = assignment.batch(worker).iter().map(|&id| (id, data.block(id).to_vec())).collect();
        WorkerCache { worker, blocks }
    }

    pub fn point_ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.blocks.keys().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub worker: usize,
    pub recovered: BTreeMap<PointId, Vec<u8>>,
    /// Number of decoding steps behind each recovered point.
    pub steps: BTreeMap<PointId, usize>,
}

impl DecodeResult {
    pub fn max_depth(&self) -> usize {
        self.steps.values().copied().max().unwrap_or(0)
    }
}

/// Recovers `next.batch[worker] \ prev.batch[worker]` from the broadcast.
///
/// Non-ignored workers only look at order-2 symbols and chain symbols created
/// for them, and XOR out the component they hold. The ignored worker peels:
/// starting from its cache, any symbol with exactly one known component
/// reveals the other, breadth-first, until nothing changes.
pub fn decode_worker(plan: &TransmissionPlan, worker: usize, cache: &WorkerCache, pair: &ShufflePair) -> Result<DecodeResult> {
    if worker >= pair.k_workers() || plan.k_workers != pair.k_workers() {
        return Err(Error::InvalidArgument(format!("worker {} not in a {}-worker plan", worker + 1, plan.k_workers)));
    }
    if cache.worker != worker {
        return Err(Error::InvalidArgument(format!("cache of w{} used to decode w{}", cache.worker + 1, worker + 1)));
    }
    let needed: BTreeSet<PointId> = pair.needed(worker).into_iter().collect();

    let (recovered, steps) = if worker == plan.ignored_worker {
        peel(plan, cache, &needed)
    } else {
        direct(plan, worker, cache, &needed)
    };

    let missing: Vec<PointId> = needed.iter().filter(|id| !recovered.contains_key(id)).copied().collect();
    if !missing.is_empty() {
        return Err(Error::DecodeFailure { worker, missing });
    }
    Ok(DecodeResult { worker, recovered, steps })
}

type Decoded = (BTreeMap<PointId, Vec<u8>>, BTreeMap<PointId, usize>);

fn direct(plan: &TransmissionPlan, worker: usize, cache: &WorkerCache, needed: &BTreeSet<PointId>) -> Decoded {
    let mut recovered = BTreeMap::new();
    let mut steps = BTreeMap::new();
    let relevant = plan.symbols().filter(|s| match s.kind {
        SymbolKind::Order2 => true,
        SymbolKind::Chain { served_worker } => served_worker == worker,
    });
    for sym in relevant {
        let [a, b] = sym.components;
        let (held, want) = match (cache.blocks.get(&a), cache.blocks.get(&b)) {
            (Some(block), None) => (block, b),
            (None, Some(block)) => (block, a),
            _ => continue,
        };
        if needed.contains(&want) && !recovered.contains_key(&want) {
            recovered.insert(want, xor_blocks(&sym.payload, held));
            steps.insert(want, 1);
        }
    }
    (recovered, steps)
}

fn peel(plan: &TransmissionPlan, cache: &WorkerCache, needed: &BTreeSet<PointId>) -> Decoded {
    let symbols: Vec<_> = plan.symbols().collect();
    let mut by_point: HashMap<PointId, Vec<usize>> = HashMap::new();
    for (idx, sym) in symbols.iter().enumerate() {
        for id in sym.components {
            by_point.entry(id).or_default().push(idx);
        }
    }

    let mut known: HashMap<PointId, (Vec<u8>, usize)> = HashMap::new();
    let mut queue = VecDeque::new();
    for (&id, block) in &cache.blocks {
        if by_point.contains_key(&id) {
            known.insert(id, (block.clone(), 0));
            queue.push_back(id);
        }
    }

    let mut used = vec![false; symbols.len()];
    while let Some(id) = queue.pop_front() {
        let Some(touching) = by_point.get(&id) else { continue };
        for &idx in touching {
            if used[idx] {
                continue;
            }
            used[idx] = true;
            let other = symbols[idx].other(id).expect("indexed by component");
            if known.contains_key(&other) {
                continue;
            }
            let (block, depth) = &known[&id];
            let value = (xor_blocks(&symbols[idx].payload, block), depth + 1);
            known.insert(other, value);
            queue.push_back(other);
        }
    }

    let mut recovered = BTreeMap::new();
    let mut steps = BTreeMap::new();
    for id in needed {
        if let Some((block, depth)) = known.remove(id) {
            recovered.insert(*id, block);
            steps.insert(*id, depth);
        }
    }
    (recovered, steps)
}

/// Keeps the cached points that stay with the worker, adds the decoded ones
/// and drops the rest. Fails unless the result is exactly the next batch.
pub fn update_cache(cache: &WorkerCache, decoded: &DecodeResult, pair: &ShufflePair) -> Result<WorkerCache> {
    let worker = cache.worker;
    let next = pair.next().batch(worker);
    let mut blocks = BTreeMap::new();
    for id in next {
        let block = cache
            .blocks
            .get(id)
            .or_else(|| decoded.recovered.get(id))
            .ok_or_else(|| Error::Verification(format!("w{} has no block for point {id} after update", worker + 1)))?;
        blocks.insert(*id, block.clone());
    }
    Ok(WorkerCache { worker, blocks })
}
