use crate::analysis::{compute_leftover_matrix, compute_shuffle_matrix, rate_theorem1, CountMatrix};
use crate::error::{Error, Result};
use crate::model::{CodedSymbol, Dataset, PointId, ShufflePair, SymbolKind, TransmissionPlan};

use super::pairing::{build_pairing, PairingTable};

/// A point that worker `src` still owes worker `dst` after Phase 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeftoverEdge {
    pub src: usize,
    pub dst: usize,
    pub point: PointId,
}

fn check_dataset(pair: &ShufflePair, data: &Dataset) -> Result<()> {
    if data.n_points() != pair.n_points() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} points but the shuffle moves {}",
            data.n_points(),
            pair.n_points()
        )));
    }
    Ok(())
}

/// `moves[i][j]`: ids in `A_i^t ∩ A_j^{t+1}`, ascending.
fn moves(pair: &ShufflePair) -> Vec<Vec<Vec<PointId>>> {
    let k = pair.k_workers();
    let next_owner = pair.next().owners(pair.n_points());
    let mut moves = vec![vec![Vec::new(); k]; k];
    for (i, batch) in pair.prev().batches().iter().enumerate() {
        for &id in batch {
            moves[i][next_owner[id.index()]].push(id);
        }
    }
    moves
}

/// Order-2 symbols plus the leftover edges they could not absorb.
///
/// For each worker pair `i < j` the two directions are sorted by id and matched
/// positionally, giving `min(S[i][j], S[j][i])` symbols; the unmatched tail of
/// the longer side becomes leftover edges. Edges come out sorted by
/// `(src, dst, point)`.
pub fn encode_phase1(pair: &ShufflePair, data: &Dataset) -> Result<(Vec<CodedSymbol>, Vec<LeftoverEdge>)> {
    check_dataset(pair, data)?;
    let k = pair.k_workers();
    let moves = moves(pair);
    let mut symbols = Vec::new();
    let mut residual = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (fwd, back) = (&moves[i][j], &moves[j][i]);
            let m = fwd.len().min(back.len());
            for (&a, &b) in fwd.iter().zip(back).take(m) {
                symbols.push(CodedSymbol::combine(SymbolKind::Order2, a, b, data));
            }
            residual.extend(fwd[m..].iter().map(|&point| LeftoverEdge { src: i, dst: j, point }));
            residual.extend(back[m..].iter().map(|&point| LeftoverEdge { src: j, dst: i, point }));
        }
    }
    residual.sort_unstable();
    Ok((symbols, residual))
}

/// One chain symbol per matched `(incoming, outgoing)` pair, in worker order.
pub fn encode_phase2(pairing: &PairingTable, data: &Dataset) -> Vec<CodedSymbol> {
    let mut out = Vec::with_capacity(pairing.len());
    for worker in 0..pairing.k_workers() {
        for (incoming, outgoing) in pairing.matches_at(worker) {
            out.push(CodedSymbol::combine(
                SymbolKind::Chain { served_worker: worker },
                incoming.point,
                outgoing.point,
                data,
            ));
        }
    }
    out
}

/// Full plan with the ignored worker that minimizes the rate (lowest index on
/// ties). The symbol count always equals the achievable-rate formula.
pub fn encode(pair: &ShufflePair, data: &Dataset) -> Result<TransmissionPlan> {
    let s = compute_shuffle_matrix(pair);
    let omega = compute_leftover_matrix(&s);
    let (bound, ignored) = rate_theorem1(&s, &omega);
    let plan = encode_with_ignored(pair, data, ignored)?;
    debug_assert_eq!(plan.rate_points() as u64, bound);
    Ok(plan)
}

/// Like [`encode`] but with a caller-chosen ignored worker. Any choice is
/// decodable; only the Phase 2 length changes.
pub fn encode_with_ignored(pair: &ShufflePair, data: &Dataset, ignored: usize) -> Result<TransmissionPlan> {
    let k = pair.k_workers();
    if ignored >= k {
        return Err(Error::InvalidArgument(format!("ignored worker {} out of range for K={k}", ignored + 1)));
    }
    let (phase1, residual) = encode_phase1(pair, data)?;
    let pairing = build_pairing(&residual, k, ignored)?;
    let phase2 = encode_phase2(&pairing, data);
    Ok(TransmissionPlan { k_workers: k, phase1, phase2, ignored_worker: ignored })
}

/// Edge multiplicities per `(src, dst)`.
pub fn residual_counts(edges: &[LeftoverEdge], k_workers: usize) -> CountMatrix {
    let mut m = CountMatrix::zeros(k_workers);
    for e in edges {
        m.set(e.src, e.dst, m.get(e.src, e.dst) + 1);
    }
    m
}
