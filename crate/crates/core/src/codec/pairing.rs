use std::collections::HashSet;

use crate::error::{Error, Result};

use super::encoder::LeftoverEdge;

/// Per-worker bijection from incoming to outgoing leftover edges, for every
/// worker except the ignored one.
///
/// Read as a successor function on edges (`i -> j` continues with the edge
/// `j -> l` it is matched with at `w_j`), the table decomposes the leftover
/// multigraph into trails. Out-edges of the ignored worker are nobody's
/// successor and the ignored worker has no successors to give, so every trail
/// that starts at one of its out-edges ends at one of its in-edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingTable {
    k_workers: usize,
    ignored: usize,
    edges: Vec<LeftoverEdge>,
    /// `(incoming, outgoing)` edge indices matched at each worker.
    matches: Vec<Vec<(usize, usize)>>,
    successor: Vec<Option<usize>>,
}

/// Matches at each non-ignored worker after sorting incoming edges by
/// `(src, point)` and outgoing edges by `(dst, point)`.
pub fn build_pairing(edges: &[LeftoverEdge], k_workers: usize, ignored: usize) -> Result<PairingTable> {
    if ignored >= k_workers {
        return Err(Error::InvalidArgument(format!("ignored worker {} out of range for K={k_workers}", ignored + 1)));
    }
    let mut seen = HashSet::with_capacity(edges.len());
    for e in edges {
        if e.src >= k_workers || e.dst >= k_workers || e.src == e.dst {
            return Err(Error::Structural(format!("malformed leftover edge {e:?}")));
        }
        if !seen.insert(e.point) {
            return Err(Error::Structural(format!("point {} appears on two leftover edges", e.point)));
        }
    }

    let mut incoming = vec![Vec::new(); k_workers];
    let mut outgoing = vec![Vec::new(); k_workers];
    for (idx, e) in edges.iter().enumerate() {
        incoming[e.dst].push(idx);
        outgoing[e.src].push(idx);
    }
    for w in 0..k_workers {
        if incoming[w].len() != outgoing[w].len() {
            return Err(Error::Structural(format!(
                "leftovers unbalanced at w{}: {} incoming, {} outgoing",
                w + 1,
                incoming[w].len(),
                outgoing[w].len()
            )));
        }
    }

    let mut matches = vec![Vec::new(); k_workers];
    let mut successor = vec![None; edges.len()];
    for w in (0..k_workers).filter(|&w| w != ignored) {
        let mut ins = std::mem::take(&mut incoming[w]);
        let mut outs = std::mem::take(&mut outgoing[w]);
        ins.sort_by_key(|&i| (edges[i].src, edges[i].point));
        outs.sort_by_key(|&i| (edges[i].dst, edges[i].point));
        for (a, b) in ins.into_iter().zip(outs) {
            successor[a] = Some(b);
            matches[w].push((a, b));
        }
    }

    Ok(PairingTable { k_workers, ignored, edges: edges.to_vec(), matches, successor })
}

impl PairingTable {
    pub fn k_workers(&self) -> usize {
        self.k_workers
    }

    pub fn ignored(&self) -> usize {
        self.ignored
    }

    pub fn edges(&self) -> &[LeftoverEdge] {
        &self.edges
    }

    /// Number of matches, i.e. Phase 2 symbols.
    pub fn len(&self) -> usize {
        self.matches.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matches_at(&self, worker: usize) -> impl Iterator<Item = (&LeftoverEdge, &LeftoverEdge)> + '_ {
        self.matches[worker].iter().map(|&(a, b)| (&self.edges[a], &self.edges[b]))
    }

    pub fn successor(&self, edge: &LeftoverEdge) -> Option<&LeftoverEdge> {
        let idx = self.edges.iter().position(|e| e == edge)?;
        self.successor[idx].map(|s| &self.edges[s])
    }

    /// Trails of the ignored worker, one per out-edge in edge order, each
    /// followed through successor links until it reaches an edge into the
    /// ignored worker.
    pub fn trails(&self) -> Result<Vec<Vec<LeftoverEdge>>> {
        let mut trails = Vec::new();
        for (start, e) in self.edges.iter().enumerate().filter(|(_, e)| e.src == self.ignored) {
            let mut trail = vec![*e];
            let mut cur = start;
            while self.edges[cur].dst != self.ignored {
                cur = self.successor[cur].ok_or_else(|| {
                    Error::Structural(format!("trail from point {} stops at an unmatched edge", e.point))
                })?;
                trail.push(self.edges[cur]);
                if trail.len() > self.edges.len() {
                    return Err(Error::Structural(format!("trail from point {} does not terminate", e.point)));
                }
            }
            trails.push(trail);
        }
        Ok(trails)
    }
}
