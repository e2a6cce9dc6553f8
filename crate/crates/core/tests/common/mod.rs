//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use coded_shuffle::analysis::ShuffleMatrix;
use coded_shuffle::codec::{LeftoverEdge, PairingTable};
use coded_shuffle::sim::random_assignment;
use coded_shuffle::{Assignment, PointId, ShufflePair};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ids(v: &[u32]) -> Vec<PointId> {
    v.iter().map(|&i| PointId(i)).collect()
}

/// Assignment pair realizing S = [[2,1,2],[2,1,2],[1,3,1]] on K=3, N=15.
pub fn example1_pair() -> ShufflePair {
    let prev = Assignment::contiguous(15, 3, 0).unwrap();
    let next = Assignment::new(1, vec![ids(&[0, 1, 5, 6, 10]), ids(&[2, 7, 11, 12, 13]), ids(&[3, 4, 8, 9, 14])]);
    ShufflePair::new(prev, next).unwrap()
}

pub const EXAMPLE1_PREV: &str = "# worked example, current epoch\nw1: 0,1,2,3,4\nw2: 5,6,7,8,9\nw3: 10,11,12,13,14\n";
pub const EXAMPLE1_NEXT: &str = "# worked example, next epoch\nw1: 0,1,5,6,10\nw2: 2,7,11,12,13\nw3: 3,4,8,9,14\n";

pub fn identity_pair(n: usize, k: usize) -> ShufflePair {
    let a = Assignment::contiguous(n, k, 0).unwrap();
    ShufflePair::new(a.clone(), a.with_epoch(1)).unwrap()
}

/// Two independent uniform partitions.
pub fn random_pair(k: usize, per: usize, seed: u64) -> ShufflePair {
    let n = k * per;
    let prev = random_assignment(n, k, seed, 0).unwrap();
    let next = random_assignment(n, k, seed, 1).unwrap();
    ShufflePair::new(prev, next).unwrap()
}

/// Batches permuted wholesale along a random worker permutation, then a
/// handful of random point swaps. Produces long leftover chains, which uniform
/// partitions rarely do.
pub fn skewed_pair(k: usize, per: usize, seed: u64) -> ShufflePair {
    let n = k * per;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let prev = random_assignment(n, k, seed, 0).unwrap();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.shuffle(&mut rng);
    let mut batches: Vec<Vec<PointId>> = vec![Vec::new(); k];
    for (from, &to) in perm.iter().enumerate() {
        batches[to] = prev.batch(from).to_vec();
    }
    for _ in 0..rng.random_range(0..=per) {
        let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
        if a == b {
            continue;
        }
        let (x, y) = (rng.random_range(0..per), rng.random_range(0..per));
        let tmp = batches[a][x];
        batches[a][x] = batches[b][y];
        batches[b][y] = tmp;
    }
    ShufflePair::new(prev, Assignment::new(1, batches)).unwrap()
}

/// Alternates between the two generators so an ensemble covers both regimes.
pub fn fuzz_pair(k: usize, per: usize, seed: u64) -> ShufflePair {
    if seed % 2 == 0 {
        random_pair(k, per, seed)
    } else {
        skewed_pair(k, per, seed)
    }
}

/// Shuffle matrix by direct set intersection.
pub fn oracle_shuffle_matrix(pair: &ShufflePair) -> Vec<Vec<u64>> {
    let k = pair.k_workers();
    let sets = |a: &Assignment| -> Vec<HashSet<PointId>> { a.batches().iter().map(|b| b.iter().copied().collect()).collect() };
    let (prev, next) = (sets(pair.prev()), sets(pair.next()));
    (0..k).map(|i| (0..k).map(|j| prev[i].intersection(&next[j]).count() as u64).collect()).collect()
}

pub fn oracle_leftover(s: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = s.len();
    (0..k).map(|i| (0..k).map(|j| s[i][j] - s[i][j].min(s[j][i])).collect()).collect()
}

/// Pairwise-max total minus the largest off-diagonal leftover row.
pub fn oracle_theorem1(s: &[Vec<u64>]) -> u64 {
    let k = s.len();
    let omega = oracle_leftover(s);
    let pairwise: u64 = (0..k).tuple_combinations().map(|(i, j)| s[i][j].max(s[j][i])).sum();
    let best_row = (0..k).map(|i| (0..k).filter(|&j| j != i).map(|j| omega[i][j]).sum::<u64>()).max().unwrap_or(0);
    pairwise - best_row
}

/// Phase 2 length in its pairwise-max form.
pub fn oracle_phase2(omega: &[Vec<u64>], ignored: usize) -> u64 {
    let k = omega.len();
    let pairwise: u64 = (0..k).tuple_combinations().map(|(i, j)| omega[i][j].max(omega[j][i])).sum();
    pairwise - (0..k).filter(|&j| j != ignored).map(|j| omega[ignored][j]).sum::<u64>()
}

pub fn oracle_uncoded(s: &[Vec<u64>]) -> u64 {
    let k = s.len();
    (0..k).cartesian_product(0..k).filter(|(i, j)| i != j).map(|(i, j)| s[i][j]).sum()
}

/// Best value over all `K!` orders and the first maximizer in lexicographic order.
pub fn brute_force_lop(s: &ShuffleMatrix) -> (u64, Vec<usize>) {
    let k = s.k();
    let mut best: Option<(u64, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let v: u64 = (0..k).tuple_combinations().map(|(a, b)| s.get(perm[a], perm[b])).sum();
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, perm));
        }
    }
    best.unwrap_or((0, Vec::new()))
}

/// Walks successor links from every out-edge of the ignored worker. Checks that
/// each trail ends at an in-edge of the ignored worker, has at least two edges,
/// and that no edge is visited twice. Returns the trail lengths.
pub fn walk_trails(table: &PairingTable) -> Result<Vec<usize>, String> {
    let k = table.ignored();
    let mut next_of: HashMap<LeftoverEdge, LeftoverEdge> = HashMap::new();
    for w in 0..table.k_workers() {
        for (a, b) in table.matches_at(w) {
            if a.dst != w || b.src != w {
                return Err(format!("match at w{w} joins {a:?} and {b:?}"));
            }
            if next_of.insert(*a, *b).is_some() {
                return Err(format!("{a:?} matched twice"));
            }
        }
    }
    let mut visited = HashSet::new();
    let mut lengths = Vec::new();
    for start in table.edges().iter().filter(|e| e.src == k) {
        let mut cur = *start;
        let mut len = 1;
        loop {
            if !visited.insert(cur) {
                return Err(format!("edge {cur:?} visited twice"));
            }
            if cur.dst == k {
                break;
            }
            cur = *next_of.get(&cur).ok_or_else(|| format!("trail stops at {cur:?}"))?;
            len += 1;
        }
        if len < 2 {
            return Err(format!("trail from {start:?} has length {len}"));
        }
        lengths.push(len);
    }
    let ins = table.edges().iter().filter(|e| e.dst == k).count();
    if lengths.len() != ins {
        return Err(format!("{} trails for {ins} in-edges", lengths.len()));
    }
    Ok(lengths)
}
