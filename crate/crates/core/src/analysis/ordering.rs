//! Maximizing `Σ_{i<j} S[σ_i][σ_j]` over worker orders `σ`.
//!
//! This is the linear ordering problem. Exact mode runs a dynamic program over
//! subsets of already-placed workers, which covers every one of the `K!`
//! orders in `O(2^K K^2)` time; greedy mode does best-insertion followed by a
//! pairwise-swap local search.

use crate::error::{Error, Result};

use super::ShuffleMatrix;

pub const DEFAULT_EXACT_K_LIMIT: usize = 8;

/// Beyond this the subset table no longer fits comfortably in memory.
pub const MAX_EXACT_K: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    pub value: u64,
    /// 0-based worker order witnessing `value`.
    pub sigma: Vec<usize>,
    /// True when every order was covered.
    pub exact: bool,
}

/// Value of a worker order: everything an earlier worker holds for a later one.
pub fn ordering_value(s: &ShuffleMatrix, sigma: &[usize]) -> u64 {
    let mut total = 0;
    for (a, &u) in sigma.iter().enumerate() {
        for &v in &sigma[a + 1..] {
            total += s.get(u, v);
        }
    }
    total
}

pub fn rate_lower_bound(s: &ShuffleMatrix, mode: LowerBoundMode) -> Result<LowerBound> {
    rate_lower_bound_with_limit(s, mode, DEFAULT_EXACT_K_LIMIT)
}

pub fn rate_lower_bound_with_limit(s: &ShuffleMatrix, mode: LowerBoundMode, exact_limit: usize) -> Result<LowerBound> {
    match mode {
        LowerBoundMode::Exact => {
            let limit = exact_limit.min(MAX_EXACT_K);
            if s.k() > limit {
                return Err(Error::ExactLimit { k: s.k(), limit });
            }
            Ok(exact(s))
        }
        LowerBoundMode::Greedy => Ok(greedy(s)),
    }
}

/// `best[mask]` is the largest value obtainable from ordering the workers
/// outside `mask` after the ones inside it. Reconstruction picks the smallest
/// worker that keeps the optimum, so the witness is the lexicographically
/// smallest maximizer.
fn exact(s: &ShuffleMatrix) -> LowerBound {
    let k = s.k();
    if k == 0 {
        return LowerBound { value: 0, sigma: Vec::new(), exact: true };
    }
    let full = (1usize << k) - 1;
    // gain of placing v right after the set `mask`
    let gain = |mask: usize, v: usize| -> u64 { (0..k).filter(|u| mask & (1 << u) != 0).map(|u| s.get(u, v)).sum() };

    let mut best = vec![0u64; full + 1];
    for mask in (0..full).rev() {
        best[mask] = (0..k)
            .filter(|v| mask & (1 << v) == 0)
            .map(|v| gain(mask, v) + best[mask | (1 << v)])
            .max()
            .unwrap_or(0);
    }

    let mut sigma = Vec::with_capacity(k);
    let mut mask = 0usize;
    while mask != full {
        let v = (0..k)
            .find(|&v| mask & (1 << v) == 0 && gain(mask, v) + best[mask | (1 << v)] == best[mask])
            .expect("optimum is attained by some extension");
        sigma.push(v);
        mask |= 1 << v;
    }
    LowerBound { value: best[0], sigma, exact: true }
}

fn greedy(s: &ShuffleMatrix) -> LowerBound {
    let k = s.k();
    let mut sigma: Vec<usize> = Vec::with_capacity(k);
    for v in 0..k {
        let mut best_pos = 0;
        let mut best_val = None;
        for pos in 0..=sigma.len() {
            sigma.insert(pos, v);
            let val = ordering_value(s, &sigma);
            sigma.remove(pos);
            if best_val.is_none_or(|b| val > b) {
                best_val = Some(val);
                best_pos = pos;
            }
        }
        sigma.insert(best_pos, v);
    }

    let mut value = ordering_value(s, &sigma);
    loop {
        let mut improved = false;
        for a in 0..k {
            for b in a + 1..k {
                sigma.swap(a, b);
                let val = ordering_value(s, &sigma);
                if val > value {
                    value = val;
                    improved = true;
                } else {
                    sigma.swap(a, b);
                }
            }
        }
        if !improved {
            break;
        }
    }
    LowerBound { value, sigma, exact: false }
}
