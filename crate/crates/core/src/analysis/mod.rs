//! Shuffle statistics and communication-rate bounds.
//!
//! For a [`ShufflePair`] the shuffle matrix counts `S[i][j] = |A_i^t ∩ A_j^{t+1}|`.
//! Pairwise cancellation leaves the leftover matrix
//! `Ω[i][j] = S[i][j] - min(S[i][j], S[j][i])`. From these:
//!
//! * uncoded rate: sum of off-diagonal `S`;
//! * achievable rate: `Σ_{i<j} max(S[i][j], S[j][i]) - max_k Σ_j Ω[k][j]`;
//! * lower bound: `max_σ Σ_{i<j} S[σ_i][σ_j]`, a linear ordering problem
//!   solved exactly for small `K` (see [`ordering`]).

pub mod ordering;

use std::fmt;

use crate::error::Result;
use crate::model::ShufflePair;

pub use ordering::{rate_lower_bound, rate_lower_bound_with_limit, LowerBound, LowerBoundMode, DEFAULT_EXACT_K_LIMIT};

/// Square `K x K` matrix of counts, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    k: usize,
    cells: Vec<u64>,
}

impl CountMatrix {
    pub fn zeros(k: usize) -> Self {
        CountMatrix { k, cells: vec![0; k * k] }
    }

    /// Panics unless `rows` is square.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let k = rows.len();
        assert!(rows.iter().all(|r| r.len() == k), "matrix must be square");
        CountMatrix { k, cells: rows.concat() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.cells[i * self.k + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.cells[i * self.k + j] = v;
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.cells[i * self.k..(i + 1) * self.k].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.k).map(|i| self.get(i, j)).sum()
    }

    /// Off-diagonal row sum: what worker `i` sends out.
    pub fn out_flow(&self, i: usize) -> u64 {
        self.row_sum(i) - self.get(i, i)
    }

    /// Off-diagonal column sum: what worker `i` takes in.
    pub fn in_flow(&self, i: usize) -> u64 {
        self.col_sum(i) - self.get(i, i)
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.cells.chunks(self.k.max(1)).map(<[u64]>::to_vec).collect()
    }
}

/// Rendered with 1-based worker labels, one row per line.
impl fmt::Display for CountMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.cells.iter().map(|v| v.to_string().len()).max().unwrap_or(1).max(2);
        write!(f, "{:>4}", "")?;
        for j in 0..self.k {
            write!(f, " {:>width$}", format!("w{}", j + 1))?;
        }
        writeln!(f)?;
        for i in 0..self.k {
            write!(f, "{:>4}", format!("w{}", i + 1))?;
            for j in 0..self.k {
                write!(f, " {:>width$}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShuffleMatrix {
    pub s: CountMatrix,
    pub n_over_k: u64,
}

impl ShuffleMatrix {
    /// Wraps raw counts without checking them; see [`verify_conservation`].
    pub fn from_rows(rows: &[Vec<u64>], n_over_k: u64) -> Self {
        ShuffleMatrix { s: CountMatrix::from_rows(rows), n_over_k }
    }

    pub fn k(&self) -> usize {
        self.s.k()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.s.get(i, j)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftoverMatrix {
    pub omega: CountMatrix,
}

impl LeftoverMatrix {
    pub fn k(&self) -> usize {
        self.omega.k()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.omega.get(i, j)
    }

    /// Leftovers held by worker `i` for the others.
    pub fn row_total(&self, i: usize) -> u64 {
        self.omega.out_flow(i)
    }

    pub fn total(&self) -> u64 {
        (0..self.k()).map(|i| self.row_total(i)).sum()
    }
}

pub fn compute_shuffle_matrix(pair: &ShufflePair) -> ShuffleMatrix {
    let k = pair.k_workers();
    let n = pair.n_points();
    let next_owner = pair.next().owners(n);
    let mut s = CountMatrix::zeros(k);
    for (i, batch) in pair.prev().batches().iter().enumerate() {
        for id in batch {
            let j = next_owner[id.index()];
            s.set(i, j, s.get(i, j) + 1);
        }
    }
    let m = ShuffleMatrix { s, n_over_k: pair.batch_size() as u64 };
    debug_assert!(verify_conservation(&m, &compute_leftover_matrix(&m)).all_passed());
    m
}

pub fn compute_leftover_matrix(s: &ShuffleMatrix) -> LeftoverMatrix {
    let k = s.k();
    let mut omega = CountMatrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            let (a, b) = (s.get(i, j), s.get(j, i));
            omega.set(i, j, a - a.min(b));
        }
    }
    LeftoverMatrix { omega }
}

/// Every off-diagonal point sent on its own.
pub fn rate_uncoded(s: &ShuffleMatrix) -> u64 {
    (0..s.k()).map(|i| s.s.out_flow(i)).sum()
}

/// Order-2 symbols: `Σ_{i<j} min(S[i][j], S[j][i])`.
pub fn phase1_count(s: &ShuffleMatrix) -> u64 {
    pairs(s.k()).map(|(i, j)| s.get(i, j).min(s.get(j, i))).sum()
}

/// Chained leftover symbols when `ignored` is left out of the combining.
pub fn phase2_count(omega: &LeftoverMatrix, ignored: usize) -> u64 {
    omega.total() - omega.row_total(ignored)
}

/// Achievable rate and the ignored worker attaining it: the lowest-index
/// worker with the largest leftover row.
pub fn rate_theorem1(s: &ShuffleMatrix, omega: &LeftoverMatrix) -> (u64, usize) {
    let pairwise_max: u64 = pairs(s.k()).map(|(i, j)| s.get(i, j).max(s.get(j, i))).sum();
    let mut ignored = 0;
    for k in 1..omega.k() {
        if omega.row_total(k) > omega.row_total(ignored) {
            ignored = k;
        }
    }
    let best = if omega.k() == 0 { 0 } else { omega.row_total(ignored) };
    (pairwise_max - best, ignored)
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Itemized pass/fail list. Never panics, so corrupted inputs can be reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "  {:<24} {status}", c.name)?;
            } else {
                writeln!(f, "  {:<24} {status}  {}", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}

pub const CHECK_ROW_SUMS: &str = "row-sums";
pub const CHECK_COL_SUMS: &str = "column-sums";
pub const CHECK_DATA_FLOW: &str = "data-flow";
pub const CHECK_LEFTOVER_DIAGONAL: &str = "leftover-diagonal";
pub const CHECK_LEFTOVER_MIN_ZERO: &str = "leftover-min-zero";
pub const CHECK_LEFTOVER_FLOW: &str = "leftover-conservation";

fn check(name: &'static str, bad: Vec<String>) -> Check {
    Check { name, passed: bad.is_empty(), detail: bad.join("; ") }
}

/// Checks row/column sums, data-flow conservation on `S`, and the diagonal,
/// min-zero and conservation properties of `Ω`.
pub fn verify_conservation(s: &ShuffleMatrix, omega: &LeftoverMatrix) -> CheckReport {
    let k = s.k();
    let target = s.n_over_k;
    let w = |i: usize| format!("w{}", i + 1);

    let rows = (0..k)
        .filter(|&i| s.s.row_sum(i) != target)
        .map(|i| format!("{} sums to {} (want {target})", w(i), s.s.row_sum(i)))
        .collect();
    let cols = (0..k)
        .filter(|&j| s.s.col_sum(j) != target)
        .map(|j| format!("column {} sums to {} (want {target})", w(j), s.s.col_sum(j)))
        .collect();
    let flow = (0..k)
        .filter(|&i| s.s.in_flow(i) != s.s.out_flow(i))
        .map(|i| format!("{} receives {} but sends {}", w(i), s.s.in_flow(i), s.s.out_flow(i)))
        .collect();

    let ko = omega.k();
    let diag = (0..ko).filter(|&i| omega.get(i, i) != 0).map(|i| format!("Ω[{0}][{0}] = {1}", i + 1, omega.get(i, i))).collect();
    let min_zero = pairs(ko)
        .filter(|&(i, j)| omega.get(i, j).min(omega.get(j, i)) != 0)
        .map(|(i, j)| format!("Ω[{}][{}] and Ω[{}][{}] both positive", i + 1, j + 1, j + 1, i + 1))
        .collect();
    let left_flow = (0..ko)
        .filter(|&i| omega.omega.in_flow(i) != omega.omega.out_flow(i))
        .map(|i| format!("{} leftovers in {} out {}", w(i), omega.omega.in_flow(i), omega.omega.out_flow(i)))
        .collect();

    CheckReport {
        checks: vec![
            check(CHECK_ROW_SUMS, rows),
            check(CHECK_COL_SUMS, cols),
            check(CHECK_DATA_FLOW, flow),
            check(CHECK_LEFTOVER_DIAGONAL, diag),
            check(CHECK_LEFTOVER_MIN_ZERO, min_zero),
            check(CHECK_LEFTOVER_FLOW, left_flow),
        ],
    }
}

/// All rate quantities for one shuffle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateReport {
    pub uncoded: u64,
    pub phase1: u64,
    pub phase2: u64,
    pub proposed_total: u64,
    pub theorem1_bound: u64,
    pub lower_bound: u64,
    pub lower_bound_exact: bool,
    pub best_sigma: Vec<usize>,
    pub ignored_worker: usize,
}

impl RateReport {
    /// Uses the exact lower bound when `K <= exact_limit`, greedy otherwise.
    pub fn compute(s: &ShuffleMatrix, omega: &LeftoverMatrix, exact_limit: usize) -> Result<Self> {
        let (theorem1_bound, ignored_worker) = rate_theorem1(s, omega);
        let mode = if s.k() <= exact_limit { LowerBoundMode::Exact } else { LowerBoundMode::Greedy };
        let lb = rate_lower_bound_with_limit(s, mode, exact_limit)?;
        let phase1 = phase1_count(s);
        let phase2 = phase2_count(omega, ignored_worker);
        Ok(RateReport {
            uncoded: rate_uncoded(s),
            phase1,
            phase2,
            proposed_total: phase1 + phase2,
            theorem1_bound,
            lower_bound: lb.value,
            lower_bound_exact: lb.exact,
            best_sigma: lb.sigma,
            ignored_worker,
        })
    }

    /// Distance between the achievable rate and the lower bound.
    pub fn gap(&self) -> u64 {
        self.proposed_total.saturating_sub(self.lower_bound)
    }
}
