//! Acceptance criteria. Every check is an exact integer identity; runtime
//! limits are enforced per criterion. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use coded_shuffle::analysis::{
    compute_leftover_matrix, compute_shuffle_matrix, rate_lower_bound_with_limit, rate_uncoded, verify_conservation,
    LowerBoundMode, ShuffleMatrix, CHECK_ROW_SUMS,
};
use coded_shuffle::codec::{decode_worker, encode, WorkerCache};
use coded_shuffle::sim::worst_case_pair;
use coded_shuffle::{Dataset, ShufflePair};
use common::*;

const FUZZ_INSTANCES: u64 = 1200;

/// K in 2..=8 and N/K in 1..=8, alternating uniform and skewed shuffles.
fn ensemble() -> impl Iterator<Item = (u64, ShufflePair)> {
    (0..FUZZ_INSTANCES).map(|seed| {
        let k = 2 + (seed % 7) as usize;
        let per = 1 + (seed / 7 % 8) as usize;
        (seed, fuzz_pair(k, per, seed))
    })
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn example1_reproduction() -> Result<String, String> {
    let start = Instant::now();
    let pair = example1_pair();
    let s = compute_shuffle_matrix(&pair);
    if s.s.rows() != vec![vec![2, 1, 2], vec![2, 1, 2], vec![1, 3, 1]] {
        return Err(format!("S = {:?}", s.s.rows()));
    }
    let omega = compute_leftover_matrix(&s);
    if omega.omega.rows() != vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]] {
        return Err(format!("leftover matrix = {:?}", omega.omega.rows()));
    }
    let plan = encode(&pair, &Dataset::generate(15, 64, 0).unwrap()).map_err(|e| e.to_string())?;
    let got = (rate_uncoded(&s), plan.phase1.len(), plan.phase2.len(), plan.rate_points());
    if got != (11, 4, 2, 6) {
        return Err(format!("(uncoded, phase1, phase2, total) = {got:?}"));
    }
    within(start, Duration::from_secs(1))?;
    Ok("uncoded 11, phase 1 = 4, phase 2 = 2, total 6".into())
}

fn worst_case_equality() -> Result<String, String> {
    let start = Instant::now();
    let cases = [(2usize, 4usize), (3, 15), (4, 16), (5, 10), (7, 21), (10, 100)];
    for (k, n) in cases {
        let pair = worst_case_pair(n, k, &(0..k).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let data = Dataset::generate(n, 16, k as u64).unwrap();
        let plan = encode(&pair, &data).map_err(|e| e.to_string())?;
        let s = compute_shuffle_matrix(&pair);
        let lb = rate_lower_bound_with_limit(&s, LowerBoundMode::Exact, k).map_err(|e| e.to_string())?;
        let optimum = (k - 1) * n / k;
        if plan.rate_points() != optimum || lb.value as usize != optimum || !lb.exact {
            return Err(format!("K={k} N={n}: encoded {} lower bound {} optimum {optimum}", plan.rate_points(), lb.value));
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("{} (K,N) cases at (K-1)N/K", cases.len()))
}

fn rate_formula_fuzz() -> Result<String, String> {
    let start = Instant::now();
    let mut n = 0;
    for (seed, pair) in ensemble() {
        let data = Dataset::generate(pair.n_points(), 1, seed).unwrap();
        let plan = encode(&pair, &data).map_err(|e| e.to_string())?;
        let formula = oracle_theorem1(&oracle_shuffle_matrix(&pair));
        if plan.rate_points() as u64 != formula {
            return Err(format!("seed {seed}: {} symbols vs formula {formula}", plan.rate_points()));
        }
        n += 1;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{n} shuffles, symbol count == formula on all"))
}

fn decodability_fuzz() -> Result<String, String> {
    let start = Instant::now();
    let (mut shuffles, mut decodes) = (0, 0);
    for (seed, pair) in ensemble() {
        let data = Dataset::generate(pair.n_points(), 64, seed).unwrap();
        let plan = encode(&pair, &data).map_err(|e| e.to_string())?;
        for w in 0..pair.k_workers() {
            let cache = WorkerCache::from_dataset(&data, pair.prev(), w);
            let decoded = decode_worker(&plan, w, &cache, &pair).map_err(|e| format!("seed {seed}: {e}"))?;
            if decoded.recovered.keys().copied().collect::<Vec<_>>() != pair.needed(w) {
                return Err(format!("seed {seed}: w{} recovered the wrong set", w + 1));
            }
            for (id, block) in &decoded.recovered {
                if data.block(*id) != block.as_slice() {
                    return Err(format!("seed {seed}: w{} mismatch on point {id}", w + 1));
                }
            }
            decodes += 1;
        }
        shuffles += 1;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{shuffles} shuffles, {decodes} worker decodes, 0 mismatches"))
}

fn conservation_suite() -> Result<String, String> {
    let mut n = 0;
    for (seed, pair) in ensemble() {
        let s = compute_shuffle_matrix(&pair);
        let report = verify_conservation(&s, &compute_leftover_matrix(&s));
        if !report.all_passed() {
            return Err(format!("seed {seed}:\n{report}"));
        }
        n += 1;
    }
    let mut s = compute_shuffle_matrix(&example1_pair());
    s.s.set(0, 2, s.s.get(0, 2) + 1);
    let mutated = verify_conservation(&s, &compute_leftover_matrix(&s));
    if mutated.all_passed() || mutated.get(CHECK_ROW_SUMS).is_some_and(|c| c.passed) {
        return Err("incremented entry not detected".into());
    }
    Ok(format!("{n} shuffles pass all checks; mutation caught"))
}

fn bound_ordering() -> Result<String, String> {
    let mut gaps: BTreeMap<u64, usize> = BTreeMap::new();
    for (seed, pair) in ensemble() {
        let s: ShuffleMatrix = compute_shuffle_matrix(&pair);
        let data = Dataset::generate(pair.n_points(), 1, seed).unwrap();
        let achieved = encode(&pair, &data).map_err(|e| e.to_string())?.rate_points() as u64;
        let lb = rate_lower_bound_with_limit(&s, LowerBoundMode::Exact, 8).map_err(|e| e.to_string())?;
        let uncoded = rate_uncoded(&s);
        if !(lb.value <= achieved && achieved <= uncoded) {
            return Err(format!("seed {seed}: {} <= {achieved} <= {uncoded} fails", lb.value));
        }
        *gaps.entry(achieved - lb.value).or_default() += 1;
    }
    let dist: Vec<String> = gaps.iter().map(|(g, c)| format!("{g}:{c}")).collect();
    Ok(format!("all ordered; gap distribution (gap:count) {}", dist.join(" ")))
}

fn two_worker_closed_form() -> Result<String, String> {
    let start = Instant::now();
    for seed in 0..200u64 {
        let pair = random_pair(2, 1 + (seed % 10) as usize, seed);
        let data = Dataset::generate(pair.n_points(), 8, seed).unwrap();
        let plan = encode(&pair, &data).map_err(|e| e.to_string())?;
        let s = oracle_shuffle_matrix(&pair);
        if !plan.phase2.is_empty() || plan.rate_points() as u64 != s[0][1].max(s[1][0]) {
            return Err(format!("seed {seed}: rate {} vs max({}, {})", plan.rate_points(), s[0][1], s[1][0]));
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok("200 shuffles, rate == max(S12, S21), phase 2 empty".into())
}

fn simulate_determinism() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_coded-shuffle");
    let args = ["simulate", "-k", "5", "-n", "20", "-t", "50", "--seed", "17"];
    let a = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
    let b = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
    if !a.status.success() || !b.status.success() {
        return Err(format!("exit {:?} / {:?}", a.status.code(), b.status.code()));
    }
    if a.stdout != b.stdout || a.stdout.is_empty() {
        return Err("CSV output differs between runs".into());
    }
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 8] = [
        ("worked example reproduction", example1_reproduction),
        ("worst-case equality", worst_case_equality),
        ("rate-formula fuzz", rate_formula_fuzz),
        ("decodability fuzz", decodability_fuzz),
        ("conservation suite", conservation_suite),
        ("bound ordering", bound_ordering),
        ("K=2 closed form", two_worker_closed_form),
        ("simulate determinism", simulate_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
