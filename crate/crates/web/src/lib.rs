//! Browser demo: three operations exported to JavaScript, each returning a
//! JSON string for the static page in `www/`.
//!
//! * `analyze_shuffle`: shuffle/leftover matrices, conservation checks, rates.
//! * `encode_shuffle`: the transmission plan, the ignored worker's chains and
//!   per-worker decode depths.
//! * `simulate_rates`: per-epoch rates over a multi-epoch run.
//!
//! Workers are 1-based in every JSON field.

use coded_shuffle::analysis::{compute_leftover_matrix, compute_shuffle_matrix, verify_conservation, RateReport};
use coded_shuffle::codec::{build_pairing, decode_worker, encode_phase1, encode_with_ignored, WorkerCache};
use coded_shuffle::sim::{random_assignment, run_simulation, worst_case_pair, ShuffleKind, SimConfig};
use coded_shuffle::{Assignment, Dataset, PointId, ShufflePair, SymbolKind};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const BLOCK_SIZE: usize = 16;
/// Exact lower bound up to this many workers in the demo.
const EXACT_LIMIT: usize = 10;
const MAX_WORKERS: usize = 16;
const MAX_POINTS: usize = 4096;

fn example1() -> ShufflePair {
    let ids = |v: &[u32]| v.iter().map(|&i| PointId(i)).collect::<Vec<_>>();
    let prev = Assignment::contiguous(15, 3, 0).expect("15 points over 3 workers");
    let next = Assignment::new(1, vec![ids(&[0, 1, 5, 6, 10]), ids(&[2, 7, 11, 12, 13]), ids(&[3, 4, 8, 9, 14])]);
    ShufflePair::new(prev, next).expect("valid example")
}

fn check_size(k: usize, n: usize) -> Result<(), String> {
    if !(2..=MAX_WORKERS).contains(&k) || n > MAX_POINTS {
        return Err(format!("demo supports 2 <= K <= {MAX_WORKERS} and N <= {MAX_POINTS}"));
    }
    Ok(())
}

/// `shuffle` is `random`, `worst-case` or `example` (fixed K=3, N=15).
pub fn make_pair(k: usize, n: usize, seed: u64, shuffle: &str) -> Result<ShufflePair, String> {
    match shuffle {
        "example" => Ok(example1()),
        "random" => {
            check_size(k, n)?;
            let prev = random_assignment(n, k, seed, 0).map_err(|e| e.to_string())?;
            let next = random_assignment(n, k, seed, 1).map_err(|e| e.to_string())?;
            ShufflePair::new(prev, next).map_err(|e| e.to_string())
        }
        "worst-case" => {
            check_size(k, n)?;
            worst_case_pair(n, k, &(0..k).collect::<Vec<_>>()).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown shuffle `{other}`")),
    }
}

fn batches(a: &Assignment) -> Value {
    json!(a.batches().iter().map(|b| b.iter().map(|id| id.0).collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn analyze_json(k: usize, n: usize, seed: u64, shuffle: &str) -> Result<Value, String> {
    let pair = make_pair(k, n, seed, shuffle)?;
    let s = compute_shuffle_matrix(&pair);
    let omega = compute_leftover_matrix(&s);
    let checks = verify_conservation(&s, &omega);
    let r = RateReport::compute(&s, &omega, EXACT_LIMIT).map_err(|e| e.to_string())?;
    Ok(json!({
        "k": pair.k_workers(),
        "n": pair.n_points(),
        "prev": batches(pair.prev()),
        "next": batches(pair.next()),
        "shuffle_matrix": s.s.rows(),
        "leftover_matrix": omega.omega.rows(),
        "checks": checks.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
        "rates": {
            "uncoded": r.uncoded,
            "phase1": r.phase1,
            "phase2": r.phase2,
            "achievable": r.proposed_total,
            "lower_bound": r.lower_bound,
            "lower_bound_exact": r.lower_bound_exact,
            "worst_case": (pair.k_workers() - 1) * pair.n_points() / pair.k_workers(),
        },
        "ignored_worker": r.ignored_worker + 1,
        "sigma": r.best_sigma.iter().map(|w| w + 1).collect::<Vec<_>>(),
    }))
}

/// `ignored` is 1-based; 0 picks the rate-minimizing worker.
pub fn encode_json(k: usize, n: usize, seed: u64, shuffle: &str, ignored: usize) -> Result<Value, String> {
    let pair = make_pair(k, n, seed, shuffle)?;
    let data = Dataset::generate(pair.n_points(), BLOCK_SIZE, seed).map_err(|e| e.to_string())?;
    let ignored = if ignored == 0 {
        let s = compute_shuffle_matrix(&pair);
        coded_shuffle::analysis::rate_theorem1(&s, &compute_leftover_matrix(&s)).1
    } else {
        ignored - 1
    };
    let plan = encode_with_ignored(&pair, &data, ignored).map_err(|e| e.to_string())?;
    let (_, residual) = encode_phase1(&pair, &data).map_err(|e| e.to_string())?;
    let trails = build_pairing(&residual, pair.k_workers(), ignored)
        .and_then(|t| t.trails())
        .map_err(|e| e.to_string())?;

    let symbols: Vec<Value> = plan
        .symbols()
        .map(|s| {
            let (phase, served) = match s.kind {
                SymbolKind::Order2 => (1, Value::Null),
                SymbolKind::Chain { served_worker } => (2, json!(served_worker + 1)),
            };
            json!({"phase": phase, "served": served, "a": s.components[0].0, "b": s.components[1].0})
        })
        .collect();

    let mut workers = Vec::new();
    for w in 0..pair.k_workers() {
        let cache = WorkerCache::from_dataset(&data, pair.prev(), w);
        let d = decode_worker(&plan, w, &cache, &pair).map_err(|e| e.to_string())?;
        let exact = d.recovered.iter().all(|(id, b)| data.block(*id) == b.as_slice());
        workers.push(json!({
            "worker": w + 1,
            "needed": d.recovered.len(),
            "max_depth": d.max_depth(),
            "depths": d.steps.iter().map(|(id, s)| json!([id.0, s])).collect::<Vec<_>>(),
            "byte_exact": exact,
        }));
    }

    Ok(json!({
        "k": pair.k_workers(),
        "n": pair.n_points(),
        "ignored_worker": ignored + 1,
        "rate": plan.rate_points(),
        "phase1": plan.phase1.len(),
        "phase2": plan.phase2.len(),
        "dump": plan.to_string(),
        "symbols": symbols,
        "trails": trails.iter().map(|t| t.iter().map(|e| json!({"from": e.src + 1, "to": e.dst + 1, "point": e.point.0})).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "workers": workers,
    }))
}

pub fn simulate_json(k: usize, n: usize, epochs: usize, seed: u64, shuffle: &str) -> Result<Value, String> {
    check_size(k, n)?;
    if epochs == 0 || epochs > 2000 {
        return Err("epochs must be in 1..=2000".into());
    }
    let kind = match shuffle {
        "random" => ShuffleKind::Random,
        "worst-case" => ShuffleKind::WorstCaseCyclic,
        other => return Err(format!("unknown shuffle `{other}`")),
    };
    let mut cfg = SimConfig::new(k, n, epochs, seed, kind);
    cfg.block_size_bytes = BLOCK_SIZE;
    cfg.exact_lb_limit = EXACT_LIMIT;
    let data = Dataset::generate(n, BLOCK_SIZE, seed).map_err(|e| e.to_string())?;
    let metrics = run_simulation(&cfg, &data).map_err(|e| e.to_string())?;
    let col = |f: &dyn Fn(&coded_shuffle::sim::EpochMetrics) -> u64| metrics.iter().map(f).collect::<Vec<_>>();
    Ok(json!({
        "k": k,
        "n": n,
        "worst_case": (k - 1) * n / k,
        "epoch": col(&|m| m.epoch),
        "rate": col(&|m| m.rate_points),
        "uncoded": col(&|m| m.uncoded),
        "lower_bound": col(&|m| m.lower_bound),
        "max_chain_depth": col(&|m| m.max_chain_depth as u64),
        "lower_bound_exact": metrics.iter().all(|m| m.lower_bound_exact),
    }))
}

fn to_js(v: Result<Value, String>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_shuffle(k: usize, n: usize, seed: u64, shuffle: &str) -> Result<String, JsValue> {
    to_js(analyze_json(k, n, seed, shuffle))
}

#[wasm_bindgen]
pub fn encode_shuffle(k: usize, n: usize, seed: u64, shuffle: &str, ignored: usize) -> Result<String, JsValue> {
    to_js(encode_json(k, n, seed, shuffle, ignored))
}

#[wasm_bindgen]
pub fn simulate_rates(k: usize, n: usize, epochs: usize, seed: u64, shuffle: &str) -> Result<String, JsValue> {
    to_js(simulate_json(k, n, epochs, seed, shuffle))
}
