//! Multi-epoch master/worker simulation.
//!
//! Each epoch the master draws the next assignment, broadcasts the coded plan,
//! and every simulated worker decodes from its own cache and then drops what it
//! no longer needs. Recovered payloads are compared byte-for-byte against the
//! dataset, so a run that returns `Ok` has verified every transition.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{compute_leftover_matrix, compute_shuffle_matrix, RateReport, DEFAULT_EXACT_K_LIMIT};
use crate::codec::{decode_worker, encode, update_cache, WorkerCache};
use crate::error::{Error, Result};
use crate::model::assignment::check_divisible;
use crate::model::{Assignment, Dataset, PointId, ShufflePair};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShuffleKind {
    /// Uniform random partition per epoch.
    Random,
    /// Rotate whole batches along `sigma` every epoch.
    WorstCaseCyclic,
    /// Replay the given assignments; epoch `t` uses entry `t`.
    Scripted(Vec<Assignment>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub k_workers: usize,
    pub n_points: usize,
    pub block_size_bytes: usize,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle: ShuffleKind,
    /// 0-based worker order for the cyclic shuffle; identity when absent.
    pub sigma: Option<Vec<usize>>,
    pub exact_lb_limit: usize,
}

impl SimConfig {
    pub fn new(k_workers: usize, n_points: usize, epochs: usize, seed: u64, shuffle: ShuffleKind) -> Self {
        SimConfig {
            k_workers,
            n_points,
            block_size_bytes: 64,
            epochs,
            seed,
            shuffle,
            sigma: None,
            exact_lb_limit: DEFAULT_EXACT_K_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_workers < 2 {
            return Err(Error::InvalidArgument("simulation needs K >= 2".into()));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("simulation needs at least one epoch".into()));
        }
        check_divisible(self.n_points, self.k_workers)?;
        if let Some(sigma) = &self.sigma {
            check_sigma(sigma, self.k_workers)?;
        }
        if let ShuffleKind::Scripted(script) = &self.shuffle {
            if script.len() != self.epochs + 1 {
                return Err(Error::InvalidArgument(format!(
                    "{} scripted assignments cannot drive {} epochs",
                    script.len(),
                    self.epochs
                )));
            }
            for a in script {
                if a.k_workers() != self.k_workers || a.n_points() != self.n_points {
                    return Err(Error::InvalidArgument(format!(
                        "scripted assignment has K={} N={}, expected K={} N={}",
                        a.k_workers(),
                        a.n_points(),
                        self.k_workers,
                        self.n_points
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochMetrics {
    /// Epoch being delivered (the transition `epoch-1 -> epoch`).
    pub epoch: u64,
    pub rate_points: u64,
    pub uncoded: u64,
    pub theorem1: u64,
    pub lower_bound: u64,
    pub lower_bound_exact: bool,
    pub ignored_worker: usize,
    pub decode_ok: bool,
    pub max_chain_depth: usize,
}

/// Seeded uniform partition: shuffle `0..N` and cut it into `K` runs of
/// `N/K`. The ChaCha stream is selected by `epoch`, so each `(seed, epoch)`
/// gives its own reproducible draw.
pub fn random_assignment(n_points: usize, k_workers: usize, seed: u64, epoch: u64) -> Result<Assignment> {
    check_divisible(n_points, k_workers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch);
    let mut ids: Vec<PointId> = (0..n_points as u32).map(PointId).collect();
    ids.shuffle(&mut rng);
    let batches = ids.chunks(n_points / k_workers).map(<[PointId]>::to_vec).collect();
    Ok(Assignment::new(epoch, batches))
}

fn check_sigma(sigma: &[usize], k_workers: usize) -> Result<()> {
    let mut seen = vec![false; k_workers];
    let ok = sigma.len() == k_workers
        && sigma.iter().all(|&w| w < k_workers && !std::mem::replace(&mut seen[w], true));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sigma {sigma:?} is not a permutation of {k_workers} workers")))
    }
}

/// Worker `σ_{i+1}` receives the whole batch of `σ_i`, and `σ_1` receives
/// the batch of `σ_K`.
pub fn worst_case_next(prev: &Assignment, sigma: &[usize]) -> Result<Assignment> {
    let k = prev.k_workers();
    check_sigma(sigma, k)?;
    let mut batches = vec![Vec::new(); k];
    for (i, &from) in sigma.iter().enumerate() {
        let to = sigma[(i + 1) % k];
        batches[to] = prev.batch(from).to_vec();
    }
    Ok(Assignment::new(prev.epoch() + 1, batches))
}

/// Cyclic worst-case shuffle starting from the contiguous assignment.
pub fn worst_case_pair(n_points: usize, k_workers: usize, sigma: &[usize]) -> Result<ShufflePair> {
    let prev = Assignment::contiguous(n_points, k_workers, 0)?;
    let next = worst_case_next(&prev, sigma)?;
    ShufflePair::new(prev, next)
}

pub fn run_simulation(cfg: &SimConfig, data: &Dataset) -> Result<Vec<EpochMetrics>> {
    cfg.validate()?;
    if data.n_points() != cfg.n_points {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} points, config expects {}",
            data.n_points(),
            cfg.n_points
        )));
    }
    let (k, n) = (cfg.k_workers, cfg.n_points);
    let sigma: Vec<usize> = cfg.sigma.clone().unwrap_or_else(|| (0..k).collect());

    let mut current = match &cfg.shuffle {
        ShuffleKind::Random => random_assignment(n, k, cfg.seed, 0)?,
        ShuffleKind::WorstCaseCyclic => Assignment::contiguous(n, k, 0)?,
        ShuffleKind::Scripted(script) => script[0].clone().with_epoch(0),
    };
    current.validate(n).into_result()?;
    let mut caches: Vec<WorkerCache> = (0..k).map(|w| WorkerCache::from_dataset(data, &current, w)).collect();

    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs as u64 {
        let next = match &cfg.shuffle {
            ShuffleKind::Random => random_assignment(n, k, cfg.seed, epoch)?,
            ShuffleKind::WorstCaseCyclic => worst_case_next(&current, &sigma)?,
            ShuffleKind::Scripted(script) => script[epoch as usize].clone().with_epoch(epoch),
        };
        let pair = ShufflePair::new(current, next)?;
        let s = compute_shuffle_matrix(&pair);
        let omega = compute_leftover_matrix(&s);
        let report = RateReport::compute(&s, &omega, cfg.exact_lb_limit)?;
        let plan = encode(&pair, data)?;
        let rate = plan.rate_points() as u64;

        if rate != report.theorem1_bound {
            return Err(Error::Verification(format!(
                "epoch {epoch}: plan has {rate} symbols, formula gives {}",
                report.theorem1_bound
            )));
        }
        if !(report.lower_bound <= rate && rate <= report.uncoded) {
            return Err(Error::Verification(format!(
                "epoch {epoch}: rate {rate} outside [{}, {}]",
                report.lower_bound, report.uncoded
            )));
        }
        if cfg.shuffle == ShuffleKind::WorstCaseCyclic {
            let expected = ((k - 1) * n / k) as u64;
            if rate != expected {
                return Err(Error::Verification(format!("epoch {epoch}: worst-case rate {rate} != {expected}")));
            }
        }

        let mut max_chain_depth = 0;
        for cache in &mut caches {
            let decoded = decode_worker(&plan, cache.worker, cache, &pair)?;
            if let Some((id, _)) = decoded.recovered.iter().find(|(id, block)| data.block(**id) != block.as_slice()) {
                return Err(Error::Verification(format!(
                    "epoch {epoch}: w{} recovered wrong bytes for point {id}",
                    cache.worker + 1
                )));
            }
            max_chain_depth = max_chain_depth.max(decoded.max_depth());
            *cache = update_cache(cache, &decoded, &pair)?;
        }

        metrics.push(EpochMetrics {
            epoch,
            rate_points: rate,
            uncoded: report.uncoded,
            theorem1: report.theorem1_bound,
            lower_bound: report.lower_bound,
            lower_bound_exact: report.lower_bound_exact,
            ignored_worker: report.ignored_worker,
            decode_ok: true,
            max_chain_depth,
        });
        current = pair.next().clone();
    }
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_assignment_is_deterministic_and_valid() {
        let a = random_assignment(15, 3, 42, 0).unwrap();
        assert_eq!(a, random_assignment(15, 3, 42, 0).unwrap());
        let b = random_assignment(15, 3, 42, 1).unwrap();
        assert!(a.validate(15).is_ok());
        assert!(b.validate(15).is_ok());
        assert_ne!(a.batches(), b.batches());
        assert!(random_assignment(15, 4, 42, 0).is_err());
    }

    #[test]
    fn two_worker_cycle_swaps_batches() {
        let pair = worst_case_pair(4, 2, &[0, 1]).unwrap();
        assert_eq!(pair.next().batch(0), pair.prev().batch(1));
        assert_eq!(pair.next().batch(1), pair.prev().batch(0));
    }

    #[test]
    fn bad_sigma_rejected() {
        assert!(worst_case_pair(6, 3, &[0, 0, 1]).is_err());
        assert!(worst_case_pair(6, 3, &[0, 1]).is_err());
        assert!(worst_case_pair(6, 3, &[0, 1, 3]).is_err());
    }

    #[test]
    fn config_validation() {
        let data = Dataset::generate(6, 8, 0).unwrap();
        let bad = [
            SimConfig::new(1, 6, 1, 0, ShuffleKind::Random),
            SimConfig::new(4, 6, 1, 0, ShuffleKind::Random),
            SimConfig::new(3, 6, 0, 0, ShuffleKind::Random),
            SimConfig::new(3, 6, 2, 0, ShuffleKind::Scripted(vec![Assignment::contiguous(6, 3, 0).unwrap()])),
        ];
        for cfg in bad {
            assert!(matches!(run_simulation(&cfg, &data), Err(Error::InvalidArgument(_))), "{cfg:?}");
        }
    }
}
