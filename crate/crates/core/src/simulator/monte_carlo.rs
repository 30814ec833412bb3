use rayon::prelude::*;

use super::placement::{place_popularity, place_uniform, PlacementMap};
use super::protocol::FastCounter;
use super::realization::{FileSampler, Realization};
use super::rng::trial_rng;
use super::tally::request_flags;
use crate::error::{Error, Result};
use crate::scenario::{Scenario, Scheme};

/// Trials per work unit. Fixed so that the split of work never depends on the
/// number of threads.
const BLOCK: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub scheme: Scheme,
    pub cache_size: u32,
    pub trials: u64,
    pub mean_load: f64,
    pub normalized_mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; `None` for one trial.
    pub std_error: Option<f64>,
    pub seed: u64,
}

/// Placement used by the simulator: uniform budgets for uniform requests,
/// popularity-proportional budgets otherwise.
pub fn placement_for(scenario: &Scenario, scheme: Scheme) -> Result<PlacementMap> {
    if scenario.popularity().is_uniform() {
        place_uniform(scenario, scheme)
    } else {
        place_popularity(scenario, scheme)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn push(&mut self, x: u64) {
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

/// Mean backhaul packets of the delivery protocol over `trials` sampled
/// realizations.
pub fn monte_carlo(scenario: &Scenario, scheme: Scheme, trials: u64, seed: u64) -> Result<LoadReport> {
    let mut reports = monte_carlo_grid(scenario, &[scenario.cache_size()], &[scheme], trials, seed)?;
    Ok(reports.remove(0))
}

/// Monte Carlo over several cache sizes and schemes on shared realizations.
///
/// Trial `t` sees the same requests for every `(M, scheme)` pair, so each
/// report equals the one [`monte_carlo`] gives for that pair alone. Reports
/// come back ordered by cache size, then scheme, as passed in.
pub fn monte_carlo_grid(
    scenario: &Scenario,
    cache_sizes: &[u32],
    schemes: &[Scheme],
    trials: u64,
    seed: u64,
) -> Result<Vec<LoadReport>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let mut counters = Vec::with_capacity(cache_sizes.len() * schemes.len());
    let mut labels = Vec::with_capacity(counters.capacity());
    for &m in cache_sizes {
        let at_m = scenario.with_cache_size(m)?;
        for &scheme in schemes {
            counters.push(FastCounter::new(&placement_for(&at_m, scheme)?));
            labels.push((m, scheme));
        }
    }
    let sampler = FileSampler::new(scenario.popularity(), scenario.n_files())?;
    let blank = Realization::blank(scenario.population());

    let blocks = trials.div_ceil(BLOCK);
    let partials: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut acc = vec![Moments::default(); counters.len()];
            let mut realization = blank.clone();
            let mut flags = Vec::new();
            let end = ((block + 1) * BLOCK).min(trials);
            for trial in block * BLOCK..end {
                let mut rng = trial_rng(seed, trial);
                sampler.refill(&mut rng, &mut realization);
                request_flags(&realization, &mut flags);
                for (slot, counter) in acc.iter_mut().zip(&counters) {
                    slot.push(counter.count_flags(&flags));
                }
            }
            acc
        })
        .collect();

    let mut totals = vec![Moments::default(); counters.len()];
    for part in &partials {
        for (t, p) in totals.iter_mut().zip(part) {
            t.merge(p);
        }
    }

    let n_files = scenario.n_files() as f64;
    Ok(labels
        .into_iter()
        .zip(totals)
        .map(|((cache_size, scheme), m)| {
            let (mean, std_error) = summarize(&m, trials);
            LoadReport { scheme, cache_size, trials, mean_load: mean, normalized_mean: mean / n_files, std_error, seed }
        })
        .collect())
}

fn summarize(m: &Moments, trials: u64) -> (f64, Option<f64>) {
    let n = trials as u128;
    let mean = m.sum as f64 / trials as f64;
    if trials < 2 {
        return (mean, None);
    }
    // exact integer numerator of the unbiased variance
    let numer = n * m.sum_sq - m.sum * m.sum;
    let var = numer as f64 / (n * (n - 1)) as f64;
    (mean, Some((var / trials as f64).sqrt()))
}
