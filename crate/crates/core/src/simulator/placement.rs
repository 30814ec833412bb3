//! Cache contents of the two relays.
//!
//! Both relays hold the same number `F_f` of fragments of file `f`. Relay B
//! always takes indices `0..F_f`.
//!
//! * MDS: indices name encoded packets of a long MDS code; relay W takes
//!   `F_f..2F_f`, so the relays never share a packet.
//! * ECC: indices name plain fragments `0..n_F`; relay W takes
//!   `(F_f + i) mod n_F` for `i < F_f`, disjoint from relay B while
//!   `2 F_f <= n_F` and overlapping on the first `2 F_f - n_F` indices after.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::scenario::{Scenario, Scheme};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementMap {
    scheme: Scheme,
    n_fragments: u32,
    per_file: Vec<u32>,
    relay_b: Vec<FixedBitSet>,
    relay_w: Vec<FixedBitSet>,
}

impl PlacementMap {
    /// Build the index sets for per-file fragment counts.
    pub fn from_counts(scheme: Scheme, n_fragments: u32, per_file: Vec<u32>) -> Result<Self> {
        if n_fragments == 0 {
            return Err(Error::NoFragments);
        }
        if let Some(&f) = per_file.iter().find(|&&f| f > n_fragments) {
            return Err(Error::PlacementMismatch(format!("{f} fragments cached of a file with {n_fragments}")));
        }
        let universe = Self::index_universe(scheme, n_fragments);
        let mut relay_b = Vec::with_capacity(per_file.len());
        let mut relay_w = Vec::with_capacity(per_file.len());
        for &f in &per_file {
            let mut b = FixedBitSet::with_capacity(universe);
            let mut w = FixedBitSet::with_capacity(universe);
            b.insert_range(0..f as usize);
            match scheme {
                Scheme::Mds => w.insert_range(f as usize..2 * f as usize),
                Scheme::Ecc => {
                    for i in 0..f {
                        w.insert(((f + i) % n_fragments) as usize);
                    }
                }
            }
            relay_b.push(b);
            relay_w.push(w);
        }
        Ok(Self { scheme, n_fragments, per_file, relay_b, relay_w })
    }

    /// Size of the index space: `n_F` fragments, or `2 n_F` code symbols for
    /// the caches of an MDS code (fresh symbols start at `2 F_f`).
    pub(crate) fn index_universe(scheme: Scheme, n_fragments: u32) -> usize {
        match scheme {
            Scheme::Mds => 2 * n_fragments as usize,
            Scheme::Ecc => n_fragments as usize,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_files(&self) -> u32 {
        self.per_file.len() as u32
    }

    pub fn n_fragments(&self) -> u32 {
        self.n_fragments
    }

    /// `F_f` for every file.
    pub fn fragments_per_file(&self) -> &[u32] {
        &self.per_file
    }

    pub fn relay_b(&self, file: u32) -> &FixedBitSet {
        &self.relay_b[file as usize]
    }

    pub fn relay_w(&self, file: u32) -> &FixedBitSet {
        &self.relay_w[file as usize]
    }

    /// Fragments stored by one relay, summed over files.
    pub fn stored_per_relay(&self) -> u64 {
        self.per_file.iter().map(|&f| f as u64).sum()
    }
}

/// Every file gets `M n_F / N` fragments at each relay.
pub fn place_uniform(scenario: &Scenario, scheme: Scheme) -> Result<PlacementMap> {
    let f = scenario.uniform_fragments_per_file()?;
    PlacementMap::from_counts(scheme, scenario.n_fragments(), vec![f; scenario.n_files() as usize])
}

/// Popularity-proportional fragment budgets.
///
/// Each relay stores `M n_F` fragments. File `f` is offered `p_f M n_F`,
/// capped at `n_F` with the excess handed to the uncapped files in
/// proportion to their mass, and the shares are rounded by largest
/// remainder (ties to the lower index). Both relays use the same budgets.
pub fn place_popularity(scenario: &Scenario, scheme: Scheme) -> Result<PlacementMap> {
    let n = scenario.n_files();
    let weights = match scenario.popularity() {
        crate::scenario::Popularity::Uniform => vec![1.0; n as usize],
        p => p.pmf(n),
    };
    let counts = allocate_budgets(&weights, scenario.fragment_budget(), scenario.n_fragments());
    PlacementMap::from_counts(scheme, scenario.n_fragments(), counts)
}

pub(crate) fn allocate_budgets(weights: &[f64], budget: u64, cap: u32) -> Vec<u32> {
    let n = weights.len();
    assert!(budget <= n as u64 * cap as u64, "budget exceeds library capacity");
    let mut counts = vec![0u32; n];
    let mut capped = vec![false; n];
    let mut remaining = budget;

    // water-filling: files whose share exceeds the cap are pinned at it
    let quotas = loop {
        let active: Vec<usize> = (0..n).filter(|&i| !capped[i]).collect();
        if active.is_empty() {
            break Vec::new();
        }
        let mass: f64 = active.iter().map(|&i| weights[i]).sum();
        let quotas: Vec<(usize, f64)> = if mass > 0.0 {
            active.iter().map(|&i| (i, remaining as f64 * weights[i] / mass)).collect()
        } else {
            let share = remaining as f64 / active.len() as f64;
            active.iter().map(|&i| (i, share)).collect()
        };
        let over: Vec<usize> = quotas.iter().filter(|(_, q)| *q > cap as f64).map(|&(i, _)| i).collect();
        if over.is_empty() {
            break quotas;
        }
        for i in over {
            capped[i] = true;
            counts[i] = cap;
            remaining -= cap as u64;
        }
    };

    let mut assigned = 0u64;
    let mut remainders = Vec::with_capacity(quotas.len());
    for &(i, q) in &quotas {
        let floor = (q.floor() as u64).min(cap as u64) as u32;
        counts[i] = floor;
        assigned += floor as u64;
        remainders.push((i, q - floor as f64));
    }
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut left = remaining.saturating_sub(assigned);
    for &(i, _) in remainders.iter().cycle() {
        if left == 0 {
            break;
        }
        if counts[i] < cap {
            counts[i] += 1;
            left -= 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupancy::Population;
    use crate::scenario::Popularity;

    #[test]
    fn two_file_placement() {
        let s = Scenario::uniform(2, 1, 1, 1, 0).unwrap();
        let p = place_uniform(&s, Scheme::Ecc).unwrap();
        for f in 0..2 {
            assert_eq!(p.relay_b(f).ones().collect::<Vec<_>>(), vec![0]);
            assert_eq!(p.relay_w(f).ones().collect::<Vec<_>>(), vec![1]);
        }
    }

    #[test]
    fn empty_caches() {
        let s = Scenario::uniform(4, 0, 1, 1, 0).unwrap();
        let p = place_uniform(&s, Scheme::Ecc).unwrap();
        assert_eq!(p.stored_per_relay(), 0);
        assert!((0..4).all(|f| p.relay_b(f).is_clear() && p.relay_w(f).is_clear()));
    }

    #[test]
    fn full_caches_wrap() {
        let s = Scenario::uniform(4, 4, 1, 1, 0).unwrap();
        let p = place_uniform(&s, Scheme::Ecc).unwrap();
        assert_eq!(p.relay_b(0).count_ones(..), 4);
        assert_eq!(p.relay_w(0).count_ones(..), 4);
        let s = Scenario::uniform(4, 3, 1, 1, 0).unwrap();
        let p = place_uniform(&s, Scheme::Ecc).unwrap();
        assert_eq!(p.relay_w(0).ones().collect::<Vec<_>>(), vec![0, 1, 3]);
        let mds = place_uniform(&s, Scheme::Mds).unwrap();
        assert_eq!(mds.relay_w(0).ones().collect::<Vec<_>>(), vec![3, 4, 5]);
        assert!(mds.relay_b(0).is_disjoint(mds.relay_w(0)));
    }

    #[test]
    fn disjoint_while_half_or_less() {
        for m in 0..=5 {
            let s = Scenario::uniform(10, m, 1, 1, 0).unwrap();
            let p = place_uniform(&s, Scheme::Ecc).unwrap();
            assert!((0..10).all(|f| p.relay_b(f).is_disjoint(p.relay_w(f))));
        }
    }

    #[test]
    fn popularity_with_uniform_masses_matches_uniform() {
        for m in 0..=6 {
            let s = Scenario::uniform(6, m, 1, 1, 0).unwrap();
            assert_eq!(place_popularity(&s, Scheme::Ecc).unwrap(), place_uniform(&s, Scheme::Ecc).unwrap());
        }
    }

    #[test]
    fn zipf_budgets_sum_exactly() {
        let pop = Population::new(100, 40, 40, 20).unwrap();
        for m in [0, 10, 50, 90, 100] {
            let s = Scenario::new(pop, 100, m, Popularity::Zipf { alpha: 0.8 }).unwrap();
            let p = place_popularity(&s, Scheme::Ecc).unwrap();
            assert_eq!(p.stored_per_relay(), m as u64 * 100);
            assert!(p.fragments_per_file().iter().all(|&f| f <= 100));
            assert!(p.fragments_per_file().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn point_mass_popularity() {
        let weights = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(allocate_budgets(&weights, 3, 4), vec![3, 0, 0, 0]);
        assert_eq!(allocate_budgets(&weights, 6, 4), vec![4, 1, 1, 0]);
        let pop = Population::new(5, 1, 1, 0).unwrap();
        let s = Scenario::new(pop, 5, 2, Popularity::Zipf { alpha: 1e6 }).unwrap();
        let p = place_popularity(&s, Scheme::Mds).unwrap();
        assert_eq!(p.fragments_per_file()[0], 5);
        assert_eq!(p.stored_per_relay(), 10);
    }

    #[test]
    fn rejects_fractional_uniform_share() {
        let pop = Population::new(4, 1, 1, 0).unwrap();
        let s = Scenario::new(pop, 2, 1, Popularity::Uniform).unwrap();
        assert!(place_uniform(&s, Scheme::Ecc).is_err());
        // popularity placement spreads the odd fragments instead
        let p = place_popularity(&s, Scheme::Ecc).unwrap();
        assert_eq!(p.fragments_per_file(), &[1, 1, 0, 0]);
    }
}
