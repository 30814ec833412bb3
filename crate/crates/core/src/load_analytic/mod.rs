//! Closed-form average backhaul loads under uniform requests with `n_F = N`.
//!
//! Per-realization counts are linear in the occupancy statistics:
//!
//! * MDS: `(N - M) J + (N - 2M)^+ K_2`
//! * ECC: `(N - M)(Y + K_W) - omega_1 Z + (N - 2M)^+ K_2`
//!
//! so the expected loads are assembled from the first moments of `J`, `K_2`,
//! `Y`, `K_W` and `Z`, each summed exactly against the conditional pmfs in
//! [`crate::occupancy`]. The moments do not depend on `M`; [`Moments`] is
//! computed once per population and reused across a cache-size sweep.
//!
//! [`printed`] keeps a literal transcription of the two single-expression
//! forms of the loads, which differ from exhaustive enumeration; it exists
//! only so validation can report where.

pub mod printed;

use num_traits::Zero;

use crate::combinatorics::{power, Count, ExactValue};
use crate::error::{Error, Result};
use crate::occupancy::{distinct_weight, k2_weights, kw_weights, z_weights, Population};
use crate::scenario::{Scenario, Scheme};

/// Number of fragment pairs per file combined in one coded opportunity,
/// `min(M, N - M)`.
pub fn omega1(scenario: &Scenario) -> i64 {
    let m = scenario.cache_size() as i64;
    m.min(scenario.n_files() as i64 - m)
}

/// `(x)^+ = max(0, x)`.
pub(crate) fn positive_part(x: i64) -> i64 {
    x.max(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadBreakdown {
    /// Expected packets serving single-relay users.
    pub l1: ExactValue,
    /// Expected packets for files requested only by dual-relay users.
    pub l2: ExactValue,
    pub total: ExactValue,
    /// `total / N`.
    pub normalized: ExactValue,
}

impl LoadBreakdown {
    fn new(l1: ExactValue, l2: ExactValue, n_files: u32) -> Self {
        let total = &l1 + &l2;
        let normalized = &total / &ExactValue::from_integer(n_files as i64);
        Self { l1, l2, total, normalized }
    }
}

/// First moments of the occupancy statistics for one population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moments {
    pub n_files: u32,
    pub distinct_single: ExactValue,
    pub aggregated: ExactValue,
    pub distinct_b: ExactValue,
    pub exclusive_w: ExactValue,
    pub opportunities: ExactValue,
}

fn weighted_index_sum(weights: &[Count]) -> Count {
    weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(k, w)| w * k).sum()
}

impl Moments {
    pub fn compute(pop: &Population) -> Self {
        let n = pop.n_bins;
        let alph = pop.alphabets();

        // E[J] and E[K_2], conditioning on J.
        let mut ej = Count::zero();
        let mut ek2 = Count::zero();
        for j in alph.j_values() {
            let wj = distinct_weight(j, pop.u_1(), n);
            if wj.is_zero() {
                continue;
            }
            ek2 += &wj * weighted_index_sum(&k2_weights(j, pop));
            ej += wj * j;
        }

        // E[Y], E[K_W], E[Z], conditioning on Y.
        let mut ey = Count::zero();
        let mut ekw = Count::zero();
        let mut ez = Count::zero();
        for y in alph.y_values() {
            let wy = distinct_weight(y, pop.u_b, n);
            if wy.is_zero() {
                continue;
            }
            ekw += &wy * weighted_index_sum(&kw_weights(y, pop));
            ez += &wy * weighted_index_sum(&z_weights(y, pop));
            ey += wy * y;
        }

        Self {
            n_files: n,
            distinct_single: ExactValue::fraction(ej, power(n, pop.u_1())),
            aggregated: ExactValue::fraction(ek2, power(n, pop.u_1() + pop.u_2)),
            distinct_b: ExactValue::fraction(ey, power(n, pop.u_b)),
            exclusive_w: ExactValue::fraction(ekw, power(n, pop.u_b + pop.u_w)),
            opportunities: ExactValue::fraction(ez, power(n, pop.u_b + pop.u_w)),
        }
    }

    fn l2(&self, cache_size: u32) -> ExactValue {
        let uncovered = positive_part(self.n_files as i64 - 2 * cache_size as i64);
        ExactValue::from_integer(uncovered) * &self.aggregated
    }

    pub fn mds(&self, cache_size: u32) -> LoadBreakdown {
        let missing = ExactValue::from_integer(self.n_files as i64 - cache_size as i64);
        let l1 = missing * &self.distinct_single;
        LoadBreakdown::new(l1, self.l2(cache_size), self.n_files)
    }

    pub fn ecc(&self, cache_size: u32) -> LoadBreakdown {
        let m = cache_size as i64;
        self.ecc_with_omega(cache_size, m.min(self.n_files as i64 - m))
    }

    /// ECC load with an explicit `omega_1`.
    pub fn ecc_with_omega(&self, cache_size: u32, omega: i64) -> LoadBreakdown {
        let missing = ExactValue::from_integer(self.n_files as i64 - cache_size as i64);
        let l1 =
            missing * (&self.distinct_b + &self.exclusive_w) - ExactValue::from_integer(omega) * &self.opportunities;
        LoadBreakdown::new(l1, self.l2(cache_size), self.n_files)
    }

    pub fn load(&self, scheme: Scheme, cache_size: u32) -> LoadBreakdown {
        match scheme {
            Scheme::Mds => self.mds(cache_size),
            Scheme::Ecc => self.ecc(cache_size),
        }
    }
}

fn require_closed_form(scenario: &Scenario) -> Result<()> {
    if scenario.analytic_applicable() {
        Ok(())
    } else {
        Err(Error::AnalyticUnavailable)
    }
}

/// Expected MDS backhaul packets.
pub fn mds_load(scenario: &Scenario) -> Result<LoadBreakdown> {
    require_closed_form(scenario)?;
    Ok(Moments::compute(scenario.population()).mds(scenario.cache_size()))
}

/// Expected ECC backhaul packets; a coded packet counts once.
pub fn ecc_load(scenario: &Scenario) -> Result<LoadBreakdown> {
    require_closed_form(scenario)?;
    Ok(Moments::compute(scenario.population()).ecc(scenario.cache_size()))
}

pub fn load(scenario: &Scenario, scheme: Scheme) -> Result<LoadBreakdown> {
    match scheme {
        Scheme::Mds => mds_load(scenario),
        Scheme::Ecc => ecc_load(scenario),
    }
}

pub fn normalized_load(breakdown: &LoadBreakdown, scenario: &Scenario) -> ExactValue {
    &breakdown.total / &ExactValue::from_integer(scenario.n_files() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> ExactValue {
        s.parse().unwrap()
    }

    fn example_scenario() -> Scenario {
        Scenario::uniform(2, 1, 1, 1, 0).unwrap()
    }

    #[test]
    fn omega_values() {
        assert_eq!(omega1(&Scenario::uniform(100, 50, 1, 1, 0).unwrap()), 50);
        assert_eq!(omega1(&example_scenario()), 1);
        assert_eq!(omega1(&Scenario::uniform(10, 0, 1, 1, 0).unwrap()), 0);
        assert_eq!(omega1(&Scenario::uniform(10, 7, 1, 1, 0).unwrap()), 3);
    }

    #[test]
    fn two_file_examples() {
        let s = example_scenario();
        let mds = mds_load(&s).unwrap();
        assert_eq!(mds.total, q("3/2"));
        assert_eq!(mds.normalized, q("3/4"));
        assert_eq!(normalized_load(&mds, &s), q("3/4"));
        let ecc = ecc_load(&s).unwrap();
        assert_eq!(ecc.total, ExactValue::one());
        assert_eq!(normalized_load(&ecc, &s), q("1/2"));
        assert_eq!(ecc.l2, ExactValue::zero());
    }

    #[test]
    fn full_cache_needs_nothing_from_single_relay_users() {
        let s = Scenario::uniform(4, 4, 3, 2, 0).unwrap();
        assert_eq!(mds_load(&s).unwrap().total, ExactValue::zero());
        assert_eq!(ecc_load(&s).unwrap().total, ExactValue::zero());
    }

    #[test]
    fn empty_caches_give_equal_loads() {
        for (ub, uw, u2) in [(1, 1, 1), (3, 2, 0), (0, 2, 2), (2, 0, 3)] {
            let s = Scenario::uniform(5, 0, ub, uw, u2).unwrap();
            assert_eq!(mds_load(&s).unwrap(), ecc_load(&s).unwrap());
        }
    }

    #[test]
    fn zero_normalized_load() {
        let s = Scenario::uniform(100, 100, 2, 2, 0).unwrap();
        assert_eq!(normalized_load(&mds_load(&s).unwrap(), &s), ExactValue::zero());
    }

    #[test]
    fn rejects_non_uniform_or_mismatched_fragments() {
        let pop = Population::new(4, 1, 1, 0).unwrap();
        let zipf = Scenario::new(pop, 4, 1, crate::scenario::Popularity::Zipf { alpha: 0.8 }).unwrap();
        assert!(matches!(mds_load(&zipf), Err(Error::AnalyticUnavailable)));
        let frag = Scenario::new(pop, 8, 1, crate::scenario::Popularity::Uniform).unwrap();
        assert!(matches!(ecc_load(&frag), Err(Error::AnalyticUnavailable)));
    }
}
