//! Exhaustive enumeration of every class-labelled request vector.
//!
//! This is the arbiter for the closed forms: it never uses an occupancy
//! formula, only direct counting over all `N^u` vectors.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::combinatorics::{power, ExactValue};
use crate::error::{Error, Result};
use crate::occupancy::Population;
use crate::scenario::{Scenario, Scheme};
use crate::simulator::tally::{request_flags, tally_flags};
use crate::simulator::{count_backhaul, placement_for, simulate_protocol, OutcomeTally, Realization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_states: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_states: 10_000_000 }
    }
}

impl EnumerationBudget {
    pub fn new(max_states: u64) -> Self {
        Self { max_states }
    }

    /// `N^u`, or an error when it exceeds the budget.
    pub fn admit(&self, pop: &Population) -> Result<u64> {
        let states = (pop.n_bins as u128).checked_pow(pop.total()).unwrap_or(u128::MAX);
        if states > self.max_states as u128 {
            return Err(Error::BudgetExceeded { states, budget: self.max_states });
        }
        Ok(states as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statistic {
    J,
    Y,
    KB,
    KW,
    K1,
    K2,
    Z,
}

impl Statistic {
    pub const ALL: [Statistic; 7] =
        [Statistic::J, Statistic::Y, Statistic::KB, Statistic::KW, Statistic::K1, Statistic::K2, Statistic::Z];

    pub fn of(&self, t: &OutcomeTally) -> u32 {
        match self {
            Statistic::J => t.j,
            Statistic::Y => t.y,
            Statistic::KB => t.k_b,
            Statistic::KW => t.k_w,
            Statistic::K1 => t.k_1,
            Statistic::K2 => t.k_2,
            Statistic::Z => t.z,
        }
    }
}

/// Advance a mixed-radix counter over the request files; false on wrap.
fn advance(realization: &mut Realization, skip_first: bool, n: u32) -> bool {
    let start = skip_first as usize;
    let requests = realization.requests_mut();
    for req in requests[start..].iter_mut().rev() {
        req.file += 1;
        if req.file < n {
            return true;
        }
        req.file = 0;
    }
    false
}

/// Visit every request vector whose first file is `lead` (or every vector
/// when there are no users).
fn for_each_vector(pop: &Population, lead: u32, mut visit: impl FnMut(&Realization)) {
    let mut realization = Realization::blank(pop);
    let has_users = !realization.requests().is_empty();
    if has_users {
        realization.requests_mut()[0].file = lead;
    }
    loop {
        visit(&realization);
        if !advance(&mut realization, has_users, pop.n_bins) {
            break;
        }
    }
}

fn leads(pop: &Population) -> Vec<u32> {
    if pop.total() == 0 {
        vec![0]
    } else {
        (0..pop.n_bins).collect()
    }
}

/// Call `visit` on every request vector of the population, in mixed-radix
/// order with the last request varying fastest.
pub fn for_each_request_vector(
    pop: &Population,
    budget: EnumerationBudget,
    mut visit: impl FnMut(&Realization),
) -> Result<()> {
    budget.admit(pop)?;
    for lead in leads(pop) {
        for_each_vector(pop, lead, &mut visit);
    }
    Ok(())
}

/// Number of request vectors producing each tally, uniform requests.
pub fn tally_counts(pop: &Population, budget: EnumerationBudget) -> Result<BTreeMap<OutcomeTally, u64>> {
    budget.admit(pop)?;
    let parts: Vec<BTreeMap<OutcomeTally, u64>> = leads(pop)
        .into_par_iter()
        .map(|lead| {
            let mut hist = BTreeMap::new();
            let mut flags = Vec::new();
            for_each_vector(pop, lead, |r| {
                request_flags(r, &mut flags);
                *hist.entry(tally_flags(&flags)).or_insert(0) += 1;
            });
            hist
        })
        .collect();
    let mut hist = BTreeMap::new();
    for part in parts {
        for (t, c) in part {
            *hist.entry(t).or_insert(0) += c;
        }
    }
    Ok(hist)
}

/// Per-file request probabilities as exact rationals over a common
/// denominator: `(numerators, denominator)`.
fn exact_popularity(scenario: &Scenario) -> Result<(Vec<BigUint>, BigUint)> {
    let n = scenario.n_files();
    if scenario.popularity().is_uniform() {
        return Ok((vec![BigUint::one(); n as usize], BigUint::from(n)));
    }
    // Each f64 is a dyadic rational; rescale to a shared power of two and
    // renormalise by the exact sum.
    let pmf = scenario.popularity().pmf(n);
    let values: Vec<ExactValue> = pmf
        .iter()
        .map(|&p| ExactValue::from_f64(p).ok_or_else(|| Error::Domain(format!("non-finite probability {p}"))))
        .collect::<Result<_>>()?;
    let denom =
        values.iter().map(|v| v.denom().clone()).fold(BigInt::one(), |acc, d| num_integer::Integer::lcm(&acc, &d));
    let numers: Vec<BigUint> = values
        .iter()
        .map(|v| (v.numer() * (&denom / v.denom())).to_biguint().expect("non-negative probability"))
        .collect();
    let total: BigUint = numers.iter().sum();
    Ok((numers, total))
}

fn vector_weight(r: &Realization, numers: &[BigUint]) -> BigUint {
    r.requests().iter().fold(BigUint::one(), |acc, q| acc * &numers[q.file as usize])
}

/// Exact distribution of the tally under the scenario's popularity.
pub fn tally_distribution(
    scenario: &Scenario,
    budget: EnumerationBudget,
) -> Result<BTreeMap<OutcomeTally, ExactValue>> {
    let pop = scenario.population();
    if scenario.popularity().is_uniform() {
        let denom = power(pop.n_bins, pop.total());
        return Ok(tally_counts(pop, budget)?
            .into_iter()
            .map(|(t, c)| (t, ExactValue::fraction(BigUint::from(c), denom.clone())))
            .collect());
    }
    budget.admit(pop)?;
    let (numers, total) = exact_popularity(scenario)?;
    let denom = num_traits::Pow::pow(total, pop.total());
    let mut hist: BTreeMap<OutcomeTally, BigUint> = BTreeMap::new();
    let mut flags = Vec::new();
    for lead in leads(pop) {
        for_each_vector(pop, lead, |r| {
            request_flags(r, &mut flags);
            *hist.entry(tally_flags(&flags)).or_default() += vector_weight(r, &numers);
        });
    }
    Ok(hist.into_iter().map(|(t, w)| (t, ExactValue::fraction(w, denom.clone()))).collect())
}

/// Expected load from a precomputed uniform tally distribution.
pub fn expected_load_from_distribution(
    dist: &BTreeMap<OutcomeTally, ExactValue>,
    scenario: &Scenario,
    scheme: Scheme,
) -> Result<ExactValue> {
    let mut acc = ExactValue::zero();
    for (t, p) in dist {
        let c = count_backhaul(t, scenario, scheme)?;
        if c > 0 {
            acc += ExactValue::from_integer(c as i64) * p;
        }
    }
    Ok(acc)
}

/// Exact expected backhaul packets by full enumeration.
///
/// Uniform requests weigh each vector `N^-u` and score it with the counting
/// identity; other popularities weigh by the exact product of request
/// probabilities and score with the packet-level protocol under the
/// popularity placement.
pub fn exact_expected_load(scenario: &Scenario, scheme: Scheme, budget: EnumerationBudget) -> Result<ExactValue> {
    if scenario.popularity().is_uniform() {
        let dist = tally_distribution(scenario, budget)?;
        return expected_load_from_distribution(&dist, scenario, scheme);
    }
    let pop = scenario.population();
    budget.admit(pop)?;
    let placement = placement_for(scenario, scheme)?;
    let (numers, total) = exact_popularity(scenario)?;
    let denom = num_traits::Pow::pow(total, pop.total());
    let mut acc = BigUint::zero();
    let mut failure = None;
    for lead in leads(pop) {
        for_each_vector(pop, lead, |r| match simulate_protocol(r, &placement) {
            Ok(c) if c > 0 => acc += vector_weight(r, &numers) * c,
            Ok(_) => {}
            Err(e) => failure = failure.take().or(Some(e)),
        });
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ExactValue::fraction(acc, denom))
}

/// `P(statistic = s | given)` for every reachable `s`.
pub fn exact_pmf(
    scenario: &Scenario,
    statistic: Statistic,
    given: Option<(Statistic, u32)>,
    budget: EnumerationBudget,
) -> Result<BTreeMap<u32, ExactValue>> {
    let dist = tally_distribution(scenario, budget)?;
    Ok(joint_from_distribution(&dist, &[statistic], given).into_iter().map(|(k, v)| (k[0], v)).collect())
}

/// Conditional joint pmf of several statistics. Empty when the conditioning
/// event has probability zero.
pub fn joint_from_distribution(
    dist: &BTreeMap<OutcomeTally, ExactValue>,
    statistics: &[Statistic],
    given: Option<(Statistic, u32)>,
) -> BTreeMap<Vec<u32>, ExactValue> {
    let mut joint: BTreeMap<Vec<u32>, ExactValue> = BTreeMap::new();
    let mut mass = ExactValue::zero();
    for (t, p) in dist {
        if let Some((s, v)) = given {
            if s.of(t) != v {
                continue;
            }
        }
        mass += p;
        let key: Vec<u32> = statistics.iter().map(|s| s.of(t)).collect();
        *joint.entry(key).or_default() += p;
    }
    if mass.is_zero() {
        return BTreeMap::new();
    }
    joint.into_iter().map(|(k, v)| (k, &v / &mass)).collect()
}
