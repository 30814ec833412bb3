//! Cross-checks between the closed forms, the enumeration oracle and the
//! packet-level protocol over built-in grids of small instances.

use std::collections::BTreeMap;
use std::fmt;

use crate::brute_force::{
    expected_load_from_distribution, for_each_request_vector, joint_from_distribution, tally_distribution,
    EnumerationBudget, Statistic,
};
use crate::combinatorics::ExactValue;
use crate::error::Result;
use crate::load_analytic::{printed, LoadBreakdown, Moments};
use crate::occupancy::{p_oc, pmf_distinct, pmf_k2_given_j, pmf_kw_given_y, pmf_z_given_y, Population};
use crate::scenario::{Scenario, Scheme};
use crate::simulator::{
    count_backhaul, place_uniform, plan_delivery, sample_realization, tally, trial_rng, FastCounter, PlacementMap,
    Realization,
};

/// Instances with `1 <= N <= max_files` and every user count in
/// `0..=max_users`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub max_files: u32,
    pub max_users: u32,
}

impl Default for Grid {
    fn default() -> Self {
        Self { max_files: 4, max_users: 3 }
    }
}

impl Grid {
    pub fn populations(&self) -> impl Iterator<Item = Population> + '_ {
        let u = self.max_users;
        (1..=self.max_files).flat_map(move |n| {
            (0..=u).flat_map(move |ub| {
                (0..=u).flat_map(move |uw| (0..=u).map(move |u2| Population::new(n, ub, uw, u2).expect("n >= 1")))
            })
        })
    }
}

fn label(pop: &Population) -> String {
    format!("N={} u_B={} u_W={} u_2={}", pop.n_bins, pop.u_b, pop.u_w, pop.u_2)
}

/// Outcome of one suite. Notes are informational and never fail a suite.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub refused: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self { name, ..Self::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(describe());
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {} checks", self.name, self.checks)?;
        if !self.failures.is_empty() {
            write!(f, ", {} failed", self.failures.len())?;
        }
        if !self.refused.is_empty() {
            write!(f, ", {} instances refused", self.refused.len())?;
        }
        writeln!(f)?;
        for line in &self.failures {
            writeln!(f, "  failure: {line}")?;
        }
        for line in &self.notes {
            writeln!(f, "  note: {line}")?;
        }
        for line in &self.refused {
            writeln!(f, "  refused: {line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub suites: Vec<SuiteReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for suite in &self.suites {
            write!(f, "{suite}")?;
        }
        let verdict = if self.passed() { "all suites passed" } else { "validation FAILED" };
        writeln!(f, "{verdict}")
    }
}

/// Uniform-request scenario with `n_F = N`.
fn closed_form_scenario(pop: &Population, cache_size: u32) -> Scenario {
    Scenario::uniform(pop.n_bins, cache_size, pop.u_b, pop.u_w, pop.u_2).expect("cache within library")
}

/// Collects printed-form mismatches, keeping the first few instances.
struct Discrepancies {
    what: &'static str,
    count: u64,
    examples: Vec<String>,
}

impl Discrepancies {
    const SHOWN: usize = 8;

    fn new(what: &'static str) -> Self {
        Self { what, count: 0, examples: Vec::new() }
    }

    fn record(&mut self, instance: String) {
        self.count += 1;
        if self.examples.len() < Self::SHOWN {
            self.examples.push(instance);
        }
    }

    fn into_notes(self, checked: u64, notes: &mut Vec<String>) {
        if self.count == 0 {
            notes.push(format!("{} agrees with enumeration on all {checked} instances", self.what));
            return;
        }
        notes.push(format!("{} differs from enumeration on {} of {checked} instances", self.what, self.count));
        for e in self.examples {
            notes.push(format!("  {e}"));
        }
    }
}

/// Closed-form loads equal the enumeration oracle exactly for both schemes.
/// The printed single-expression forms are also evaluated; where they differ
/// from the oracle the instance is noted.
pub fn oracle_suite(grid: Grid, budget: EnumerationBudget) -> SuiteReport {
    let mut report = SuiteReport::new("oracle equality");
    let mut printed_mds = Discrepancies::new("printed MDS display");
    let mut printed_ecc = Discrepancies::new("printed ECC display");
    let mut instances = 0;
    for pop in grid.populations() {
        let dist = match tally_distribution(&closed_form_scenario(&pop, 0), budget) {
            Ok(d) => d,
            Err(e) => {
                report.refused.push(format!("{}: {e}", label(&pop)));
                continue;
            }
        };
        let moments = Moments::compute(&pop);
        let n = ExactValue::from_integer(pop.n_bins as i64);
        for m in 0..=pop.n_bins {
            let s = closed_form_scenario(&pop, m);
            instances += 1;
            for scheme in Scheme::ALL {
                let analytic = moments.load(scheme, m).total;
                let oracle = expected_load_from_distribution(&dist, &s, scheme).expect("uniform placement");
                report.check(analytic == oracle, || {
                    format!("{} M={m} {scheme}: analytic {analytic}, oracle {oracle}", label(&pop))
                });
                let (printed, log) = match scheme {
                    Scheme::Mds => (printed::mds_normalized(&s), &mut printed_mds),
                    Scheme::Ecc => (printed::ecc_normalized(&s), &mut printed_ecc),
                };
                let expected = &oracle / &n;
                if printed != expected {
                    log.record(format!(
                        "{} M={m}: printed {printed}, enumeration {expected} (normalized)",
                        label(&pop)
                    ));
                }
            }
        }
    }
    printed_mds.into_notes(instances, &mut report.notes);
    printed_ecc.into_notes(instances, &mut report.notes);
    report
}

fn nonzero(map: BTreeMap<Vec<u32>, ExactValue>) -> BTreeMap<Vec<u32>, ExactValue> {
    map.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn render(map: &BTreeMap<Vec<u32>, ExactValue>) -> String {
    let parts: Vec<String> = map.iter().map(|(k, v)| format!("{k:?}: {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Each occupancy pmf sums to one over its support and equals the pmf
/// obtained by enumeration.
pub fn pmf_suite(grid: Grid, budget: EnumerationBudget) -> SuiteReport {
    let mut report = SuiteReport::new("pmf normalization and enumeration");
    for pop in grid.populations() {
        let dist = match tally_distribution(&closed_form_scenario(&pop, 0), budget) {
            Ok(d) => d,
            Err(e) => {
                report.refused.push(format!("{}: {e}", label(&pop)));
                continue;
            }
        };
        let n = pop.n_bins;
        let alph = pop.alphabets();
        let name = label(&pop);
        let mut compare = |what: String, formula: BTreeMap<Vec<u32>, ExactValue>, stats: &[Statistic], given| {
            let total: ExactValue = formula.values().sum();
            report.check(total == ExactValue::one(), || format!("{name} {what}: sums to {total}"));
            let formula = nonzero(formula);
            let enumerated = nonzero(joint_from_distribution(&dist, stats, given));
            report.check(formula == enumerated, || {
                format!("{name} {what}: formula {} vs enumeration {}", render(&formula), render(&enumerated))
            });
        };

        let single = |k: u32| vec![k];
        let j_pmf =
            alph.j_values().map(|j| (single(j), pmf_distinct(j as i64, pop.u_1(), n).expect("n >= 1"))).collect();
        compare("P(J)".into(), j_pmf, &[Statistic::J], None);
        let y_pmf = alph.y_values().map(|y| (single(y), pmf_distinct(y as i64, pop.u_b, n).expect("n >= 1"))).collect();
        compare("P(Y)".into(), y_pmf, &[Statistic::Y], None);

        for j in alph.j_values() {
            let k2 = (0..=alph.k_2_max(j))
                .map(|k| (single(k), pmf_k2_given_j(k as i64, j, &pop).expect("j in support")))
                .collect();
            compare(format!("P(K_2 | J={j})"), k2, &[Statistic::K2], Some((Statistic::J, j)));
        }
        for y in alph.y_values() {
            let kw = (0..=alph.k_w_max(y))
                .map(|k| (single(k), pmf_kw_given_y(k as i64, y, &pop).expect("y in support")))
                .collect();
            compare(format!("P(K_W | Y={y})"), kw, &[Statistic::KW], Some((Statistic::Y, y)));
            let z = (0..=alph.z_max(y))
                .map(|k| (single(k), pmf_z_given_y(k as i64, y, &pop).expect("y in support")))
                .collect();
            compare(format!("P(Z | Y={y})"), z, &[Statistic::Z], Some((Statistic::Y, y)));
            let mut joint = BTreeMap::new();
            for kb in 0..=y {
                for kw in 0..=alph.k_w_max(y) {
                    let p = p_oc(y as i64, kb as i64, kw as i64, pop.u_w, n).expect("y within library");
                    joint.insert(vec![kb, kw], p);
                }
            }
            compare(format!("P(K_B, K_W | Y={y})"), joint, &[Statistic::KB, Statistic::KW], Some((Statistic::Y, y)));
        }
    }
    report
}

/// ECC load as a function of the population moments and `M`.
pub type EccEvaluator<'a> = &'a dyn Fn(&Moments, u32) -> LoadBreakdown;

/// ECC never exceeds MDS and both are non-increasing in `M`.
pub fn dominance_suite(grid: Grid, ecc: EccEvaluator<'_>) -> SuiteReport {
    let mut report = SuiteReport::new("dominance and monotonicity");
    for pop in grid.populations() {
        let moments = Moments::compute(&pop);
        let name = label(&pop);
        let mds: Vec<ExactValue> = (0..=pop.n_bins).map(|m| moments.mds(m).total).collect();
        let coded: Vec<ExactValue> = (0..=pop.n_bins).map(|m| ecc(&moments, m).total).collect();
        for m in 0..=pop.n_bins as usize {
            report.check(coded[m] <= mds[m], || format!("{name} M={m}: ECC {} above MDS {}", coded[m], mds[m]));
            if m > 0 {
                report.check(mds[m] <= mds[m - 1], || format!("{name}: MDS rises from M={} to M={m}", m - 1));
                report.check(coded[m] <= coded[m - 1], || format!("{name}: ECC rises from M={} to M={m}", m - 1));
            }
        }
    }
    report
}

fn protocol_checks(
    report: &mut SuiteReport,
    r: &Realization,
    scenario: &Scenario,
    placements: &[(Scheme, PlacementMap)],
    counters: &mut [FastCounter],
    context: &dyn Fn() -> String,
) {
    let t = tally(r);
    let mut loads = [0u64; 2];
    for ((scheme, placement), counter) in placements.iter().zip(counters.iter_mut()) {
        let plan = plan_delivery(r, placement).expect("placement matches realization");
        let verified = plan.verify(r, placement);
        report.check(verified.is_ok(), || format!("{} {scheme}: plan does not deliver: {verified:?}", context()));
        let identity = count_backhaul(&t, scenario, *scheme).expect("whole fragments");
        let packets = plan.len() as u64;
        report
            .check(packets == identity, || format!("{} {scheme}: protocol {packets}, identity {identity}", context()));
        let fast = counter.count(r);
        report.check(fast == packets, || format!("{} {scheme}: fast counter {fast}, protocol {packets}", context()));
        loads[*scheme as usize] = packets;
    }
    report.check(loads[Scheme::Ecc as usize] <= loads[Scheme::Mds as usize], || {
        format!("{}: ECC {} above MDS {}", context(), loads[1], loads[0])
    });
}

type Placements = Vec<(Scheme, PlacementMap)>;

fn placements_for(scenario: &Scenario) -> Result<(Placements, Vec<FastCounter>)> {
    let placements: Vec<(Scheme, PlacementMap)> =
        Scheme::ALL.iter().map(|&s| place_uniform(scenario, s).map(|p| (s, p))).collect::<Result<_>>()?;
    let counters = placements.iter().map(|(_, p)| FastCounter::new(p)).collect();
    Ok((placements, counters))
}

/// The packet-level protocol delivers every request and sends exactly the
/// number of packets the counting identities give; also ECC never sends more
/// than MDS on the same realization.
///
/// Every request vector of `exhaustive` is replayed at every `M`, then
/// `random_trials` sampled realizations of `random` at every `M`.
pub fn protocol_suite(
    exhaustive: Grid,
    random: Population,
    random_trials: u64,
    seed: u64,
    budget: EnumerationBudget,
) -> SuiteReport {
    let mut report = SuiteReport::new("protocol equivalence");
    for pop in exhaustive.populations() {
        for m in 0..=pop.n_bins {
            let s = closed_form_scenario(&pop, m);
            let (placements, mut counters) = placements_for(&s).expect("n_F = N");
            let run = for_each_request_vector(&pop, budget, |r| {
                let context = || format!("{} M={m} requests {:?}", label(&pop), r.requests());
                protocol_checks(&mut report, r, &s, &placements, &mut counters, &context);
            });
            if let Err(e) = run {
                report.refused.push(format!("{}: {e}", label(&pop)));
                break;
            }
        }
    }
    if random_trials > 0 {
        for m in 0..=random.n_bins {
            let s = closed_form_scenario(&random, m);
            let (placements, mut counters) = placements_for(&s).expect("n_F = N");
            for trial in 0..random_trials {
                let r = sample_realization(&s, &mut trial_rng(seed, trial)).expect("valid scenario");
                let context = || format!("{} M={m} seed={seed} trial={trial}", label(&random));
                protocol_checks(&mut report, &r, &s, &placements, &mut counters, &context);
            }
        }
    }
    report
}

/// Grid replayed request-by-request in the protocol suite.
pub const PROTOCOL_GRID: Grid = Grid { max_files: 3, max_users: 2 };
/// Grid of the analytic ordering checks.
pub const DOMINANCE_GRID: Grid = Grid { max_files: 8, max_users: 4 };

/// Population and trial count of the sampled protocol checks.
pub fn random_protocol_population() -> Population {
    Population::new(20, 8, 8, 4).expect("n >= 1")
}

pub const RANDOM_PROTOCOL_TRIALS: u64 = 10_000;

/// All suites on the built-in grids.
pub fn run_all(budget: EnumerationBudget) -> ValidationReport {
    let ecc = |m: &Moments, c: u32| m.ecc(c);
    ValidationReport {
        suites: vec![
            oracle_suite(Grid::default(), budget),
            pmf_suite(Grid::default(), budget),
            dominance_suite(DOMINANCE_GRID, &ecc),
            protocol_suite(PROTOCOL_GRID, random_protocol_population(), RANDOM_PROTOCOL_TRIALS, 1, budget),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: Grid = Grid { max_files: 3, max_users: 2 };

    #[test]
    fn small_grids_pass() {
        let b = EnumerationBudget::default();
        for suite in [oracle_suite(SMALL, b), pmf_suite(SMALL, b)] {
            assert!(suite.passed(), "{suite}");
            assert!(suite.refused.is_empty());
            assert!(suite.checks > 100);
        }
        let p = protocol_suite(Grid { max_files: 2, max_users: 2 }, Population::new(6, 3, 3, 2).unwrap(), 200, 5, b);
        assert!(p.passed(), "{p}");
    }

    #[test]
    fn flipped_omega_sign_breaks_dominance() {
        let wrong = |m: &Moments, c: u32| {
            let omega = (c as i64).min(m.n_files as i64 - c as i64);
            m.ecc_with_omega(c, -omega)
        };
        let right = |m: &Moments, c: u32| m.ecc(c);
        assert!(dominance_suite(SMALL, &right).passed());
        let suite = dominance_suite(SMALL, &wrong);
        assert!(!suite.passed());
        assert!(suite.failures.iter().any(|f| f.contains("above MDS")));
    }

    #[test]
    fn tiny_budget_refuses_with_message() {
        let suite = oracle_suite(SMALL, EnumerationBudget::new(10));
        assert!(!suite.refused.is_empty());
        assert!(suite.refused[0].contains("exceeds budget of 10"), "{}", suite.refused[0]);
        assert!(suite.passed());
        let text = suite.to_string();
        assert!(text.contains("refused"));
    }
}
