//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use edgecache::brute_force::{exact_expected_load, EnumerationBudget};
use edgecache::experiment::{cmd_analytic, cmd_simulate, ExperimentConfig, Row, RowValue};
use edgecache::simulator::{tally, OutcomeTally, Realization};
use edgecache::validate::{
    oracle_suite, pmf_suite, protocol_suite, random_protocol_population, Grid, SuiteReport, PROTOCOL_GRID,
};
use edgecache::{load_analytic, ExactValue, Popularity, Scenario, Scheme};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn suite_outcome(suite: &SuiteReport) -> Outcome {
    let mut detail = format!("{} checks, {} failures", suite.checks, suite.failures.len());
    if !suite.refused.is_empty() {
        detail.push_str(&format!(", {} refused", suite.refused.len()));
    }
    for n in suite.notes.iter().filter(|n| !n.starts_with(' ')) {
        detail.push_str(&format!("\n    note: {n}"));
    }
    for f in suite.failures.iter().take(3) {
        detail.push_str(&format!("\n    {f}"));
    }
    outcome(suite.passed() && suite.refused.is_empty(), detail)
}

fn q(s: &str) -> ExactValue {
    s.parse().unwrap()
}

fn example_exactness() -> Outcome {
    let s = Scenario::uniform(2, 1, 1, 1, 0).unwrap();
    let b = EnumerationBudget::default();
    let values = [
        load_analytic::mds_load(&s).unwrap().total,
        exact_expected_load(&s, Scheme::Mds, b).unwrap(),
        load_analytic::ecc_load(&s).unwrap().total,
        exact_expected_load(&s, Scheme::Ecc, b).unwrap(),
    ];
    let expected = [q("3/2"), q("3/2"), q("1"), q("1")];
    outcome(
        values == expected,
        format!("MDS analytic {} oracle {}, ECC analytic {} oracle {}", values[0], values[1], values[2], values[3]),
    )
}

fn fig3_tally() -> Outcome {
    let black = [0, 0, 1, 2, 3, 3];
    let white = [2, 3, 4, 4];
    let grey = [0, 1, 5, 5, 6, 6, 0];
    let t = tally(&Realization::new(10, &black, &white, &grey).unwrap());
    let expected = OutcomeTally { j: 5, y: 4, k_b: 2, k_w: 1, k_1: 3, k_2: 2, z: 1 };
    outcome(t == expected, format!("{t:?}"))
}

type Curves = BTreeMap<(u32, Scheme), Vec<(u32, ExactValue)>>;

/// Normalized exact loads keyed by `(u_B, scheme)`, ordered by `M`.
fn exact_curves(rows: &[Row]) -> Curves {
    let mut curves = Curves::new();
    for r in rows {
        let RowValue::Exact { normalized, .. } = &r.value else {
            panic!("analytic row without exact value");
        };
        curves.entry((r.population.u_b, r.scheme)).or_default().push((r.cache_size, normalized.clone()));
    }
    curves
}

fn fig1_reproduction() -> (Outcome, Vec<Row>) {
    let config = ExperimentConfig::default();
    let start = Instant::now();
    let rows = cmd_analytic(&config).unwrap();
    let elapsed = start.elapsed();
    let curves = exact_curves(&rows);
    let classes: Vec<u32> = config.populations().unwrap().iter().map(|p| p.u_b).collect();
    let mut problems = Vec::new();
    let mut gaps: Vec<Vec<ExactValue>> = Vec::new();
    for &ub in &classes {
        let mds = &curves[&(ub, Scheme::Mds)];
        let ecc = &curves[&(ub, Scheme::Ecc)];
        let gap: Vec<ExactValue> = mds.iter().zip(ecc).map(|((_, a), (_, b))| a - b).collect();
        if gap.iter().any(ExactValue::is_negative) {
            problems.push(format!("(a) ECC above MDS for u_B={ub}"));
        }
        for curve in [mds, ecc] {
            if curve.windows(2).any(|w| w[1].1 > w[0].1) {
                problems.push(format!("(b) load rises in M for u_B={ub}"));
            }
        }
        let best = gap.iter().max().unwrap();
        let argmax: Vec<u32> = mds.iter().zip(&gap).filter(|(_, g)| *g == best).map(|((m, _), _)| *m).collect();
        if argmax != [50] {
            problems.push(format!("(c) gap maximised at M={argmax:?} for u_B={ub}"));
        }
        gaps.push(gap);
    }
    let ms: Vec<u32> = curves[&(classes[0], Scheme::Mds)].iter().map(|(m, _)| *m).collect();
    for (i, &m) in ms.iter().enumerate() {
        let at_m: Vec<&ExactValue> = gaps.iter().map(|g| &g[i]).collect();
        // at M = 0 and M = N the gap is zero for every population
        let grows =
            if at_m[0].is_zero() { at_m.iter().all(|g| g.is_zero()) } else { at_m.windows(2).all(|w| w[1] > w[0]) };
        if !grows {
            problems.push(format!("(d) gap does not grow with u at M={m}"));
        }
    }
    let max_gap: Vec<String> = gaps.iter().map(|g| g.iter().max().unwrap().to_decimal(4)).collect();
    let detail = format!(
        "{} rows in {:.1} ms; max normalized gap by u: {}{}",
        rows.len(),
        elapsed.as_secs_f64() * 1e3,
        max_gap.join(", "),
        if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    (outcome(problems.is_empty(), detail), rows)
}

fn fig2_reproduction(uniform_rows: &[Row]) -> Outcome {
    let config =
        ExperimentConfig { popularity: Popularity::Zipf { alpha: 0.8 }, trials: 100_000, ..Default::default() };
    let start = Instant::now();
    let rows = cmd_simulate(&config).unwrap();
    let elapsed = start.elapsed();
    let key = |r: &Row| (r.population.u_b, r.cache_size, r.scheme);
    let uniform: BTreeMap<_, f64> = uniform_rows.iter().map(|r| (key(r), r.load_mean())).collect();
    let zipf: BTreeMap<_, (f64, f64)> =
        rows.iter().map(|r| (key(r), (r.load_mean(), r.std_error().unwrap()))).collect();

    let mut problems = Vec::new();
    let mut gains = Vec::new();
    for pop in config.populations().unwrap() {
        let ub = pop.u_b;
        let mut max_zipf_gap = f64::MIN;
        let mut max_uniform_gap = f64::MIN;
        for &m in &config.cache_sizes {
            let (mds, se_m) = zipf[&(ub, m, Scheme::Mds)];
            let (ecc, se_e) = zipf[&(ub, m, Scheme::Ecc)];
            if ecc > mds + 3.0 * (se_m * se_m + se_e * se_e).sqrt() {
                problems.push(format!("ECC above MDS + 3 SE at u_B={ub} M={m}"));
            }
            for scheme in Scheme::ALL {
                let z = zipf[&(ub, m, scheme)].0;
                let u = uniform[&(ub, m, scheme)];
                // both vanish at M = N, where every file is cached
                let lower = if u == 0.0 { z == 0.0 } else { z < u };
                if m >= 10 && !lower {
                    problems.push(format!("{scheme} Zipf {z:.3} not below uniform {u:.3} at u_B={ub} M={m}"));
                }
            }
            max_zipf_gap = max_zipf_gap.max(mds - ecc);
            max_uniform_gap = max_uniform_gap.max(uniform[&(ub, m, Scheme::Mds)] - uniform[&(ub, m, Scheme::Ecc)]);
        }
        let zipf_gain = zipf[&(ub, 50, Scheme::Mds)].0 - zipf[&(ub, 50, Scheme::Ecc)].0;
        let uniform_gain = uniform[&(ub, 50, Scheme::Mds)] - uniform[&(ub, 50, Scheme::Ecc)];
        if uniform_gain <= zipf_gain {
            problems.push(format!("uniform gain {uniform_gain:.3} not above Zipf gain {zipf_gain:.3} at M=50"));
        }
        if max_uniform_gap <= max_zipf_gap {
            problems.push(format!("max uniform gap {max_uniform_gap:.3} not above max Zipf gap {max_zipf_gap:.3}"));
        }
        gains.push(format!("u={}: {:.1} vs {:.1}", pop.total(), uniform_gain, zipf_gain));
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} rows in {:.1} s; gain at M=50 uniform vs Zipf: {}{}",
            rows.len(),
            elapsed.as_secs_f64(),
            gains.join(", "),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn run_sweep(config: &Path, out: &Path, threads: &str) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_edgecache"))
        .arg("sweep")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("EDGECACHE_THREADS", threads)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("sweep exited with {status}"));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ExperimentConfig {
            popularity: Popularity::Zipf { alpha: 0.8 },
            users: vec![10, 50],
            trials: 20_000,
            seed: 7,
            ..Default::default()
        },
        // uniform requests with n_F != N take the Monte Carlo path too
        ExperimentConfig { n_fragments: Some(200), users: vec![10], trials: 20_000, seed: 9, ..Default::default() },
        ExperimentConfig::default(),
    ];
    let mut details = Vec::new();
    for (i, config) in configs.iter().enumerate() {
        let path = dir.path().join(format!("config{i}.json"));
        std::fs::write(&path, config.to_json()).unwrap();
        let runs: Result<Vec<Vec<u8>>, String> = [("1", "a"), ("1", "b"), ("4", "c")]
            .iter()
            .map(|(threads, tag)| run_sweep(&path, &dir.path().join(format!("out{i}{tag}.csv")), threads))
            .collect();
        match runs {
            Ok(runs) if runs.windows(2).all(|w| w[0] == w[1]) => {
                details.push(format!("config {i}: {} bytes identical", runs[0].len()))
            }
            Ok(_) => return outcome(false, format!("config {i}: outputs differ")),
            Err(e) => return outcome(false, format!("config {i}: {e}")),
        }
    }
    outcome(true, format!("threads 1, 1, 4; {}", details.join("; ")))
}

fn report(id: u32, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let passed = o.passed && in_time;
    let verdict = if passed { "PASS" } else { "FAIL" };
    let timing = if in_time { String::new() } else { format!(" (over the {} s limit)", limit.as_secs()) };
    println!("criterion {id} {verdict} {name} [{:.2} s{timing}]: {}", elapsed.as_secs_f64(), o.detail);
    passed
}

fn main() -> ExitCode {
    let budget = EnumerationBudget::default();
    let secs = Duration::from_secs;
    let mut fig1_rows = Vec::new();
    let results = [
        report(1, "example exactness", secs(1), example_exactness),
        report(2, "worked tally", secs(1), fig3_tally),
        report(3, "oracle equivalence", secs(300), || suite_outcome(&oracle_suite(Grid::default(), budget))),
        report(4, "pmf suites", secs(300), || suite_outcome(&pmf_suite(Grid::default(), budget))),
        report(5, "protocol and count equivalence", secs(60), || {
            suite_outcome(&protocol_suite(PROTOCOL_GRID, random_protocol_population(), 10_000, 2024, budget))
        }),
        report(6, "uniform sweep properties", secs(600), || {
            let (o, rows) = fig1_reproduction();
            fig1_rows = rows;
            o
        }),
        report(7, "Zipf sweep properties", secs(600), || fig2_reproduction(&fig1_rows)),
        report(8, "sweep determinism", secs(120), determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
