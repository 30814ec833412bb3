//! Experiment configuration and the CSV rows behind the command-line tool.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::ExactValue;
use crate::error::{Error, Result};
use crate::load_analytic::Moments;
use crate::occupancy::Population;
use crate::scenario::{Popularity, Scenario, Scheme};
use crate::simulator::{monte_carlo_grid, LoadReport};

pub const CSV_HEADER: &str = "scheme,N,n_F,M,u_B,u_W,u_2,alpha,load_mean,load_exact,normalized,std_err,trials,seed";

/// Decimal places of every floating column.
const DIGITS: usize = 6;

/// Percentages of users attached only to relay B, only to relay W, and to
/// both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub b_only: u32,
    pub w_only: u32,
    pub both: u32,
}

impl Default for Split {
    fn default() -> Self {
        Self { b_only: 40, w_only: 40, both: 20 }
    }
}

impl Split {
    /// `(u_B, u_W, u_2)`: the single-relay classes are rounded half up and
    /// the dual class takes the remainder.
    pub fn resolve(&self, users: u32) -> (u32, u32, u32) {
        let round = |pct: u32| ((users as u64 * pct as u64 + 50) / 100) as u32;
        let u_b = round(self.b_only).min(users);
        let u_w = round(self.w_only).min(users - u_b);
        (u_b, u_w, users - u_b - u_w)
    }
}

/// Explicit class counts, used instead of or in addition to `users`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassCounts {
    pub u_b: u32,
    pub u_w: u32,
    pub u_2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_files: u32,
    /// Fragments per file; defaults to `n_files`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_fragments: Option<u32>,
    pub cache_sizes: Vec<u32>,
    /// Total user counts, each split by `split`.
    #[serde(default)]
    pub users: Vec<u32>,
    #[serde(default)]
    pub split: Split,
    #[serde(default)]
    pub populations: Vec<ClassCounts>,
    #[serde(default = "uniform")]
    pub popularity: Popularity,
    #[serde(default = "both_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn uniform() -> Popularity {
    Popularity::Uniform
}

fn both_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_trials() -> u64 {
    100_000
}

impl Default for ExperimentConfig {
    /// The `N = 100` sweep over `u = 10, 50, 100` users.
    fn default() -> Self {
        Self {
            n_files: 100,
            n_fragments: None,
            cache_sizes: (0..=100).step_by(10).collect(),
            users: vec![10, 50, 100],
            split: Split::default(),
            populations: Vec::new(),
            popularity: Popularity::Uniform,
            schemes: both_schemes(),
            trials: default_trials(),
            seed: 1,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn n_fragments(&self) -> u32 {
        self.n_fragments.unwrap_or(self.n_files)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_files == 0 {
            return Err(Error::EmptyLibrary(0));
        }
        if self.n_fragments() == 0 {
            return Err(Error::NoFragments);
        }
        if self.cache_sizes.is_empty() {
            return bad("cache_sizes must list at least one cache size".into());
        }
        if let Some(&m) = self.cache_sizes.iter().find(|&&m| m > self.n_files) {
            return Err(Error::CacheTooLarge { cache: m, files: self.n_files });
        }
        if self.users.is_empty() && self.populations.is_empty() {
            return bad("users or populations must list at least one population".into());
        }
        let s = self.split;
        let sum = s.b_only as u64 + s.w_only as u64 + s.both as u64;
        if sum != 100 {
            return bad(format!("split percentages sum to {sum}, not 100"));
        }
        if self.schemes.is_empty() {
            return bad("schemes must list at least one scheme".into());
        }
        if self.trials == 0 {
            return Err(Error::NoTrials);
        }
        self.popularity.validate()
    }

    /// Populations in output order: the `users` list resolved by `split`,
    /// then the explicit `populations`.
    pub fn populations(&self) -> Result<Vec<Population>> {
        let from_users = self.users.iter().map(|&u| self.split.resolve(u));
        let explicit = self.populations.iter().map(|c| (c.u_b, c.u_w, c.u_2));
        from_users.chain(explicit).map(|(b, w, d)| Population::new(self.n_files, b, w, d)).collect()
    }

    fn scenario(&self, pop: Population, cache_size: u32) -> Result<Scenario> {
        Scenario::new(pop, self.n_fragments(), cache_size, self.popularity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowValue {
    Exact { total: ExactValue, normalized: ExactValue },
    Sampled(LoadReport),
}

/// One CSV line: a scheme at one cache size for one population.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scheme: Scheme,
    pub n_files: u32,
    pub n_fragments: u32,
    pub cache_size: u32,
    pub population: Population,
    pub alpha: f64,
    pub value: RowValue,
}

impl Row {
    pub fn load_mean(&self) -> f64 {
        match &self.value {
            RowValue::Exact { total, .. } => total.to_f64(),
            RowValue::Sampled(r) => r.mean_load,
        }
    }

    pub fn normalized(&self) -> f64 {
        match &self.value {
            RowValue::Exact { normalized, .. } => normalized.to_f64(),
            RowValue::Sampled(r) => r.normalized_mean,
        }
    }

    pub fn std_error(&self) -> Option<f64> {
        match &self.value {
            RowValue::Exact { .. } => Some(0.0),
            RowValue::Sampled(r) => r.std_error,
        }
    }

    pub fn to_csv(&self) -> String {
        let p = &self.population;
        let (mean, exact, normalized, se, trials, seed) = match &self.value {
            RowValue::Exact { total, normalized } => (
                total.to_decimal(DIGITS),
                total.to_string(),
                normalized.to_decimal(DIGITS),
                String::new(),
                String::new(),
                String::new(),
            ),
            RowValue::Sampled(r) => (
                format!("{:.*}", DIGITS, r.mean_load),
                String::new(),
                format!("{:.*}", DIGITS, r.normalized_mean),
                r.std_error.map_or_else(|| "NA".to_string(), |se| format!("{se:.DIGITS$}")),
                r.trials.to_string(),
                r.seed.to_string(),
            ),
        };
        format!(
            "{},{},{},{},{},{},{},{},{mean},{exact},{normalized},{se},{trials},{seed}",
            self.scheme, self.n_files, self.n_fragments, self.cache_size, p.u_b, p.u_w, p.u_2, self.alpha
        )
    }
}

fn analytic_rows(config: &ExperimentConfig, pop: Population) -> Result<Vec<Row>> {
    for &m in &config.cache_sizes {
        if !config.scenario(pop, m)?.analytic_applicable() {
            return Err(Error::AnalyticUnavailable);
        }
    }
    let moments = Moments::compute(&pop);
    let mut rows = Vec::new();
    for &m in &config.cache_sizes {
        for &scheme in &config.schemes {
            let load = moments.load(scheme, m);
            rows.push(Row {
                scheme,
                n_files: config.n_files,
                n_fragments: config.n_fragments(),
                cache_size: m,
                population: pop,
                alpha: config.popularity.alpha(),
                value: RowValue::Exact { total: load.total, normalized: load.normalized },
            });
        }
    }
    Ok(rows)
}

fn simulated_rows(config: &ExperimentConfig, pop: Population) -> Result<Vec<Row>> {
    let base = config.scenario(pop, 0)?;
    let reports = monte_carlo_grid(&base, &config.cache_sizes, &config.schemes, config.trials, config.seed)?;
    Ok(reports
        .into_iter()
        .map(|r| Row {
            scheme: r.scheme,
            n_files: config.n_files,
            n_fragments: config.n_fragments(),
            cache_size: r.cache_size,
            population: pop,
            alpha: config.popularity.alpha(),
            value: RowValue::Sampled(r),
        })
        .collect())
}

fn per_population(
    config: &ExperimentConfig,
    rows_for: impl Fn(&ExperimentConfig, Population) -> Result<Vec<Row>> + Sync,
) -> Result<Vec<Row>> {
    config.validate()?;
    let parts: Vec<Vec<Row>> =
        config.populations()?.into_par_iter().map(|pop| rows_for(config, pop)).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Exact closed-form rows; needs uniform popularity and `n_F = N`.
pub fn cmd_analytic(config: &ExperimentConfig) -> Result<Vec<Row>> {
    per_population(config, analytic_rows)
}

/// Monte Carlo rows under any popularity.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Vec<Row>> {
    per_population(config, simulated_rows)
}

/// Exact rows where the closed form applies, Monte Carlo otherwise.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<Vec<Row>> {
    per_population(config, |c, pop| {
        if c.popularity.is_uniform() && c.n_fragments() == c.n_files {
            analytic_rows(c, pop)
        } else {
            simulated_rows(c, pop)
        }
    })
}

pub fn write_csv(rows: &[Row], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_config() -> ExperimentConfig {
        ExperimentConfig {
            n_files: 2,
            cache_sizes: vec![1],
            users: vec![],
            populations: vec![ClassCounts { u_b: 1, u_w: 1, u_2: 0 }],
            trials: 1000,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn split_resolution() {
        let s = Split::default();
        assert_eq!(s.resolve(10), (4, 4, 2));
        assert_eq!(s.resolve(50), (20, 20, 10));
        assert_eq!(s.resolve(100), (40, 40, 20));
        assert_eq!(s.resolve(3), (1, 1, 1));
        let halves = Split { b_only: 50, w_only: 50, both: 0 };
        assert_eq!(halves.resolve(3), (2, 1, 0));
    }

    #[test]
    fn example_rows() {
        let rows = cmd_analytic(&example_config()).unwrap();
        let lines: Vec<String> = rows.iter().map(Row::to_csv).collect();
        assert_eq!(lines[0], "mds,2,2,1,1,1,0,0,1.500000,3/2,0.750000,,,");
        assert_eq!(lines[1], "ecc,2,2,1,1,1,0,0,1.000000,1,0.500000,,,");
    }

    #[test]
    fn no_cache_rows_coincide() {
        let mut c = ExperimentConfig { cache_sizes: vec![0], users: vec![10], ..ExperimentConfig::default() };
        c.validate().unwrap();
        let rows = cmd_analytic(&c).unwrap();
        assert_eq!(rows[0].value, rows[1].value);
        c.cache_sizes = vec![50];
        let rows = cmd_analytic(&c).unwrap();
        assert!(rows[1].normalized() < rows[0].normalized());
    }

    #[test]
    fn simulate_rows_and_na_sentinel() {
        let mut c = example_config();
        c.trials = 1;
        let rows = cmd_simulate(&c).unwrap();
        assert_eq!(rows[0].to_csv(), "mds,2,2,1,1,1,0,0,2.000000,,1.000000,NA,1,1");
        c.trials = 5000;
        let rows = cmd_simulate(&c).unwrap();
        assert_eq!(rows[1].load_mean(), 1.0);
    }

    #[test]
    fn sweep_falls_back_to_monte_carlo() {
        let mut c = example_config();
        c.popularity = Popularity::Zipf { alpha: 0.8 };
        let rows = cmd_sweep(&c).unwrap();
        assert!(matches!(rows[0].value, RowValue::Sampled(_)));
        assert!(matches!(cmd_analytic(&c), Err(Error::AnalyticUnavailable)));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = example_config();
        c.cache_sizes.clear();
        assert!(matches!(cmd_sweep(&c), Err(Error::Config(_))));
        let mut c = example_config();
        c.split = Split { b_only: 40, w_only: 40, both: 30 };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = example_config();
        c.populations.clear();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"n_files": 2, "cache_sizes": [1], "bogus": 1}"#).is_err());
    }

    #[test]
    fn minimal_json_takes_defaults() {
        let c = ExperimentConfig::from_json(r#"{"n_files": 4, "cache_sizes": [0, 2], "users": [4]}"#).unwrap();
        assert_eq!(c.n_fragments(), 4);
        assert_eq!(c.schemes, Scheme::ALL.to_vec());
        assert_eq!(c.split, Split::default());
        assert!(c.popularity.is_uniform());
    }

    #[test]
    fn csv_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            1u32..200,
            proptest::option::of(1u32..400),
            proptest::collection::vec(0u32..200, 1..5),
            proptest::collection::vec(0u32..500, 0..4),
            (0u32..=100, 0u32..=100),
            proptest::collection::vec((0u32..9, 0u32..9, 0u32..9), 0..3),
            proptest::option::of(0.01f64..3.0),
            proptest::sample::subsequence(Scheme::ALL.to_vec(), 1..=2),
            (1u64..1_000_000, any::<u64>()),
            proptest::option::of("[a-z]{1,8}\\.csv"),
        )
            .prop_map(|(n, nf, ms, users, (pb, pw), pops, alpha, schemes, (trials, seed), out)| {
                let pw = pw.min(100 - pb);
                ExperimentConfig {
                    n_files: n,
                    n_fragments: nf,
                    cache_sizes: ms,
                    users,
                    split: Split { b_only: pb, w_only: pw, both: 100 - pb - pw },
                    populations: pops.into_iter().map(|(u_b, u_w, u_2)| ClassCounts { u_b, u_w, u_2 }).collect(),
                    popularity: alpha.map_or(Popularity::Uniform, |alpha| Popularity::Zipf { alpha }),
                    schemes,
                    trials,
                    seed,
                    out: out.map(PathBuf::from),
                }
            })
    }

    proptest! {
        #[test]
        fn config_round_trips(c in arb_config()) {
            let back: ExperimentConfig = serde_json::from_str(&c.to_json()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
