use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edgecache::brute_force::EnumerationBudget;
use edgecache::experiment::{
    cmd_analytic, cmd_simulate, cmd_sweep, write_csv, ClassCounts, ExperimentConfig, Row, Split,
};
use edgecache::validate::run_all;
use edgecache::{Error, Popularity, Scheme};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

/// Backhaul load of MDS and edge coded caching on two overlapping relays.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact closed-form loads (uniform requests, n_F = N).
    Analytic(ExperimentArgs),
    /// Monte Carlo estimates of the protocol's backhaul load.
    Simulate(ExperimentArgs),
    /// Cross product of the config's lists; exact where possible.
    Sweep(ExperimentArgs),
    /// Run the built-in cross-validation suites.
    Validate {
        /// Largest number of request vectors one enumeration may visit.
        #[arg(long, default_value_t = EnumerationBudget::default().max_states)]
        budget: u64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    n_files: Option<u32>,
    #[arg(long)]
    n_fragments: Option<u32>,
    /// Comma-separated cache sizes.
    #[arg(long, value_delimiter = ',')]
    cache_sizes: Option<Vec<u32>>,
    /// Comma-separated total user counts.
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<u32>>,
    /// Class-split percentages B-only,W-only,both.
    #[arg(long, value_parser = parse_split)]
    split: Option<Split>,
    /// Explicit class counts u_B,u_W,u_2; repeatable.
    #[arg(long = "population", value_parser = parse_counts)]
    populations: Vec<ClassCounts>,
    /// Zipf exponent of the request popularity.
    #[arg(long, conflicts_with = "uniform")]
    zipf: Option<f64>,
    /// Uniform request popularity.
    #[arg(long)]
    uniform: bool,
    /// Comma-separated schemes (mds, ecc).
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
}

fn triple(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected three comma-separated integers, got {s:?}"));
    };
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?, parse(c)?))
}

fn parse_split(s: &str) -> Result<Split, String> {
    let (b_only, w_only, both) = triple(s)?;
    Ok(Split { b_only, w_only, both })
}

fn parse_counts(s: &str) -> Result<ClassCounts, String> {
    let (u_b, u_w, u_2) = triple(s)?;
    Ok(ClassCounts { u_b, u_w, u_2 })
}

impl ExperimentArgs {
    fn resolve(self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.n_files {
            c.n_files = v;
        }
        if let Some(v) = self.n_fragments {
            c.n_fragments = Some(v);
        }
        if let Some(v) = self.cache_sizes {
            c.cache_sizes = v;
        }
        // Either population flag alone replaces the config's populations.
        match (self.users, self.populations.is_empty()) {
            (Some(users), true) => {
                c.users = users;
                c.populations.clear();
            }
            (Some(users), false) => {
                c.users = users;
                c.populations = self.populations;
            }
            (None, false) => {
                c.users.clear();
                c.populations = self.populations;
            }
            (None, true) => {}
        }
        if let Some(v) = self.split {
            c.split = v;
        }
        if let Some(alpha) = self.zipf {
            c.popularity = Popularity::Zipf { alpha };
        }
        if self.uniform {
            c.popularity = Popularity::Uniform;
        }
        if let Some(v) = self.schemes {
            c.schemes = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.out {
            c.out = Some(v);
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(rows: &[Row], config: &ExperimentConfig) -> Result<(), Error> {
    match &config.out {
        Some(path) => write_csv(rows, BufWriter::new(File::create(path)?)),
        None => write_csv(rows, io::stdout().lock()),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("EDGECACHE_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.trim().parse().map_err(|_| format!("EDGECACHE_THREADS must be a positive integer (got {value:?})"))?;
    if threads == 0 {
        return Err("EDGECACHE_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn run_experiment(args: ExperimentArgs, cmd: fn(&ExperimentConfig) -> edgecache::Result<Vec<Row>>) -> ExitCode {
    let result = args.resolve().and_then(|config| {
        let rows = cmd(&config)?;
        emit(&rows, &config)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match cli.command {
        Command::Analytic(args) => run_experiment(args, cmd_analytic),
        Command::Simulate(args) => run_experiment(args, cmd_simulate),
        Command::Sweep(args) => run_experiment(args, cmd_sweep),
        Command::Validate { budget } => {
            let report = run_all(EnumerationBudget::new(budget));
            let mut out = io::stdout().lock();
            let _ = write!(out, "{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
    }
}
