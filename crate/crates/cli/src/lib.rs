//! Command-line runner for the fraclat experiments.
//!
//! Every subcommand reads an optional TOML file, applies flag overrides,
//! validates, runs, and writes `result.json`, CSV tables and `manifest.json`
//! into the output directory. Exit codes: 0 when every requested verdict
//! passes, 1 on a failed verdict or computation error, 2 on a config error.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suite;

use clap::{Args, Parser, Subcommand};
use commands::{run_operation, Operation};
use config::{
    merge, parse_config, validate, ConfigSource, ConstructionName, ExperimentConfig, KindName, MethodName, PathSpec,
    PotentialSpec,
};
use error::CliError;
use output::{describe, write_outputs, Outcome};
use std::ffi::OsString;
use std::path::PathBuf;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRACLAT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fraclat", version, about = "Fractional lattice Laplacian experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geometry of a box: sites, strides, boundary distances.
    BoxInfo(Flags),
    /// Threshold set of the symbol for an order vector.
    Thresholds(Flags),
    /// Symbol values on a momentum grid.
    Symbol(Flags),
    /// A fractional power on a box.
    FracPower(Flags),
    /// Boundary correction: rank, norm, collar.
    Kcorr(Flags),
    /// Factorized against brute-force walk deficits in exact arithmetic.
    DhCheck(Flags),
    /// Heat kernels against the spectral exponential.
    Heat(Flags),
    /// Gaussian bound on the free/Dirichlet semigroup difference.
    ImagesCheck(Flags),
    /// The conjugate operator on a box.
    Conjugate(Flags),
    /// The commutator of the Hamiltonian with the conjugate operator.
    Commutator(Flags),
    /// Commutator multipliers against a measured table.
    MultiplierCheck(Flags),
    /// Compressed commutator spectra over a ladder of boxes.
    Mourre(Flags),
    /// Decay and difference hypotheses on a potential.
    PotentialCheck(Flags),
    /// Weighted resolvent norms as the damping shrinks.
    Lap(Flags),
    /// Time-integrated local decay of the evolution.
    Propagate(Flags),
    /// Isolated, persistent eigenvalues in a window.
    Eigcount(Flags),
    /// Half-line operator against the compressed bilateral one.
    Weyl(Flags),
    /// Weight inside the cone of the conjugate operator.
    Ballistic(Flags),
    /// Resolvent differences along a path of exponents.
    RScan(Flags),
    /// The full acceptance battery.
    Suite(Flags),
}

impl Command {
    fn parts(&self) -> (Option<Operation>, &Flags) {
        use Command as C;
        match self {
            C::BoxInfo(f) => (Some(Operation::BoxInfo), f),
            C::Thresholds(f) => (Some(Operation::Thresholds), f),
            C::Symbol(f) => (Some(Operation::Symbol), f),
            C::FracPower(f) => (Some(Operation::FracPower), f),
            C::Kcorr(f) => (Some(Operation::Kcorr), f),
            C::DhCheck(f) => (Some(Operation::DhCheck), f),
            C::Heat(f) => (Some(Operation::Heat), f),
            C::ImagesCheck(f) => (Some(Operation::ImagesCheck), f),
            C::Conjugate(f) => (Some(Operation::Conjugate), f),
            C::Commutator(f) => (Some(Operation::Commutator), f),
            C::MultiplierCheck(f) => (Some(Operation::MultiplierCheck), f),
            C::Mourre(f) => (Some(Operation::Mourre), f),
            C::PotentialCheck(f) => (Some(Operation::PotentialCheck), f),
            C::Lap(f) => (Some(Operation::Lap), f),
            C::Propagate(f) => (Some(Operation::Propagate), f),
            C::Eigcount(f) => (Some(Operation::Eigcount), f),
            C::Weyl(f) => (Some(Operation::Weyl), f),
            C::Ballistic(f) => (Some(Operation::Ballistic), f),
            C::RScan(f) => (Some(Operation::RScan), f),
            C::Suite(f) => (None, f),
        }
    }
}

/// Flags shared by every subcommand; each overrides the config key of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Order vector, one exponent per axis (a single value is broadcast).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Option<Vec<f64>>,
    /// Box extents, one per axis.
    #[arg(long, value_delimiter = ',')]
    pub extents: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub kind: Option<KindName>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    #[arg(long, value_enum)]
    pub construction: Option<ConstructionName>,
    /// Spectral window `a,b`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// Weight exponent.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub velocities: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Ladder of box sizes, ascending.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<usize>>,
    #[arg(long)]
    pub h_max: Option<usize>,
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long)]
    pub ring: Option<usize>,
    /// Exponent path `start:end:step`.
    #[arg(long)]
    pub path: Option<PathSpec>,
    /// Potential `family[:p1[:p2]]`.
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<PotentialSpec>,
    /// Multiplier table file.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (capped by FRACLAT_THREADS).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run every suite criterion even after a failure.
    #[arg(long)]
    pub keep_going: bool,
}

impl Flags {
    fn overrides(&self) -> ExperimentConfig {
        ExperimentConfig {
            command: None,
            r: self.r.clone(),
            extents: self.extents.clone(),
            kind: self.kind,
            method: self.method,
            construction: self.construction,
            window: self.window.clone(),
            s: self.s,
            epsilon: self.epsilon,
            lambdas: self.lambdas.clone(),
            etas: self.etas.clone(),
            times: self.times.clone(),
            velocities: self.velocities.clone(),
            horizons: self.horizons.clone(),
            t_max: self.t_max,
            ladder: self.ladder.clone(),
            h_max: self.h_max,
            block: self.block,
            ring: self.ring,
            path: self.path,
            potential: self.potential,
            table: self.table.clone(),
            output: self.output.clone(),
            seed: self.seed,
            threads: self.threads,
            keep_going: self.keep_going.then_some(true),
        }
    }
}

/// Loads the file, applies flags and validates.
pub fn resolve(command: &str, flags: &Flags) -> Result<(ExperimentConfig, ConfigSource), CliError> {
    let (mut cfg, mut src) = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
                file: Some(path.clone()),
                line: None,
                message: format!("cannot read: {e}"),
            })?;
            parse_config(&text, Some(path.clone()))?
        }
        None => parse_config("", None)?,
    };
    merge(&mut cfg, &mut src, &flags.overrides());
    if let Some(named) = &cfg.command {
        if named != command {
            return Err(src.error("command", format!("file is for `{named}`, invoked as `{command}`")));
        }
    }
    validate(&cfg, &src)?;
    Ok((cfg, src))
}

fn thread_count(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    let wanted = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(cap) if cap > 0 => Ok(wanted.min(cap)),
            _ => Err(CliError::Config {
                file: None,
                line: None,
                message: format!("{THREADS_ENV} must be a positive integer, got `{v}`"),
            }),
        },
        Err(_) => Ok(wanted),
    }
}

/// The configuration as recorded in the manifest: every key that can affect
/// results, so the output directory and worker count are left out.
pub fn recorded_config(command: &str, cfg: &ExperimentConfig) -> serde_json::Value {
    let mut recorded = cfg.clone();
    recorded.command = Some(command.to_string());
    recorded.output = None;
    recorded.threads = None;
    serde_json::to_value(&recorded).expect("configs always serialize")
}

fn execute(command: &Command) -> Result<(String, Outcome, PathBuf), CliError> {
    let (op, flags) = command.parts();
    let name = op.map_or("suite", Operation::name);
    let (cfg, src) = resolve(name, flags)?;
    let threads = thread_count(&cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config {
            file: None,
            line: None,
            message: format!("cannot start {threads} worker threads: {e}"),
        })?;
    let outcome = pool.install(|| match op {
        Some(op) => run_operation(op, &cfg, &src),
        None => {
            let opts = suite::SuiteOptions {
                seed: cfg.seed.unwrap_or(0),
                keep_going: cfg.keep_going.unwrap_or(false),
            };
            Ok(suite::run_suite(&opts, |r| println!("{}", r.line())))
        }
    })?;
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("fraclat-out").join(name));
    write_outputs(&dir, name, &recorded_config(name, &cfg), &outcome)?;
    Ok((name.to_string(), outcome, dir))
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok((name, outcome, dir)) => {
            print!("{}", describe(&outcome));
            let status = match outcome.verdict {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "DONE",
            };
            println!("{name}: {status} (outputs in {})", dir.display());
            if outcome.passed() {
                0
            } else {
                if let Some(first) = outcome.summary.get("first_failure") {
                    eprintln!("{name}: failed at {}", first.as_str().unwrap_or_default());
                }
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
