//! The `vcapprox` command line.
//!
//! Every computing command reads a JSON instance and writes a [`Report`]
//! whose `config` is the fully resolved [`Job`], so `replay` can rerun it.
//! `counterexample` and `dual` write instance files instead.
//!
//! Exit codes: 0 computed (including negative findings such as
//! `success: false`), 2 invalid input, 3 budget or size limit exceeded,
//! 4 invariant violation or failed reproduction.

mod jobs;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use jobs::{resolve_partition, run_job, BracketMode, Job, Outcome};

use crate::boundary::Strategy;
use crate::counterexample::make_counterexample;
use crate::error::VcError;
use crate::instance::InstanceFile;
use crate::system::{dual_family, DEFAULT_SEARCH_BUDGET};

pub const SCHEMA_VERSION: u32 = 1;
/// Worker thread count for the parallel routines.
pub const THREADS_ENV: &str = "VCAPPROX_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub vcapprox: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Job,
    pub results: Value,
    pub versions: Versions,
    pub seed: Option<u64>,
    pub wall_time_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "vcapprox", version, about = "VC combinatorics, boundary approximation, bracketing and ergodic discrepancy on finite weighted spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Run the command twice and fail unless the payloads are identical.
    #[arg(long, global = true)]
    verify: bool,
}

#[derive(Args, Debug)]
struct Input {
    /// Instance file.
    input: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// VC dimension, or dual VC dimension with --dual.
    Dim {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Search for a partition with every member boundary at most epsilon.
    Approx {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "greedy")]
        strategy: Strategy,
        /// Defaults to the number of points.
        #[arg(long)]
        max_cells: Option<usize>,
    },
    /// Member boundaries under a partition.
    Boundary {
        #[command(flatten)]
        input: Input,
        /// trivial, singletons, join:i,j,… or a named instance partition.
        #[arg(long, default_value = "trivial")]
        partition: String,
    },
    /// Bracket covers of the sets or functions of an instance.
    Brackets {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "sets")]
        mode: BracketMode,
        #[arg(long)]
        epsilon: f64,
        /// Truncation bound; defaults to the largest envelope value.
        #[arg(long = "M")]
        bound: Option<f64>,
        /// Value-axis levels for graph mode; defaults to ⌈2/epsilon⌉.
        #[arg(long)]
        s_levels: Option<usize>,
        /// Sets mode: read brackets off this partition instead of searching.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value = "greedy")]
        strategy: Strategy,
        /// Sets mode: also compute the exact bracketing number.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Discrepancy traces of a process over the instance sets.
    Ulln {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        process: String,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
        checkpoints: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },
    /// Write the disjoint-interval instance.
    Counterexample {
        #[arg(long)]
        depth: usize,
        #[arg(long, value_delimiter = ',')]
        masses: Option<Vec<f64>>,
    },
    /// Write the dual family as an instance.
    Dual {
        #[command(flatten)]
        input: Input,
    },
    /// Rerun a report's config and compare payloads.
    Replay {
        report: PathBuf,
    },
}

enum Failure {
    Input(String),
    Compute(VcError),
    Reproduce(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compute(e) => exit_code(e),
            Failure::Reproduce(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) | Failure::Reproduce(m) => m.clone(),
            Failure::Compute(e) => e.to_string(),
        }
    }
}

impl From<VcError> for Failure {
    fn from(e: VcError) -> Self {
        Failure::Compute(e)
    }
}

pub fn exit_code(e: &VcError) -> u8 {
    match e {
        VcError::Domain(_) | VcError::Config(_) | VcError::Precondition(_) => 2,
        VcError::Budget { .. } | VcError::SizeGuard { .. } => 3,
        VcError::Invariant(_) => 4,
    }
}

fn read_instance(path: &Path) -> Result<InstanceFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let file = InstanceFile::from_json(&text)?;
    file.load()?;
    Ok(file)
}

fn resolve(command: Command) -> Result<Job, Failure> {
    Ok(match command {
        Command::Dim {
            input,
            dual,
            cap,
            budget,
        } => Job::Dim {
            instance: read_instance(&input.input)?,
            dual,
            cap,
            budget,
        },
        Command::Approx {
            input,
            epsilon,
            strategy,
            max_cells,
        } => {
            let instance = read_instance(&input.input)?;
            let max_cells = max_cells.unwrap_or(instance.points.len().max(2));
            Job::Approx {
                instance,
                epsilon,
                strategy,
                max_cells,
            }
        }
        Command::Boundary { input, partition } => Job::Boundary {
            instance: read_instance(&input.input)?,
            partition,
        },
        Command::Brackets {
            input,
            mode,
            epsilon,
            bound,
            s_levels,
            partition,
            strategy,
            exact,
            budget,
        } => Job::Brackets {
            instance: read_instance(&input.input)?,
            mode,
            epsilon,
            bound,
            s_levels,
            partition,
            strategy,
            exact,
            budget,
        },
        Command::Ulln {
            input,
            process,
            checkpoints,
            seeds,
        } => Job::Ulln {
            instance: read_instance(&input.input)?,
            process,
            checkpoints,
            seeds,
        },
        Command::Counterexample { .. } | Command::Dual { .. } | Command::Replay { .. } => {
            unreachable!("handled before resolution")
        }
    })
}

/// Runs `job` and wraps the outcome in a report.
pub fn execute(job: &Job) -> Result<(Report, Outcome), VcError> {
    let start = Instant::now();
    let outcome = run_job(job)?;
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: job.name().to_string(),
        config: job.clone(),
        results: outcome.results.clone(),
        versions: Versions {
            vcapprox: env!("CARGO_PKG_VERSION").to_string(),
        },
        seed: outcome.seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, outcome))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn to_csv(outcome: &Outcome, command: &str) -> Result<String, Failure> {
    let (header, rows) = outcome
        .csv
        .as_ref()
        .ok_or_else(|| Failure::Input(format!("csv output is not available for `{command}`")))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Input(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields"))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let output = cli.output.as_deref();
    let text = match cli.command {
        Command::Counterexample { depth, masses } => {
            let c = make_counterexample(depth, masses.as_deref())?;
            to_json(&InstanceFile::from_counterexample(&c))
        }
        Command::Dual { input } => {
            let inst = read_instance(&input.input)?.load()?;
            to_json(&InstanceFile::from_dual(&dual_family(&inst.family)))
        }
        Command::Replay { report } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", report.display())))?;
            let old: Report = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("malformed report: {e}")))?;
            let (new, _) = execute(&old.config)?;
            if new.results != old.results {
                return Err(Failure::Reproduce("replayed results differ from the report".into()));
            }
            to_json(&serde_json::json!({"reproduced": true, "command": old.command}))
        }
        command => {
            let job = resolve(command)?;
            let (report, outcome) = execute(&job)?;
            if cli.verify {
                let (again, _) = execute(&job)?;
                if to_json(&again.results) != to_json(&report.results) {
                    return Err(Failure::Reproduce("repeated run produced a different payload".into()));
                }
            }
            match cli.format {
                Format::Json => to_json(&report),
                Format::Csv => to_csv(&outcome, &report.command)?,
            }
        }
    };
    emit(&text, output)
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("vcapprox: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
