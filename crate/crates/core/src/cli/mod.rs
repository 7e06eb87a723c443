//! The `greedy-voting` command line.
//!
//! Every subcommand reads one flat [`ExperimentConfig`], either from flags
//! or from `--config file.json` with flags taking precedence. Results go to
//! `--output-path` (stdout by default) as CSV. Next to an output file, a
//! `.config.json` sidecar records the subcommand and the resolved
//! configuration, defaults included.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when an exact
//! computation hits a size limit, 1 for anything else.

mod commands;
mod config;
mod output;

pub use config::ExperimentConfig;
pub use output::format_float;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "greedy-voting", version, about = "Greedy sampling, voting power and split-gain experiments")]
pub struct Cli {
    /// JSON file with configuration keys; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "GREEDY_VOTING_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact law of v_k, of (A_k(i), v_k) or of u_k.
    Exact(ExperimentConfig),
    /// Raw greedy samples.
    Sample(ExperimentConfig),
    /// Voting power, Monte Carlo or exact with --epsilon.
    Power(ExperimentConfig),
    /// Split gain of one node.
    Gain(ExperimentConfig),
    /// Split gain along a parameter axis.
    Sweep(ExperimentConfig),
    /// Kernel density of per-run gains.
    Kde(ExperimentConfig),
    /// Normal QQ points of per-run gains.
    Qq(ExperimentConfig),
    /// Basic FPC simulation.
    Fpc(ExperimentConfig),
    /// k = 2 splitting gain tau: its maximum, or tau_r(p) and tau(p).
    Tau(ExperimentConfig),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::Sample(_) => "sample",
            Command::Power(_) => "power",
            Command::Gain(_) => "gain",
            Command::Sweep(_) => "sweep",
            Command::Kde(_) => "kde",
            Command::Qq(_) => "qq",
            Command::Fpc(_) => "fpc",
            Command::Tau(_) => "tau",
        }
    }

    fn into_config(self) -> ExperimentConfig {
        match self {
            Command::Exact(c)
            | Command::Sample(c)
            | Command::Power(c)
            | Command::Gain(c)
            | Command::Sweep(c)
            | Command::Kde(c)
            | Command::Qq(c)
            | Command::Fpc(c)
            | Command::Tau(c) => c,
        }
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    subcommand: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) | Error::UnsupportedConfiguration(_) => 2,
        Error::ResourceLimit { .. } => 3,
        Error::DegenerateSample(_) | Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), Error> {
    if let Some(t) = cli.threads.filter(|&t| t > 0) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let name = cli.command.name();
    let flags = cli.command.into_config();
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_json_path(path)?.overlay(flags),
        None => flags,
    };
    let text = commands::dispatch(name, &mut config)?;
    let output = config.output_path.clone();
    output::emit(output.as_deref(), &text.table)?;
    if let Some(path) = output {
        let provenance = Provenance {
            subcommand: name,
            version: env!("CARGO_PKG_VERSION"),
            config: &config,
        };
        output::write_json(&output::sidecar_path(&path, "config.json"), &provenance)?;
        if let Some(summary) = &text.summary {
            output::write_json(&output::sidecar_path(&path, "summary.json"), summary)?;
        }
    } else if let Some(summary) = &text.summary {
        eprintln!("{summary}");
    }
    for note in &text.notes {
        eprintln!("{note}");
    }
    Ok(())
}

/// Entry point for the binary: parses `args`, runs, and returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
