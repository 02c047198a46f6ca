//! `fockramp` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or model error, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] fockramp::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fockramp", version, about = "Fock-state preparation by quasi-adiabatic double-well ramps")]
struct Cli {
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached spectral sweeps (overrides FOCKRAMP_CACHE_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Config file with [run] and [potential] sections.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Where the potential comes from.
#[derive(Debug, Clone, Default, Args)]
pub struct Source {
    /// Built-in preset (see `presets list`).
    #[arg(long, conflicts_with = "inline")]
    pub preset: Option<String>,
    /// Inline parameters, e.g. `A0=-0.25,Af=0.5,B0=0.002` or `A=0.5,B=0,C=0`.
    #[arg(long, value_name = "KEY=VALUE,...")]
    pub inline: Option<String>,
    /// Target Fock index.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenstates with energies and localization.
    Eigen {
        #[command(flatten)]
        source: Source,
        /// Number of eigenstates.
        #[arg(long)]
        k: Option<usize>,
        /// Value of A along the path (default: the initial A0).
        #[arg(long, allow_hyphen_values = true)]
        at: Option<f64>,
    },
    /// Design a schedule A(t) and write it to a file.
    Design {
        #[command(flatten)]
        source: Source,
        /// faquad, la or linear.
        #[arg(long)]
        method: Option<String>,
        /// Final time (unit suffix ns/us/ms/s for SI presets).
        #[arg(long)]
        tf: Option<String>,
        /// Output schedule file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fidelity versus final time.
    Scan {
        #[command(flatten)]
        source: Source,
        /// Comma-separated methods: faquad, la, linear.
        #[arg(long)]
        method: Option<String>,
        /// Comma-separated final times.
        #[arg(long, conflicts_with = "tf_range")]
        tf: Option<String>,
        /// Evenly spaced final times, lo:hi:count.
        #[arg(long, value_name = "LO:HI:COUNT")]
        tf_range: Option<String>,
        /// Also score |0⟩ → |0⟩ and the mean of both fidelities.
        #[arg(long)]
        superposition: bool,
        /// Run each schedule forward and reversed.
        #[arg(long, conflicts_with = "superposition")]
        demux: bool,
        /// CSV output (one file per method: NAME-METHOD.csv when several).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// gnuplot script plotting the CSV files.
        #[arg(long, value_name = "FILE")]
        plot: Option<PathBuf>,
    },
    /// Built-in presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Debug, Subcommand)]
enum PresetsAction {
    /// List preset names and descriptions.
    List,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => config::FileConfig::load(p)?,
        None => config::FileConfig::default(),
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => file.run_parsed::<usize>("threads")?,
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))?;
    }
    let cache_dir = cli
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(fockramp::spectral::cache::CACHE_DIR_ENV).map(PathBuf::from))
        .or_else(|| file.run_value("cache-dir").map(PathBuf::from));
    let ctx = commands::Context { file, cache_dir };
    match cli.command {
        Command::Eigen { source, k, at } => commands::eigen(&ctx, &source, k, at),
        Command::Design { source, method, tf, output } => commands::design(&ctx, &source, method, tf, output),
        Command::Scan { source, method, tf, tf_range, superposition, demux, output, plot } => {
            let opts = commands::ScanArgs { method, tf, tf_range, superposition, demux, output, plot };
            commands::scan(&ctx, &source, opts)
        }
        Command::Presets { action: PresetsAction::List } => {
            commands::presets_list();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fockramp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
