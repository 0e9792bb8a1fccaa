use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levelscope::experiment::{parse_pairs, run_experiment, ExperimentConfig};
use levelscope::lob::{validate_events_file, write_events};
use levelscope::report::{load_records, write_reports};
use levelscope::synth::{generate, SynthConfig};
use levelscope::Error;

#[derive(Parser)]
#[command(name = "levelscope", version, about = "Order-book level selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Maximum number of concurrent threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic event file.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build tables and figures from a directory of run records.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an event file against the book invariants.
    ValidateData {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else if matches!(e, Error::Config(_) | Error::Argument(_)) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn synth_config(path: &Path) -> Result<SynthConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let pairs = parse_pairs(&text)?
        .into_iter()
        .map(|(k, v)| (k.strip_prefix("synth.").unwrap_or(&k).to_string(), v))
        .collect();
    Ok(SynthConfig::from_pairs(&pairs)?)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, jobs, out } => {
            let mut cfg = ExperimentConfig::from_file(&config).map_err(|e| match e {
                Error::Io { .. } => Failure::Usage(e.to_string()),
                e => e.into(),
            })?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let outcome = run_experiment(&cfg, jobs)?;
            println!(
                "{} run records, {} report files in {}",
                outcome.record_files.len(),
                outcome.report_files.len(),
                cfg.output_dir.display()
            );
        }
        Command::GenData { config, out } => {
            let cfg = synth_config(&config)?;
            let events = generate(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            write_events(&out, &events)?;
            println!("{} events over {} days written to {}", events.len(), cfg.days, out.display());
        }
        Command::Report { input, out } => {
            let records = load_records(&input).map_err(|e| match e {
                Error::Io { .. } => Failure::Data(e.to_string()),
                e => e.into(),
            })?;
            let files = write_reports(&records, &out)?;
            println!("{} records summarized into {} files", records.len(), files.len());
        }
        Command::ValidateData { input } => {
            let (rows, violations) =
                validate_events_file(&input).map_err(|e| Failure::Data(e.to_string()))?;
            for v in &violations {
                println!("{v}");
            }
            println!("{rows} rows, {} violations", violations.len());
            if !violations.is_empty() {
                return Err(Failure::Data(format!("{} violations", violations.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
