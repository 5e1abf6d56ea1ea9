mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Estimation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ldps::Error> for CliError {
    fn from(e: ldps::Error) -> Self {
        use ldps::Error as E;
        match e {
            E::KEstimationFailed => CliError::Estimation(e.to_string()),
            E::Io(_) | E::Csv(_) | E::Json(_) | E::MalformedFile { .. } | E::ParseError { .. } => {
                CliError::Io(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("LDPS_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("LDPS_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let seed = cli.seed;
    match cli.command {
        Command::GenData(a) => commands::gen_data(&a, seed),
        Command::EstimateK(a) => commands::estimate_k(&a),
        Command::Cluster(a) => commands::cluster(&a, seed),
        Command::Benchmark(a) => commands::benchmark(&a, seed),
        Command::VerifyTheorem1(a) => commands::verify_theorem1(&a, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ldps: {e}");
            ExitCode::from(e.code())
        }
    }
}
