//! `nlperim`: nonlocal perimeter energies of periodic sets from the command line.

mod commands;
mod error;
mod output;
mod params;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use error::{CliError, Result};
use params::*;
use spec::{Format, Job, OutputArgs};

#[derive(Debug, Parser)]
#[command(name = "nlperim", version, about = "Nonlocal perimeter energies of periodic binary sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy of one configuration
    Energy {
        #[command(flatten)]
        params: EnergyParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Energy of lamellar patterns
    Stripes {
        #[command(flatten)]
        params: StripesParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Energy of balls on a lattice
    Balls {
        #[command(flatten)]
        params: BallsParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stripes against ball lattices over a range of volume fractions
    Phase {
        #[command(flatten)]
        params: PhaseParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Energies along a decreasing sequence of epsilons, with the limit
    Gamma {
        #[command(flatten)]
        params: GammaParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rescaled energies approaching the perimeter
    Davila {
        #[command(flatten)]
        params: DavilaParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulated annealing at fixed volume
    Anneal {
        #[command(flatten)]
        params: AnnealParams,
        /// JSON manifest with the same keys as the flags; replaces them
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the property suites; exits nonzero on any failure
    Verify {
        #[command(flatten)]
        params: VerifyParams,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a JSON run spec, or re-run the spec stored in a JSON artifact
    Run {
        spec: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn job_of(command: Command) -> Result<(Job, OutputArgs)> {
    Ok(match command {
        Command::Energy { params, output } => (Job::Energy(params), output),
        Command::Stripes { params, output } => (Job::Stripes(params), output),
        Command::Balls { params, output } => (Job::Balls(params), output),
        Command::Phase { params, output } => (Job::Phase(params), output),
        Command::Gamma { params, output } => (Job::Gamma(params), output),
        Command::Davila { params, output } => (Job::Davila(params), output),
        Command::Anneal { params, manifest, output } => {
            let params = match manifest {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
                }
                None => params,
            };
            (Job::Anneal(params), output)
        }
        Command::Verify { params, output } => (Job::Verify(params), output),
        Command::Run { spec, output } => {
            let s = spec::read_spec(&spec)?;
            let job = Job::from_spec(&s)?;
            let merged = OutputArgs { path: output.path.or(s.output.path), format: output.format.or(s.output.format) };
            (job, merged)
        }
    })
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("NLPERIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::usage(format!("NLPERIM_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size the thread pool: {e}")))
}

fn run(job: Job, output: OutputArgs) -> Result<bool> {
    let format = output.format.unwrap_or_else(|| job.default_format());
    let report = commands::execute(&job)?;
    let text = match format {
        Format::Csv => report.table.to_csv(),
        Format::Json => {
            let spec = job.to_spec(OutputArgs { path: output.path.clone(), format: Some(format) });
            let artifact = output::round_json(json!({"spec": spec, "result": report.result}));
            serde_json::to_string_pretty(&artifact)? + "\n"
        }
    };
    output::emit(output.path.as_deref(), &text)?;
    Ok(report.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (job, output) = match configure_threads().and_then(|()| job_of(cli.command)) {
        Ok(v) => v,
        Err(e) => return fail(None, e),
    };
    let name = job.command();
    match run(job, output) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => fail(Some(name), e),
    }
}

fn fail(command: Option<spec::CommandName>, e: CliError) -> ExitCode {
    let code = e.exit_code();
    if code == 3 {
        let diag = json!({"status": "divergent", "command": command, "message": e.to_string()});
        println!("{}", serde_json::to_string_pretty(&diag).expect("diagnostic serializes"));
    }
    eprintln!("error: {e}");
    ExitCode::from(code)
}
