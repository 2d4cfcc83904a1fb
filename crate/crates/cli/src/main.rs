use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thinobst_cli::{report::write_files, run_certify, run_minimize, run_reproduce, workers_from_env, CaseConfig, CliError, Outcome, ReproduceArgs};
use thinobst_core::majorants::MinimizeOptions;
use thinobst_core::QuadConfig;

#[derive(Parser)]
#[command(name = "thinobst", version, about = "Guaranteed error majorants for thin obstacle and Signorini problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Report path; a `.csv` sidecar is written next to it. Prints JSON to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add wall time and worker count to the report (breaks byte-identity across runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one of the built-in examples (v1, v2, v3eps).
    Reproduce {
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        eps: Option<f64>,
        /// gradient_of_v or gradient_of_u
        #[arg(long, default_value = "gradient_of_v")]
        flux: String,
        #[arg(long)]
        triangle_degree: Option<usize>,
        #[arg(long)]
        segment_nodes: Option<usize>,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long)]
        no_grading: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate the majorants requested by a case config.
    Certify {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Iteratively improve the flux and parameters of a thin obstacle case.
    Minimize {
        config: PathBuf,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        /// Degree of the polynomial flux correction.
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[command(flatten)]
        output: Output,
    },
}

fn load(path: &Path) -> Result<CaseConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    CaseConfig::parse(&text)
}

fn emit(outcome: Outcome, output: &Output) -> Result<(), CliError> {
    match &output.out {
        Some(p) => write_files(p, &outcome.report, &outcome.rows),
        None => {
            print!("{}", outcome.report.to_text()?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = workers_from_env()? {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Reproduce { example, a, eps, flux, triangle_degree, segment_nodes, level, no_grading, output } => {
            let mut quadrature = QuadConfig::default();
            if let Some(d) = triangle_degree {
                quadrature.triangle_degree = d;
            }
            if let Some(n) = segment_nodes {
                quadrature.segment_nodes = n;
            }
            if let Some(l) = level {
                quadrature.level = l;
            }
            quadrature.graded = !no_grading;
            let args = ReproduceArgs { example, a, eps, flux, quadrature };
            emit(run_reproduce(&args, output.timing)?, &output)
        }
        Command::Certify { config, output } => emit(run_certify(&load(&config)?, output.timing)?, &output),
        Command::Minimize { config, iterations, degree, output } => {
            let opts = MinimizeOptions { iterations, degree, ..MinimizeOptions::default() };
            emit(run_minimize(&load(&config)?, &opts, output.timing)?, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
