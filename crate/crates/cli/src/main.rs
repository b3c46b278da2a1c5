//! `sigkit`: signatures, signature kernels, two-sample tests, regression and
//! CDE solvers from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 numerical failure.

mod commands;
mod inputs;
mod json;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::Recorder;

#[derive(Debug, Parser)]
#[command(name = "sigkit", version, about = "Path signatures, signature kernels and CDE solvers")]
struct Cli {
    /// Write the run manifest here instead of to stderr.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Do not emit a run manifest.
    #[arg(long, global = true)]
    no_manifest: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize, serde::Deserialize, Clone, Copy)]
struct PathArgs {
    /// Add time as the first channel.
    #[arg(long)]
    time_augment: bool,
    /// Prepend the origin so the path starts at zero.
    #[arg(long)]
    basepoint: bool,
}

#[derive(Debug, Args, Serialize, Clone)]
struct KernelArgs {
    /// Kernel configuration as JSON; replaces the other kernel flags.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["method", "depth", "lambda", "phi", "samples", "nodes", "seed"])]
    kernel_config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<KernelMethodArg>,
    /// Truncation depth (truncated method).
    #[arg(long)]
    depth: Option<usize>,
    /// Dyadic refinement of the PDE grid.
    #[arg(long)]
    lambda: Option<u32>,
    /// Level weights: ones, constant:c, table:v0,v1,..., geometric:theta,
    /// sqrt-exp, exponential:rate, or JSON.
    #[arg(long)]
    phi: Option<String>,
    /// Monte Carlo draws (weighted-mc).
    #[arg(long)]
    samples: Option<usize>,
    /// Quadrature nodes (weighted-quadrature).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KernelMethodArg {
    Truncated,
    Pde,
    WeightedMc,
    WeightedQuadrature,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SigFormat {
    /// `{"d", "N", "levels"}`.
    Dense,
    /// `{"d", "N", "coefficients": {"1,2": ...}}`.
    Words,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GramFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    /// Kernel ridge regression.
    Ridge,
    /// Linear regression on truncated signatures.
    Signature,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RegularizerArg {
    None,
    Tikhonov,
    Lasso,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Signature or log-signature of one CSV path.
    Sig {
        input: PathBuf,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        path: PathArgs,
        /// Log-signature in the Lyndon basis.
        #[arg(long)]
        log: bool,
        #[arg(long, value_enum, default_value = "dense")]
        format: SigFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Kernel value between two CSV paths.
    Kernel {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        path: PathArgs,
        /// Dump the PDE solution grid as tidy CSV (pde method).
        #[arg(long, value_name = "FILE")]
        grid: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Gram matrix of a sample (directory of CSVs or list file).
    Gram {
        sample: PathBuf,
        /// Second sample for a rectangular cross Gram.
        #[arg(long)]
        cross: Option<PathBuf>,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: GramFormat,
        /// Worker threads for pair evaluation.
        #[arg(long, env = "SIGKIT_JOBS")]
        jobs: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Kernel two-sample test between two samples.
    MmdTest {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Kernel bound M; defaults to the largest Gram entry.
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long, env = "SIGKIT_JOBS")]
        jobs: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit a regression model and write it as JSON.
    Fit {
        /// Training sample (directory of CSVs or list file).
        sample: PathBuf,
        /// Targets CSV, one row per training path in sample order.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, value_enum, default_value = "ridge")]
        model: ModelKind,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        path: PathArgs,
        /// Ridge penalty, or the Tikhonov/LASSO weight.
        #[arg(long, default_value_t = 1e-6)]
        reg_lambda: f64,
        /// Extra diagonal shift for kernel ridge.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Signature regression penalty.
        #[arg(long, value_enum, default_value = "none")]
        regularizer: RegularizerArg,
        #[arg(long, env = "SIGKIT_JOBS")]
        jobs: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Predict with a fitted model.
    Predict {
        sample: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, env = "SIGKIT_JOBS")]
        jobs: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a CDE problem file; writes the trajectory as CSV.
    Solve {
        problem: PathBuf,
        /// Driver CSV; overrides the problem's `driver`.
        #[arg(long)]
        driver: Option<PathBuf>,
        #[command(flatten)]
        path: PathArgs,
        /// Gradient of the loss at the terminal state; enables the adjoint.
        #[arg(long, value_name = "G1,G2,...", requires = "adjoint_output")]
        adjoint: Option<String>,
        /// Where to write the adjoint gradient JSON.
        #[arg(long, value_name = "FILE")]
        adjoint_output: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convergence-order harness for a CDE problem.
    Order {
        problem: PathBuf,
        #[arg(long)]
        driver: Option<PathBuf>,
        #[command(flatten)]
        path: PathArgs,
        /// Step counts, each dividing the number of driver segments.
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<usize>,
        /// Reference terminal state; defaults to an exact per-segment solve.
        #[arg(long, value_name = "Y1,Y2,...")]
        reference: Option<String>,
        /// Tidy error table.
        #[arg(long, value_name = "FILE")]
        table: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample piecewise-linear Brownian motion to CSV.
    Brownian {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        steps: usize,
        /// Step size.
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        /// Correlation of the two channels (dim 2 only).
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sig { .. } => "sig",
            Command::Kernel { .. } => "kernel",
            Command::Gram { .. } => "gram",
            Command::MmdTest { .. } => "mmd-test",
            Command::Fit { .. } => "fit",
            Command::Predict { .. } => "predict",
            Command::Solve { .. } => "solve",
            Command::Order { .. } => "order",
            Command::Brownian { .. } => "brownian",
        }
    }
}

fn exit_code(err: &sigkit::Error) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut rec = Recorder::start();
    let result = commands::run(&cli.command, &mut rec);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e)
        }
    };
    if !cli.no_manifest {
        let config = serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null);
        let m = rec.finish(
            cli.command.name(),
            config,
            code.into(),
            result.as_ref().err().map(ToString::to_string),
        );
        let written = match &cli.manifest {
            Some(path) => std::fs::File::create(path)
                .map_err(sigkit::Error::from)
                .and_then(|f| json::to_writer(f, &m)),
            None => json::to_writer(std::io::stderr().lock(), &m),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write the run manifest: {e}");
            if code == 0 {
                return ExitCode::from(2);
            }
        }
    }
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
