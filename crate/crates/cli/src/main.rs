//! Command-line front end: the model-identity verification suite, the
//! composition calculator, and the projective experiments.
//!
//! Exit codes: 0 on success, 1 when an identity or experiment check fails,
//! 2 on usage/configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jetext_core::experiments::{run_experiment, ExperimentKind};
use jetext_core::kernels::compose;
use jetext_core::parse::parse_kernel_chain;
use jetext_core::report::ReportFormat;
use jetext_core::verify::{verify_all, VerifyOptions};

mod config;

#[derive(Parser)]
#[command(
    name = "jetext",
    version,
    about = "Model-kernel calculus and jet-extension experiments on projective spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct CommonOpts {
    /// structured config file (TOML); command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// ambient dimension
    #[arg(long)]
    n: Option<usize>,
    /// submanifold dimension
    #[arg(long)]
    m: Option<usize>,
    /// jet order
    #[arg(long)]
    k: Option<u32>,
    /// tensor-power range, e.g. 6..24
    #[arg(long)]
    p: Option<String>,
    /// submanifold kind: point | line | conic
    #[arg(long)]
    y_kind: Option<String>,
    /// rescaled grid radius for profile comparisons
    #[arg(long)]
    eps: Option<f64>,
    /// random seed (echoed into every report)
    #[arg(long)]
    seed: Option<u64>,
    /// quadrature order override (0 = auto)
    #[arg(long)]
    quad_order: Option<usize>,
    /// numeric tolerance for oracle comparisons
    #[arg(long)]
    tolerance: Option<f64>,
    /// output directory for reports
    #[arg(long)]
    out: Option<PathBuf>,
    /// report format emphasis: csv | json (both files are always written)
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the symbolic, Fock-matrix and quadrature-oracle identity suites
    VerifyModel {
        #[command(flatten)]
        common: CommonOpts,
        /// negative-control fixture: corrupt one composition on purpose
        #[arg(long, hide = true)]
        corrupt_fixture: bool,
    },
    /// Compose kernels given in the canonical text syntax and print the result
    Compose {
        #[command(flatten)]
        common: CommonOpts,
        /// e.g. "(1|Pperp0 2 1) o (z1*zb1|Pperp0 2 1)"
        expression: String,
    },
    /// Run a named experiment: peak-cp1 | line-cp2 | conic-cp2 | logbk-decay | isometry
    Experiment {
        #[command(flatten)]
        common: CommonOpts,
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let usage = matches!(
                e,
                jetext_core::Error::Config(_)
                    | jetext_core::Error::Parse { .. }
                    | jetext_core::Error::NonComposable(..)
            );
            if usage {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: Cli) -> jetext_core::Result<ExitCode> {
    match cli.command {
        Command::VerifyModel {
            common,
            corrupt_fixture,
        } => {
            // the identity suite defaults to its full range n <= 3, k <= 3
            let base = jetext_core::report::RunConfig {
                n: 3,
                k: 3,
                ..Default::default()
            };
            let cfg = config::resolve_with(&common, base)?;
            let opts = VerifyOptions {
                n_max: cfg.n.clamp(1, 3),
                k_max: cfg.k.min(3),
                seed: cfg.seed,
                oracle_tol: cfg.tolerance,
                oracle_order: cfg.quad_order,
                corrupt_fixture,
                ..Default::default()
            };
            let results = verify_all(&opts);
            let mut failures = 0;
            for r in &results {
                let status = if r.passed { "pass" } else { "FAIL" };
                if r.max_error.is_finite() && r.max_error > 0.0 {
                    println!("[{status}] {} (max error {:.3e})", r.name, r.max_error);
                } else {
                    println!("[{status}] {}", r.name);
                }
                if !r.passed {
                    failures += 1;
                }
            }
            println!(
                "verify-model: {} identities, {} failed (n <= {}, k <= {}, seed {})",
                results.len(),
                failures,
                opts.n_max,
                opts.k_max,
                opts.seed
            );
            Ok(if failures == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Compose { common, expression } => {
            let _ = config::resolve(&common)?; // validates flags even though compose is exact
            let kernels = parse_kernel_chain(&expression)?;
            let mut acc = kernels[0].clone();
            for next in &kernels[1..] {
                acc = compose(&acc, next)?;
            }
            println!("{acc}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { common, name } => {
            let cfg = config::resolve(&common)?;
            let kind = ExperimentKind::parse(&name)?;
            let report = run_experiment(kind, &cfg)?;
            let out_dir = cfg
                .out_dir
                .clone()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("reports"));
            let (csv_path, json_path) = report.write_files(&out_dir)?;
            for line in report.summary_lines() {
                println!("{line}");
            }
            match cfg.format {
                ReportFormat::Csv => println!("wrote {}", csv_path.display()),
                ReportFormat::Json => println!("wrote {}", json_path.display()),
            }
            println!("wrote {} and {}", csv_path.display(), json_path.display());
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
