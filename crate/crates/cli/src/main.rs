//! `qsep`: batch front end for dataset generation, augmentation, the
//! Frank-Wolfe solver and the kernel classifier.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation or I/O error,
//! 3 generator starvation. `QSEP_THREADS` caps the worker pool.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "qsep", version, about = "Entanglement dataset generation and classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct DimArgs {
    #[arg(long)]
    pub dim_a: usize,
    #[arg(long)]
    pub dim_b: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Separable states from random product mixtures.
    GenSep {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Largest number of product terms (default p²).
        #[arg(long)]
        r_max: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random mixtures with a negative partial transpose.
    GenNppt {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// PPT states certified entangled by a validated witness.
    GenPptEnt {
        #[command(flatten)]
        dims: DimArgs,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        /// Frank-Wolfe iterations per candidate.
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Separable states used to validate each witness.
        #[arg(long, default_value_t = 10_000)]
        n_validation: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// New PPT-entangled samples from the robustness regions of existing ones.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of PPT_ENT samples from the input used as seeds.
        #[arg(long)]
        seeds_n: usize,
        #[arg(long)]
        out_n: usize,
        #[arg(long, default_value_t = 0.5)]
        unitary_frac: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Nearest separable state for every sample; writes a per-sample summary CSV.
    Fw {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 1e-7)]
        gap_tol: f64,
        #[arg(long)]
        seed: u64,
        /// Per-iteration distances (`id,iteration,distance`).
        #[arg(long)]
        trajectory_out: Option<PathBuf>,
        /// Summary CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-checks every sample's label and revalidates stored witnesses.
    WitnessCheck {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n_validation: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Bloch-vector features as CSV.
    Features {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated kernel classifier, separable vs entangled.
    Train {
        #[arg(long)]
        train: PathBuf,
        /// Fraction of the entangled class drawn from PPT_ENT.
        #[arg(long, default_value_t = 0.0)]
        ppt_ratio: f64,
        /// Build the PPT_ENT portion by augmenting a few seeds.
        #[arg(long)]
        augment: bool,
        #[arg(long, default_value_t = 10)]
        augment_seeds: usize,
        #[arg(long, default_value_t = 0.5)]
        unitary_frac: f64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        standardize: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Per-class recall of a trained model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Report CSV; stdout when omitted.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Fractions of random k-mixtures classified separable, PPT, and in the separable ball.
    KSweep {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        dims: DimArgs,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
        /// Samples per k.
        #[arg(short = 'n', default_value_t = 200)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean and std of the Frank-Wolfe distance per iteration, per class.
    FigErrorCurve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classifier scores on solver-produced separable states.
    FwLimitation {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Add solver outputs to the separable training class.
        #[arg(long)]
        include_fw: bool,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Ok(v) = std::env::var("QSEP_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                qsep_core::par::init_thread_pool(n);
            }
            _ => {
                eprintln!("error: QSEP_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
