mod commands;
mod output;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "gowers-lab", version, about = "Higher-order Fourier analysis laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output file (or directory for `suite`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; falls back to GOWERS_LAB_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print JSON instead of a plain summary.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Λ_k of a function or set with itself.
    CountAps {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        input: PathBuf,
        /// Use the Fourier identity (k = 3, odd M).
        #[arg(long)]
        fourier: bool,
        /// Skip the direct-count size guard.
        #[arg(long)]
        force: bool,
    },
    /// U^s norm of a function.
    GowersNorm {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Recursive)]
        method: MethodArg,
        /// Treat the input as supported on [N] and use the interval norm.
        #[arg(long)]
        interval: Option<usize>,
        /// Omit the wall-clock field so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Largest Fourier coefficient and the U² guarantee.
    InverseU2 {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        input: PathBuf,
    },
    /// Recover a polynomial over F_p from its values.
    ToyInverse {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        s: usize,
        /// Coefficients a0,a1,... in increasing degree.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        poly: Vec<u64>,
    },
    /// Build one of the extremal constructions.
    Construct {
        #[arg(value_enum)]
        kind: KindArg,
        /// Comma-separated key=value pairs, e.g. M=20001,w=20.
        #[arg(long, default_value = "")]
        params: String,
    },
    /// Nilsequence tools.
    Nilseq {
        #[arg(value_enum)]
        action: NilseqAction,
        #[arg(long, default_value = "")]
        params: String,
    },
    /// Run the density-increment loop on a subset of [N].
    RothIncrement {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the trace (defaults to --out or stdout).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a battery of checks.
    Suite {
        #[arg(long, value_delimiter = ',', required = true)]
        preset: Vec<String>,
        /// Modulus for the quadphase preset.
        #[arg(long = "M")]
        modulus: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MethodArg {
    Naive,
    Recursive,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum KindArg {
    Behrend,
    Quadphase,
    Bohr,
    Blockrandom,
    Almostnil,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum NilseqAction {
    Eval,
    CheckPoly,
    Bracket,
    Weyl,
}

fn configure_threads(global: &Global) -> Result<(), Failure> {
    let threads = match global.threads {
        Some(t) => Some(t),
        None => match std::env::var("GOWERS_LAB_THREADS") {
            Ok(v) if !v.is_empty() => {
                Some(v.parse().map_err(|_| Failure::Usage(format!("GOWERS_LAB_THREADS={v} is not a count")))?)
            }
            _ => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        gowers_core::par::init_global_threads(t).map_err(Failure::Usage)?;
    }
    Ok(())
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
    let result = configure_threads(&cli.global).and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
