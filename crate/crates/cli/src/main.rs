#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status 1 (check failure or internal error) or 2 (usage).
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(m: impl Into<String>) -> Self {
        Failure { code: 2, message: m.into() }
    }

    pub fn internal(m: impl Into<String>) -> Self {
        Failure { code: 1, message: m.into() }
    }
}

impl From<eqloc::Error> for Failure {
    fn from(e: eqloc::Error) -> Self {
        use eqloc::Error::*;
        let code = match e {
            InvalidArgument(_) | Parse(_) | NotDominant(_) | DimensionMismatch { .. } | UnsupportedKind(_)
            | ChamberOnWall(_) | CutoffTooSmall(_) | ZeroDirection | NoParallelFactor(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "eqloc", version, about = "Localization formulas, Yang-Mills sums and moment-map flows")]
pub struct Cli {
    /// `key = value` file; its entries override flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Defaults to $EQLOC_OUTPUT_DIR, then `eqloc-out`.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// json, csv or both.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true)]
    pub stop_threshold: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Duistermaat-Heckman measure of P1 or a coadjoint orbit.
    Dh(DhArgs),
    /// Run a suite of fixture identities.
    Verify {
        #[arg(value_parser = ["p1", "g2", "sawtooth", "volumes", "flow-rates"])]
        suite: String,
    },
    /// Yang-Mills sums.
    Ym {
        #[command(subcommand)]
        sub: YmCommand,
    },
    /// Gradient flow of |Phi|^2 / 2.
    Flow(FlowArgs),
    /// Induce the torus measure of a coadjoint orbit through the Euler class.
    Induce(InduceArgs),
    /// Norm-square stratum contributions.
    Normsq(NormsqArgs),
}

#[derive(Args, Debug)]
pub struct DhArgs {
    /// Circle weights `a < b` on the poles.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, conflicts_with = "orbit")]
    pub p1: Option<Vec<i64>>,
    /// Root system of the coadjoint orbit (A1, A2, G2).
    #[arg(long)]
    pub orbit: Option<String>,
    /// Dominant weight, comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// `+`/`-` for P1, a regular vector for orbits.
    #[arg(long, allow_hyphen_values = true)]
    pub chamber: Option<String>,
    #[arg(long)]
    pub normalization: Option<String>,
    /// Half-width of the density table window.
    #[arg(long)]
    pub window: Option<String>,
    /// Points per axis in the density table.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum YmCommand {
    Migdal {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        normalization: Option<String>,
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        cutoff: Option<f64>,
        /// Also write per-shell partial sums.
        #[arg(long)]
        shells: bool,
    },
    Wittenvol {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        normalization: Option<String>,
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        cutoff: Option<f64>,
        /// Use the constant dim(K)^{2g} instead of Vol(K)^{2g}.
        #[arg(long)]
        literal_dim: bool,
    },
    Sawtooth {
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long)]
        epsilon: Option<String>,
    },
    Hn {
        #[arg(long)]
        rank: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        degree: Option<i64>,
        #[arg(long)]
        bound: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    /// `Phi = |z|^2` on C.
    #[arg(long)]
    pub quartic: bool,
    /// `Phi = |z|^2 + c` on C.
    #[arg(long, allow_negative_numbers = true)]
    pub shifted: Option<String>,
    /// Circle action on P1 with weights `a < b`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub p1: Option<Vec<i64>>,
    /// Weight rows such as `1,0;-1,2`.
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
    /// Real coordinates `re_1,im_1,...` (affine coordinate for P1).
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of seeded starts for a P1 basin ensemble.
    #[arg(long)]
    pub ensemble: Option<usize>,
}

#[derive(Args, Debug)]
pub struct InduceArgs {
    #[arg(long)]
    pub group: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub chamber: Option<String>,
    #[arg(long)]
    pub normalization: Option<String>,
    /// Pair with the invariant Gaussian of this width.
    #[arg(long)]
    pub epsilon: Option<String>,
}

#[derive(Args, Debug)]
pub struct NormsqArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, conflicts_with = "g2")]
    pub p1: Option<Vec<i64>>,
    /// The SU(3) example on a G2 orbit.
    #[arg(long)]
    pub g2: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 2 {
                eprintln!("run `eqloc --help` for usage");
            }
            ExitCode::from(f.code)
        }
    }
}
