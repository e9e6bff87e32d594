use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cdo-ld", version, about = "Large-pool asymptotics for CDO tranche pricing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic protection leg, premium leg and spread.
    Price {
        #[arg(long)]
        config: PathBuf,
        /// Price even if the not-flat assumption fails; with a correlation
        /// block, per-state assumption failures become warnings.
        #[arg(long)]
        force: bool,
        /// Where the pre-exponential multiplier and variance come from.
        #[arg(long, value_enum)]
        limit_mode: Option<LimitModeArg>,
        /// Also write the report as a one-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assumption checks plus rate and Merton oracles; nonzero exit on failure.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write curve data as CSV.
    Curves {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = CurveKind::All)]
        which: CurveKind,
        #[arg(long, value_enum)]
        limit_mode: Option<LimitModeArg>,
    },
    /// Monte Carlo estimators and diagnostics.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Is)]
        estimator: EstimatorArg,
        #[arg(long, value_enum, default_value_t = ReportKind::Estimate)]
        report: ReportKind,
        /// Pass threshold for the local CLT report.
        #[arg(long)]
        clt_bound: Option<f64>,
        /// CSV file for the hn and clt tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a merton_gamma pool as an explicit pool of tabulated names.
    PoolGen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grid points per name on [0, T].
        #[arg(long, default_value_t = 501)]
        grid_points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LimitModeArg {
    Pool,
    Limiting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    Lambda,
    Sstar,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Plain,
    Is,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Estimate,
    Hn,
    Clt,
}
