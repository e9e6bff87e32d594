//! File formats, configuration and command implementations for the
//! `cdo-ld` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;

use args::{Cli, Command};
use commands::mc::McOptions;
use config::Config;
use error::CliError;

/// Run one command, writing its report to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Price {
            config,
            force,
            limit_mode,
            out: csv_out,
        } => commands::price::run(&Config::load(config)?, *force, *limit_mode, csv_out.as_deref(), out),
        Command::Validate { config } => commands::validate::run(&Config::load(config)?, out),
        Command::Curves {
            config,
            out_dir,
            which,
            limit_mode,
        } => commands::curves::run(&Config::load(config)?, out_dir, *which, *limit_mode, out),
        Command::Mc {
            config,
            samples,
            seed,
            estimator,
            report,
            clt_bound,
            out: csv_out,
        } => {
            let opts = McOptions {
                samples: *samples,
                seed: *seed,
                estimator: *estimator,
                report: *report,
                clt_bound: *clt_bound,
                out: csv_out.as_deref(),
            };
            commands::mc::run(&Config::load(config)?, &opts, out)
        }
        Command::PoolGen {
            config,
            out: path,
            grid_points,
        } => commands::pool_gen::run(&Config::load(config)?, path, *grid_points, out),
    }
}
