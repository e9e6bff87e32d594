use std::io::Write;
use std::path::Path;

use cdo_ld_core::merton::{gamma_merton_volatilities, GammaVolSpec, MertonParams};

use crate::config::{Config, NameConfig, NameLaw, PoolConfig};
use crate::error::{CliError, EXIT_OK};
use crate::output::stdout_err;

/// Tabulate every name of a `merton_gamma` pool on a uniform grid over
/// `[0, T]` and write the result as an explicit-pool config.
pub fn run(cfg: &Config, path: &Path, grid_points: usize, out: &mut dyn Write) -> Result<u8, CliError> {
    let Some(PoolConfig::MertonGamma {
        theta,
        barrier,
        sigma_scale,
        sigma_shape,
        n,
        ..
    }) = &cfg.pool
    else {
        return Err(CliError::Config("pool-gen needs a merton_gamma pool".into()));
    };
    if grid_points < 2 {
        return Err(CliError::Config("--grid-points must be at least 2".into()));
    }
    let horizon = cfg.tranche.horizon;
    let spec = GammaVolSpec::new(*sigma_scale, *sigma_shape)?;
    let names = gamma_merton_volatilities(&spec, *n)?
        .into_iter()
        .map(|sigma| {
            let params = MertonParams::new(*theta, *barrier, sigma)?;
            let mut points = Vec::with_capacity(grid_points);
            let mut running: f64 = 0.0;
            for k in 0..grid_points {
                let t = if k + 1 == grid_points {
                    horizon
                } else {
                    horizon * k as f64 / (grid_points - 1) as f64
                };
                running = running.max(params.cdf(t)).min(1.0);
                points.push((t, running));
            }
            Ok(NameConfig {
                count: 1,
                law: NameLaw::Tabulated {
                    points,
                    tail_mass: 1.0 - running,
                },
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let generated = Config {
        pool: Some(PoolConfig::Explicit { names }),
        correlation: None,
        ..cfg.clone()
    };
    let text = serde_json::to_string(&generated)
        .map_err(|e| CliError::Config(format!("cannot serialize pool: {e}")))?;
    std::fs::write(path, text + "\n").map_err(CliError::io(format!("cannot write {}", path.display())))?;
    writeln!(out, "wrote {n} tabulated names to {}", path.display()).map_err(stdout_err)?;
    Ok(EXIT_OK)
}
