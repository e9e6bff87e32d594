use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use cdo_ld_core::asymptotics::{lambda_curve, sstar_curve, LimitMode};
use cdo_ld_core::pool::{build_loss_measure, LossProbMeasure};

use crate::args::{CurveKind, LimitModeArg};
use crate::commands::price::{result_record, RESULT_COLUMNS};
use crate::config::Config;
use crate::error::{CliError, EXIT_OK};
use crate::output::{csv_file, num, stdout_err};

pub fn run(
    cfg: &Config,
    out_dir: &Path,
    which: CurveKind,
    mode: Option<LimitModeArg>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(CliError::io(format!("cannot create {}", out_dir.display())))?;
    let limit = cfg.limiting()?;
    if matches!(which, CurveKind::Lambda | CurveKind::All) {
        let path = out_dir.join("lambda_curve.csv");
        let rows = write_lambda(cfg, limit.as_ref(), &path)?;
        writeln!(out, "wrote {} ({rows} rows)", path.display()).map_err(stdout_err)?;
    }
    if matches!(which, CurveKind::Sstar | CurveKind::All) {
        let mode = match (mode, &limit) {
            (Some(LimitModeArg::Limiting), None) => {
                return Err(CliError::Config("--limit-mode limiting needs a merton_gamma pool".into()))
            }
            (Some(LimitModeArg::Pool), _) | (None, None) => LimitMode::Pool,
            (_, Some(_)) => LimitMode::Limiting,
        };
        for (path, rows) in write_sstar(cfg, limit.as_ref(), mode, out_dir)? {
            writeln!(out, "wrote {} ({rows} rows)", path.display()).map_err(stdout_err)?;
        }
    }
    Ok(EXIT_OK)
}

/// Tilted mean against `λ` for the limiting measure when there is one,
/// otherwise for the pool's own measure.
fn write_lambda(cfg: &Config, limit: Option<&LossProbMeasure>, path: &Path) -> Result<usize, CliError> {
    let c = &cfg.curves;
    let m = match limit {
        Some(m) => m.clone(),
        None => build_loss_measure(&cfg.pool()?, cfg.tranche.horizon),
    };
    let step = (c.lambda_max - c.lambda_min) / (c.lambda_steps - 1) as f64;
    let grid: Vec<f64> = (0..c.lambda_steps)
        .map(|k| if k + 1 == c.lambda_steps { c.lambda_max } else { c.lambda_min + step * k as f64 })
        .collect();
    let curve = lambda_curve(&m, &grid)?;
    let mut w = csv_file(path)?;
    w.write_record(["lambda", "tilted_mean"])?;
    for (l, mean) in &curve {
        w.write_record([num(*l), num(*mean)])?;
    }
    w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
    Ok(curve.len())
}

fn write_sstar(
    cfg: &Config,
    limit: Option<&LossProbMeasure>,
    mode: LimitMode,
    out_dir: &Path,
) -> Result<Vec<(std::path::PathBuf, usize)>, CliError> {
    let horizon = cfg.tranche.horizon;
    let family = cfg.pool.as_ref().ok_or_else(|| CliError::Config("spread curves need a pool".into()))?;
    let mut measures = BTreeMap::new();
    for &n in &cfg.curves.n_list {
        let pool = family.resized(n).ok_or_else(|| {
            CliError::Config("spread curves need a pool family with a size parameter (merton_gamma or two_type)".into())
        })?;
        measures.insert(n, build_loss_measure(&pool.build(horizon)?, horizon));
    }
    let tranche = cfg.tranche()?;
    let alphas = if cfg.curves.alphas.is_empty() {
        vec![tranche.attachment]
    } else {
        cfg.curves.alphas.clone()
    };
    let mut written = Vec::new();
    for alpha in alphas {
        let t = tranche.with_attachment(alpha)?;
        let rows = sstar_curve(|n| Ok(measures[&n].clone()), limit, &t, &cfg.curves.n_list, mode)?;
        let path = out_dir.join(format!("sstar_alpha_{alpha}.csv"));
        let mut w = csv_file(&path)?;
        let mut header: Vec<&str> = RESULT_COLUMNS.to_vec();
        header.push("status");
        w.write_record(&header)?;
        for row in &rows {
            let record = match &row.result {
                Ok(r) => {
                    let mut rec = result_record(r);
                    rec.push("ok".into());
                    rec
                }
                Err(e) => {
                    let mut rec = vec![row.n.to_string()];
                    rec.extend(std::iter::repeat(String::new()).take(RESULT_COLUMNS.len() - 1));
                    rec.push(e.to_string());
                    rec
                }
            };
            w.write_record(&record)?;
        }
        w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
        written.push((path, rows.len()));
    }
    Ok(written)
}
