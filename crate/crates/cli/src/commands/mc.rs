use std::io::Write;
use std::path::Path;

use cdo_ld_core::asymptotics::spread_asymptotic;
use cdo_ld_core::montecarlo::{
    block_count, local_clt_check, tilt_pool, BlockStats, HnBins, McEstimate, PathSampler, Payoff,
};
use cdo_ld_core::pool::{build_loss_measure, PoolSpec, TrancheSpec};
use rayon::prelude::*;

use crate::args::{EstimatorArg, ReportKind};
use crate::config::Config;
use crate::error::{CliError, EXIT_OK};
use crate::output::{csv_file, num, stdout_err, Report};

pub const THREADS_ENV: &str = "CDO_LD_THREADS";

pub struct McOptions<'a> {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub estimator: EstimatorArg,
    pub report: ReportKind,
    pub clt_bound: Option<f64>,
    pub out: Option<&'a Path>,
}

/// Worker pool honouring `CDO_LD_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

/// Blocks run in parallel and are merged in block order, so the result does
/// not depend on the worker count.
fn estimate(
    workers: &rayon::ThreadPool,
    sampler: &PathSampler,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, CliError> {
    let blocks: Vec<BlockStats> = workers.install(|| {
        (0..block_count(samples))
            .into_par_iter()
            .map(|b| sampler.run_block(seed, b, samples))
            .collect()
    });
    Ok(sampler.finish(&blocks, seed)?)
}

pub fn run(cfg: &Config, opts: &McOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let pool = cfg.pool()?;
    let tranche = cfg.tranche()?;
    let samples = opts.samples.unwrap_or(cfg.mc.samples);
    let seed = opts.seed.unwrap_or(cfg.mc.seed);
    if samples == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    let workers = thread_pool()?;
    match opts.report {
        ReportKind::Estimate => {
            report_estimate(&workers, &pool, &tranche, samples, seed, opts.estimator, out)
        }
        ReportKind::Hn => report_hn(&workers, &pool, &tranche, samples, seed, opts.out, out),
        ReportKind::Clt => {
            let bound = opts.clt_bound.unwrap_or(cfg.mc.clt_bound);
            report_clt(&pool, &tranche, bound, opts.out, out)
        }
    }
}

fn report_estimate(
    workers: &rayon::ThreadPool,
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    samples: usize,
    seed: u64,
    which: EstimatorArg,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let asymptotic = spread_asymptotic(&build_loss_measure(pool, tranche.horizon), tranche, pool.len());
    let mut rep = Report::new(out);
    rep.field("seed", seed).map_err(stdout_err)?;
    rep.field("samples", samples).map_err(stdout_err)?;
    rep.field("n", pool.len()).map_err(stdout_err)?;
    match &asymptotic {
        Ok(r) => {
            rep.num("asymptotic_leg", r.protection_leg).map_err(stdout_err)?;
            rep.num("ln_asymptotic_leg", r.ln_protection_leg).map_err(stdout_err)?;
        }
        Err(e) => rep.field("asymptotic_leg", format!("unavailable ({e})")).map_err(stdout_err)?,
    }

    let mut results = Vec::new();
    if matches!(which, EstimatorArg::Plain | EstimatorArg::Both) {
        let probs = pool.default_probs(tranche.horizon);
        let sampler = PathSampler::plain(pool, &probs, tranche, Payoff::Protection);
        results.push(("plain", estimate(workers, &sampler, samples, seed)?));
    }
    if matches!(which, EstimatorArg::Is | EstimatorArg::Both) {
        let tilted = tilt_pool(pool, tranche)?;
        let sampler = PathSampler::tilted(&tilted, tranche, Payoff::Protection);
        results.push(("is", estimate(workers, &sampler, samples, seed)?));
    }
    for (name, e) in &results {
        rep.num(&format!("{name}.estimate"), e.mean).map_err(stdout_err)?;
        rep.num(&format!("{name}.standard_error"), e.standard_error).map_err(stdout_err)?;
        rep.num(&format!("{name}.ln_estimate"), e.ln_mean).map_err(stdout_err)?;
        rep.num(&format!("{name}.scaled_mean"), e.scaled_mean).map_err(stdout_err)?;
        rep.num(&format!("{name}.scaled_standard_error"), e.scaled_standard_error)
            .map_err(stdout_err)?;
        rep.num(&format!("{name}.ln_exponent"), e.ln_exponent).map_err(stdout_err)?;
        rep.field(&format!("{name}.positive_samples"), e.positive_samples).map_err(stdout_err)?;
        if let Ok(r) = &asymptotic {
            rep.num(&format!("{name}.ratio_to_asymptotic"), (e.ln_mean - r.ln_protection_leg).exp())
                .map_err(stdout_err)?;
        }
    }
    if let [(_, p), (_, q)] = results.as_slice() {
        let combined = (p.standard_error.powi(2) + q.standard_error.powi(2)).sqrt();
        let z = (p.mean - q.mean).abs() / combined;
        let verdict = if z <= 3.0 { "PASS" } else { "FAIL" };
        rep.line(format!("agreement {verdict}: |plain - is| = {z:.3} combined standard errors (bound 3)"))
            .map_err(stdout_err)?;
    }
    Ok(EXIT_OK)
}

const HN_COLUMNS: [&str; 7] = ["s", "samples", "mean", "standard_error", "reference", "ratio", "flagged"];

fn report_hn(
    workers: &rayon::ThreadPool,
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    samples: usize,
    seed: u64,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let tilted = tilt_pool(pool, tranche)?;
    let sampler = PathSampler::tilted(&tilted, tranche, Payoff::Protection);
    let parts: Vec<HnBins> = workers.install(|| {
        (0..block_count(samples))
            .into_par_iter()
            .map(|b| sampler.run_hn_block(seed, b, samples))
            .collect()
    });
    let mut bins = HnBins::default();
    for p in &parts {
        bins.merge(p);
    }
    let records: Vec<Vec<String>> = sampler
        .hn_rows(&bins)
        .iter()
        .map(|r| {
            vec![
                num(r.s),
                r.samples.to_string(),
                num(r.mean),
                num(r.standard_error),
                num(r.reference),
                num(r.ratio),
                r.flagged.to_string(),
            ]
        })
        .collect();
    write_table(&format!("seed {seed}, samples {samples}"), &HN_COLUMNS, &records, csv_out, out)?;
    Ok(EXIT_OK)
}

const CLT_COLUMNS: [&str; 4] = ["s", "count", "probability", "relative_error"];

fn report_clt(
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    bound: f64,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let tilted = tilt_pool(pool, tranche)?;
    let report = local_clt_check(&tilted.tilted_probs, tranche.attachment)?;
    let records: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![num(r.s), r.count.to_string(), num(r.probability), num(r.relative_error)])
        .collect();
    write_table(
        &format!("n {}, sigma_sq {}", report.n, num(report.sigma_sq)),
        &CLT_COLUMNS,
        &records,
        csv_out,
        out,
    )?;
    let verdict = if report.max_relative_error <= bound { "PASS" } else { "FAIL" };
    writeln!(
        out,
        "clt {verdict}: max relative error {} (bound {bound})",
        num(report.max_relative_error)
    )
    .map_err(stdout_err)?;
    Ok(EXIT_OK)
}

fn write_table(
    title: &str,
    header: &[&str],
    records: &[Vec<String>],
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    writeln!(out, "{title}").map_err(stdout_err)?;
    writeln!(out, "{}", header.join(",")).map_err(stdout_err)?;
    for r in records {
        writeln!(out, "{}", r.join(",")).map_err(stdout_err)?;
    }
    if let Some(path) = csv_out {
        let mut w = csv_file(path)?;
        w.write_record(header)?;
        for r in records {
            w.write_record(r)?;
        }
        w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
    }
    Ok(())
}
