use std::io::Write;
use std::path::Path;

use cdo_ld_core::asymptotics::{spread_asymptotic, spread_asymptotic_mixed, AsymptoticResult, LimitMode};
use cdo_ld_core::correlation::{dominant_state, mixture_protection_leg, StatePolicy, SystemicMixture};
use cdo_ld_core::pool::{assess_pool, build_loss_measure, TrancheSpec};
use cdo_ld_core::Error;

use crate::args::LimitModeArg;
use crate::config::Config;
use crate::error::{CliError, EXIT_OK};
use crate::output::{csv_file, num, stdout_err, Report};

pub const RESULT_COLUMNS: [&str; 11] = [
    "n",
    "granularity",
    "lambda",
    "rate_i",
    "sigma_sq",
    "i2_factor",
    "protection_leg",
    "ln_protection_leg",
    "premium_leg",
    "spread",
    "ln_spread",
];

pub fn result_record(r: &AsymptoticResult) -> Vec<String> {
    let mut row = vec![r.n.to_string()];
    row.extend(
        [
            r.granularity,
            r.lambda,
            r.rate_i,
            r.sigma_sq,
            r.i2_factor,
            r.protection_leg,
            r.ln_protection_leg,
            r.premium_leg,
            r.spread,
            r.ln_spread,
        ]
        .map(num),
    );
    row
}

pub fn run(
    cfg: &Config,
    force: bool,
    mode: Option<LimitModeArg>,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let tranche = cfg.tranche()?;
    if let Some(mix) = cfg.mixture(&tranche)? {
        if mode.is_some() {
            return Err(CliError::Config("--limit-mode does not apply to correlation mixtures".into()));
        }
        let allow = force || cfg.correlation.as_ref().is_some_and(|c| c.allow_state_violations());
        return run_mixture(&mix, &tranche, cfg.pool_size()?, allow, csv_out, out);
    }

    let pool = cfg.pool()?;
    let n = pool.len();
    let alpha = tranche.attachment;
    let checks = assess_pool(&pool, &tranche, cfg.assumptions.delta, cfg.assumptions.epsilon)?;
    if !checks.ig_ok {
        return Err(Error::InvestmentGrade {
            mean: checks.mean_default_prob,
            alpha,
        }
        .into());
    }
    if !checks.nondegen_ok {
        return Err(Error::NonDegenerate {
            mass_at_zero: checks.zero_mass_fraction,
            bound: 1.0 - alpha,
        }
        .into());
    }
    let mut warnings = Vec::new();
    if !checks.notflat_ok {
        let msg = format!(
            "not-flat assumption violated: fraction {} of names have less than {} default mass in [T - {}, T), needs < {alpha}",
            checks.notflat_fraction, checks.not_flat_epsilon, checks.not_flat_delta
        );
        if !force {
            return Err(CliError::Assumption(format!("{msg}; rerun with --force to price anyway")));
        }
        warnings.push(msg);
    }

    let m = build_loss_measure(&pool, tranche.horizon);
    let (mode, result) = match mode {
        Some(LimitModeArg::Limiting) => {
            let limit = cfg
                .limiting()?
                .ok_or_else(|| CliError::Config("--limit-mode limiting needs a merton_gamma pool".into()))?;
            let r = spread_asymptotic_mixed(&m, &limit, &tranche, n, LimitMode::Limiting)?;
            ("limiting", r)
        }
        _ => ("pool", spread_asymptotic(&m, &tranche, n)?),
    };

    let mut rep = Report::new(out);
    for w in &warnings {
        rep.line(format!("warning: {w}")).map_err(stdout_err)?;
    }
    rep.field("limit_mode", mode).map_err(stdout_err)?;
    for (key, value) in RESULT_COLUMNS.iter().zip(result_record(&result)) {
        rep.field(key, value).map_err(stdout_err)?;
    }
    if let Some(path) = csv_out {
        let mut w = csv_file(path)?;
        w.write_record(RESULT_COLUMNS)?;
        w.write_record(result_record(&result))?;
        w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
    }
    Ok(EXIT_OK)
}

fn run_mixture(
    mix: &SystemicMixture,
    tranche: &TrancheSpec,
    n: usize,
    allow: bool,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let policy = StatePolicy {
        allow_state_violations: allow,
    };
    let legs = mixture_protection_leg(mix, tranche, n, policy)?;
    let mut rep = Report::new(out);
    rep.field("n", n).map_err(stdout_err)?;
    rep.field("states", legs.states.len()).map_err(stdout_err)?;
    rep.line("label,prob,lambda,rate_i,sigma_sq,protection_leg,weighted_leg")
        .map_err(stdout_err)?;
    for s in &legs.states {
        rep.line(state_row(s).join(",")).map_err(stdout_err)?;
        for w in &s.warnings {
            rep.line(format!("warning: state {}: {w}", s.label)).map_err(stdout_err)?;
        }
    }
    rep.num("protection_leg", legs.protection_leg).map_err(stdout_err)?;
    rep.num("premium_leg", legs.premium_leg).map_err(stdout_err)?;
    rep.num("spread", legs.spread).map_err(stdout_err)?;
    match dominant_state(mix, tranche, n, policy) {
        Ok(d) => {
            rep.field("dominant_state", &d.label).map_err(stdout_err)?;
            rep.num("dominant_rate_i", d.rate_i).map_err(stdout_err)?;
            rep.num("dominant_protection_leg", d.protection_leg).map_err(stdout_err)?;
            rep.num("dominant_spread", d.spread).map_err(stdout_err)?;
        }
        Err(e @ Error::NoUniqueDominantState { .. }) => {
            rep.field("dominant_state", format!("none ({e})")).map_err(stdout_err)?;
        }
        Err(e) => return Err(e.into()),
    }
    if let Some(path) = csv_out {
        let mut w = csv_file(path)?;
        w.write_record(["label", "prob", "lambda", "rate_i", "sigma_sq", "protection_leg", "weighted_leg"])?;
        for s in &legs.states {
            w.write_record(state_row(s))?;
        }
        w.write_record([
            "mixture".to_string(),
            num(1.0),
            String::new(),
            String::new(),
            String::new(),
            num(legs.protection_leg),
            num(legs.protection_leg),
        ])?;
        w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
    }
    Ok(EXIT_OK)
}

fn state_row(s: &cdo_ld_core::correlation::StateLeg) -> Vec<String> {
    vec![
        s.label.clone(),
        num(s.prob),
        num(s.result.lambda),
        num(s.result.rate_i),
        num(s.result.sigma_sq),
        num(s.result.protection_leg),
        num(s.weighted_leg),
    ]
}
