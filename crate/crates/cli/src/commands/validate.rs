use std::io::Write;

use cdo_ld_core::entropy::{brute_force_rate, hbar, rate_i};
use cdo_ld_core::merton::{merton_default_prob, merton_default_prob_closed, MertonParams};
use cdo_ld_core::pool::{
    assess_pool, build_loss_measure, check_investment_grade, check_nondegeneracy,
    DefaultDistribution, LossProbMeasure, PoolSpec, TrancheSpec,
};

use crate::config::Config;
use crate::error::{CliError, EXIT_ASSUMPTION, EXIT_NUMERIC, EXIT_OK};
use crate::output::stdout_err;

const MERTON_TOL: f64 = 1e-6;
const MERTON_SAMPLE: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Warn,
    Skip,
    Info,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        }
    }
}

struct Checks<'a> {
    out: &'a mut dyn Write,
    assumption_failures: usize,
    oracle_failures: usize,
    total: usize,
}

impl Checks<'_> {
    fn emit(&mut self, name: &str, status: Status, detail: String, oracle: bool) -> Result<(), CliError> {
        if status == Status::Fail {
            if oracle {
                self.oracle_failures += 1;
            } else {
                self.assumption_failures += 1;
            }
        }
        if matches!(status, Status::Pass | Status::Fail | Status::Warn) {
            self.total += 1;
        }
        writeln!(self.out, "{name:<28}{:<6}{detail}", status.label()).map_err(stdout_err)
    }
}

pub fn run(cfg: &Config, out: &mut dyn Write) -> Result<u8, CliError> {
    let tranche = cfg.tranche()?;
    let alpha = tranche.attachment;
    let mut checks = Checks {
        out,
        assumption_failures: 0,
        oracle_failures: 0,
        total: 0,
    };

    if cfg.pool.is_some() {
        let pool = cfg.pool()?;
        pool_checks(cfg, &pool, &tranche, "", &mut checks)?;
        rate_oracle(&build_loss_measure(&pool, tranche.horizon), alpha, "", &mut checks)?;
        merton_oracle(&pool, tranche.horizon, "", &mut checks)?;
    }

    if let Some(mix) = cfg.mixture(&tranche)? {
        let allow = cfg.correlation.as_ref().is_some_and(|c| c.allow_state_violations());
        let soft = |ok: bool| match (ok, allow) {
            (true, _) => Status::Pass,
            (false, true) => Status::Warn,
            (false, false) => Status::Fail,
        };
        let per_state_oracles = cfg.pool.is_none();
        for s in mix.states() {
            let prefix = format!("[{}] ", s.label);
            let ig = check_investment_grade(&s.measure, alpha);
            checks.emit(
                &format!("{prefix}A:IG"),
                soft(ig.ok),
                format!("mean default probability {} vs attachment {alpha}", ig.value),
                false,
            )?;
            let nd = check_nondegeneracy(&s.measure, alpha);
            checks.emit(
                &format!("{prefix}A:NonDegen"),
                soft(nd.ok),
                format!("mass at p=0 {} vs bound {}", nd.value, 1.0 - alpha),
                false,
            )?;
            if let Some(nf) = s.not_flat {
                checks.emit(
                    &format!("{prefix}A:NotFlat"),
                    soft(nf.ok),
                    format!("flat-name fraction {} vs attachment {alpha}", nf.value),
                    false,
                )?;
            }
            if per_state_oracles {
                rate_oracle(&s.measure, alpha, &prefix, &mut checks)?;
            }
        }
        if let Some(crate::config::CorrelationConfig::States { states, .. }) = &cfg.correlation {
            for st in states {
                let pool = st.pool.build(tranche.horizon)?;
                merton_oracle(&pool, tranche.horizon, &format!("[{}] ", st.label), &mut checks)?;
            }
        }
    }

    let failed = checks.assumption_failures + checks.oracle_failures;
    writeln!(checks.out, "summary: {} checks, {failed} failed", checks.total).map_err(stdout_err)?;
    Ok(if checks.assumption_failures > 0 {
        EXIT_ASSUMPTION
    } else if checks.oracle_failures > 0 {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    })
}

fn pool_checks(
    cfg: &Config,
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    prefix: &str,
    checks: &mut Checks,
) -> Result<(), CliError> {
    let alpha = tranche.attachment;
    let r = assess_pool(pool, tranche, cfg.assumptions.delta, cfg.assumptions.epsilon)?;
    let cmp = |ok: bool| if ok { "<" } else { ">=" };
    checks.emit(
        &format!("{prefix}A:IG"),
        Status::from_ok(r.ig_ok),
        format!(
            "mean default probability {} {} attachment {alpha}",
            r.mean_default_prob,
            cmp(r.ig_ok)
        ),
        false,
    )?;
    checks.emit(
        &format!("{prefix}A:NonDegen"),
        Status::from_ok(r.nondegen_ok),
        format!(
            "mass at p=0 {} {} {}",
            r.zero_mass_fraction,
            cmp(r.nondegen_ok),
            1.0 - alpha
        ),
        false,
    )?;
    checks.emit(
        &format!("{prefix}A:NotFlat"),
        Status::from_ok(r.notflat_ok),
        format!(
            "fraction {} of names with mass < {} in [T - {}, T) {} {alpha}",
            r.notflat_fraction,
            r.not_flat_epsilon,
            r.not_flat_delta,
            cmp(r.notflat_ok)
        ),
        false,
    )?;
    let detail = match r.chebyshev_bound {
        Some(b) => format!(
            "P(L > alpha) <= {} (variance), {} (crude)",
            b.variance_bound, b.crude_bound
        ),
        None => "not investment grade".into(),
    };
    checks.emit(&format!("{prefix}chebyshev"), Status::Info, detail, false)
}

/// At most three atoms with the same masses and first moments per group.
fn project(m: &LossProbMeasure) -> LossProbMeasure {
    let atoms = m.atoms();
    if atoms.len() <= 3 {
        return m.clone();
    }
    let mut groups = [(0.0, 0.0); 3];
    let mut cum = 0.0;
    for &(p, w) in atoms {
        let mid = cum + w / 2.0;
        let g = ((mid * 3.0) as usize).min(2);
        groups[g].0 += p * w;
        groups[g].1 += w;
        cum += w;
    }
    let projected: Vec<(f64, f64)> = groups
        .iter()
        .filter(|g| g.1 > 0.0)
        .map(|&(pw, w)| ((pw / w).clamp(0.0, 1.0), w))
        .collect();
    LossProbMeasure::from_weights(&projected).unwrap_or_else(|_| m.clone())
}

fn rate_oracle(m: &LossProbMeasure, alpha: f64, prefix: &str, checks: &mut Checks) -> Result<(), CliError> {
    let name = format!("{prefix}rate oracle");
    let proj = project(m);
    if proj.mean() >= alpha {
        return checks.emit(&name, Status::Skip, "measure is not investment grade".into(), true);
    }
    let solved = match rate_i(&proj, alpha) {
        Ok(r) => r,
        Err(e) => return checks.emit(&name, Status::Fail, format!("solver: {e}"), true),
    };
    let atoms = proj.atoms();
    let (reference, tol, how) = match atoms.len() {
        1 => (hbar(alpha, atoms[0].0)?, 1e-12, "single-atom entropy"),
        2 => (brute_force_rate(&proj, alpha, 1e-4)?, 1e-6, "1-D grid, step 1e-4"),
        _ => (brute_force_rate(&proj, alpha, 1e-3)?, 1e-5, "2-D grid, step 1e-3"),
    };
    let diff = (solved - reference).abs();
    checks.emit(
        &name,
        Status::from_ok(diff <= tol),
        format!(
            "|rate - oracle| = {diff:.3e} (tol {tol:.0e}, {how}, {}-atom projection)",
            atoms.len()
        ),
        true,
    )
}

fn merton_oracle(pool: &PoolSpec, horizon: f64, prefix: &str, checks: &mut Checks) -> Result<(), CliError> {
    let name = format!("{prefix}merton oracle");
    let params: Vec<MertonParams> = pool
        .names()
        .iter()
        .filter_map(|d| match d {
            DefaultDistribution::Merton(p) => Some(*p),
            _ => None,
        })
        .collect();
    if params.is_empty() {
        return checks.emit(&name, Status::Skip, "no Merton names".into(), true);
    }
    let step = params.len().div_ceil(MERTON_SAMPLE);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for p in params.iter().step_by(step) {
        let q = merton_default_prob(p, horizon)?;
        let c = merton_default_prob_closed(p, horizon)?;
        worst = worst.max((q - c).abs());
        count += 1;
    }
    checks.emit(
        &name,
        Status::from_ok(worst <= MERTON_TOL),
        format!("max |quadrature - closed form| = {worst:.3e} over {count} names (tol {MERTON_TOL:.0e})"),
        true,
    )
}
