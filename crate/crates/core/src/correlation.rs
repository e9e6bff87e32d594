//! Systemic-factor mixtures: finitely many states of the world, each with
//! its own independent-name pool, and the Gaussian copula discretized onto
//! such a grid of states.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::asymptotics::{
    granularity, i2_factor, ln_protection_leg_from, premium_leg, AsymptoticResult, LegInputs,
};
use crate::entropy::{solve, BoundaryCase};
use crate::pool::{
    build_loss_measure, check_investment_grade, check_nondegeneracy, check_not_flat,
    AssumptionCheck, LossProbMeasure, PoolSpec, TrancheSpec, NOT_FLAT_DELTA_FRACTION,
    NOT_FLAT_EPSILON,
};
use crate::special::{abs, exp, ln, normal_cdf, normal_quantile, round, sqrt};
use crate::{Error, Result};

/// Tolerance under which two states' rates count as tied.
pub const DOMINANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureState {
    pub label: String,
    pub prob: f64,
    /// Per-state `Ū^(N)_x`.
    pub measure: LossProbMeasure,
    /// Per-state not-flat check, when the state's time laws are known.
    pub not_flat: Option<AssumptionCheck>,
}

/// States sorted by label; probabilities positive and summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemicMixture {
    states: Vec<MixtureState>,
}

impl SystemicMixture {
    pub fn new(mut states: Vec<MixtureState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("mixture needs at least one state"));
        }
        if states.iter().any(|s| !(s.prob > 0.0) || !s.prob.is_finite()) {
            return Err(Error::invalid("state probabilities must be positive"));
        }
        let total: f64 = states.iter().map(|s| s.prob).sum();
        if abs(total - 1.0) > 1e-12 {
            return Err(Error::invalid("state probabilities must sum to 1"));
        }
        states.sort_by(|a, b| a.label.cmp(&b.label));
        if states.windows(2).any(|w| w[0].label == w[1].label) {
            return Err(Error::invalid("state labels must be unique"));
        }
        Ok(Self { states })
    }

    /// One state per `(label, probability, pool)`; pools must share their size.
    pub fn from_pools(states: Vec<(String, f64, PoolSpec)>, horizon: f64, alpha: f64) -> Result<Self> {
        let n = states.first().map(|s| s.2.len());
        if states.iter().any(|s| Some(s.2.len()) != n) {
            return Err(Error::invalid("all states must share the pool size"));
        }
        let states = states
            .into_iter()
            .map(|(label, prob, pool)| {
                let not_flat = check_not_flat(
                    &pool,
                    horizon,
                    alpha,
                    horizon * NOT_FLAT_DELTA_FRACTION,
                    NOT_FLAT_EPSILON,
                )?;
                Ok(MixtureState {
                    label,
                    prob,
                    measure: build_loss_measure(&pool, horizon),
                    not_flat: Some(not_flat),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    pub fn states(&self) -> &[MixtureState] {
        &self.states
    }
}

/// Whether per-state assumption failures abort pricing or become warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatePolicy {
    pub allow_state_violations: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateLeg {
    pub label: String,
    pub prob: f64,
    pub result: AsymptoticResult,
    /// `prob × protection leg`.
    pub weighted_leg: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureLeg {
    pub protection_leg: f64,
    pub premium_leg: f64,
    pub spread: f64,
    pub states: Vec<StateLeg>,
}

fn state_error(label: &str, source: Error) -> Error {
    Error::State {
        label: String::from(label),
        source: Box::new(source),
    }
}

fn price_state(
    state: &MixtureState,
    tranche: &TrancheSpec,
    n: usize,
    policy: StatePolicy,
) -> Result<StateLeg> {
    let alpha = tranche.attachment;
    let m = &state.measure;
    let mut warnings = Vec::new();
    let mut violation = |e: Error| -> Result<()> {
        if policy.allow_state_violations {
            warnings.push(format!("{e}"));
            Ok(())
        } else {
            Err(state_error(&state.label, e))
        }
    };
    let ig = check_investment_grade(m, alpha);
    if !ig.ok {
        violation(Error::InvestmentGrade {
            mean: ig.value,
            alpha,
        })?;
    }
    let nd = check_nondegeneracy(m, alpha);
    if !nd.ok {
        violation(Error::NonDegenerate {
            mass_at_zero: nd.value,
            bound: 1.0 - alpha,
        })?;
    }
    if let Some(nf) = state.not_flat.filter(|c| !c.ok) {
        violation(Error::invalid(format!(
            "not-flat assumption violated: fraction {} of names is flat before the horizon",
            nf.value
        )))?;
    }
    let sol = solve(m, alpha).map_err(|e| state_error(&state.label, e))?;
    if sol.boundary_case != BoundaryCase::Interior || !(sol.lambda > 0.0) {
        let e = sol
            .require_pricable(alpha, m)
            .err()
            .unwrap_or(Error::BoundaryMultiplier { lambda: sol.lambda });
        return Err(state_error(&state.label, e));
    }
    let inputs = LegInputs::from_solution(&sol);
    let ln_leg = ln_protection_leg_from(inputs, tranche, n).map_err(|e| state_error(&state.label, e))?;
    let g = granularity(n, alpha);
    let premium = premium_leg(tranche);
    let leg = exp(ln_leg);
    Ok(StateLeg {
        label: state.label.clone(),
        prob: state.prob,
        result: AsymptoticResult {
            n,
            granularity: g,
            lambda: sol.lambda,
            rate_i: sol.rate_i,
            sigma_sq: sol.sigma_sq,
            i2_factor: i2_factor(sol.lambda, g)?,
            protection_leg: leg,
            ln_protection_leg: ln_leg,
            premium_leg: premium,
            spread: leg / premium,
            ln_spread: ln_leg - ln(premium),
        },
        weighted_leg: state.prob * leg,
        warnings,
    })
}

/// `Σ_x p(x) × (asymptotic protection leg of state x)`, each state with its
/// own `Λ_x`, `σ²_x` and `𝔍_x`.
pub fn mixture_protection_leg(
    mix: &SystemicMixture,
    tranche: &TrancheSpec,
    n: usize,
    policy: StatePolicy,
) -> Result<MixtureLeg> {
    let states = mix
        .states
        .iter()
        .map(|s| price_state(s, tranche, n, policy))
        .collect::<Result<Vec<_>>>()?;
    let protection_leg: f64 = states.iter().map(|s| s.weighted_leg).sum();
    let premium = premium_leg(tranche);
    Ok(MixtureLeg {
        protection_leg,
        premium_leg: premium,
        spread: protection_leg / premium,
        states,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantState {
    pub label: String,
    pub rate_i: f64,
    /// `p(x*) ×` protection leg of `x*`.
    pub protection_leg: f64,
    pub spread: f64,
}

/// The state with the smallest rate and its single-term approximation of the
/// mixture leg. A tie within [`DOMINANCE_TOL`] is an error.
pub fn dominant_state(
    mix: &SystemicMixture,
    tranche: &TrancheSpec,
    n: usize,
    policy: StatePolicy,
) -> Result<DominantState> {
    let legs = mixture_protection_leg(mix, tranche, n, policy)?;
    let mut order: Vec<&StateLeg> = legs.states.iter().collect();
    order.sort_by(|a, b| a.result.rate_i.total_cmp(&b.result.rate_i));
    if let [first, second, ..] = order.as_slice() {
        if abs(first.result.rate_i - second.result.rate_i) <= DOMINANCE_TOL {
            return Err(Error::NoUniqueDominantState {
                first: first.label.clone(),
                second: second.label.clone(),
            });
        }
    }
    let best = order[0];
    Ok(DominantState {
        label: best.label.clone(),
        rate_i: best.result.rate_i,
        protection_leg: best.weighted_leg,
        spread: best.weighted_leg / legs.premium_leg,
    })
}

const TWO_POW_53: f64 = 9_007_199_254_740_992.0;

/// Nodes `x_i = i/M`, `|i| ≤ M²`, with the normal mass of
/// `[x_i − 1/(2M), x_i + 1/(2M))`; the end bins absorb the tails.
///
/// Cumulative masses are rounded to multiples of `2⁻⁵³`, so every bin and
/// every partial sum is exact in floating point: the probabilities sum to
/// exactly 1 in any order, and mirror-image bins are bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaGrid {
    pub resolution: usize,
    pub rho: f64,
    pub nodes: Vec<f64>,
    pub probs: Vec<f64>,
}

fn quantized_cdf(e: f64) -> f64 {
    if e < 0.0 {
        round(normal_cdf(e) * TWO_POW_53)
    } else {
        TWO_POW_53 - round(normal_cdf(-e) * TWO_POW_53)
    }
}

pub fn gaussian_copula_grid(resolution: usize, rho: f64) -> Result<CopulaGrid> {
    if resolution == 0 {
        return Err(Error::invalid("copula resolution M must be at least 1"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("copula correlation must lie in (0, 1)"));
    }
    let m = resolution as i64;
    let half = m * m;
    let mf = resolution as f64;
    let nodes: Vec<f64> = (-half..=half).map(|i| i as f64 / mf).collect();
    let edges: Vec<f64> = (-half..half)
        .map(|i| quantized_cdf((2 * i + 1) as f64 / (2.0 * mf)))
        .collect();
    let mut probs = Vec::with_capacity(nodes.len());
    let mut prev = 0.0;
    for &c in &edges {
        probs.push((c - prev) / TWO_POW_53);
        prev = c;
    }
    probs.push((TWO_POW_53 - prev) / TWO_POW_53);
    Ok(CopulaGrid {
        resolution,
        rho,
        nodes,
        probs,
    })
}

/// `Φ((Φ⁻¹(p) − ρx)/√(1 − ρ²))`, with 0 and 1 fixed.
pub fn conditional_default_prob(p: f64, rho: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("default probability must lie in [0, 1]"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid("copula correlation must lie in [0, 1)"));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(p);
    }
    Ok(normal_cdf((normal_quantile(p) - rho * x) / sqrt(1.0 - rho * rho)))
}

/// Mixture whose state `x_i` conditions every name of `base` through
/// [`conditional_default_prob`]. Nodes with zero grid mass are dropped.
pub fn copula_mixture(
    base: &PoolSpec,
    horizon: f64,
    alpha: f64,
    grid: &CopulaGrid,
) -> Result<SystemicMixture> {
    let probs = base.default_probs(horizon);
    let delta = horizon * NOT_FLAT_DELTA_FRACTION;
    // conditioning rescales each name's law on [0, T) by p_x/p
    let windows: Vec<f64> = base
        .names()
        .iter()
        .map(|d| d.window_prob(horizon - delta, horizon))
        .collect();
    let width = grid.resolution * grid.resolution;
    let mut states = Vec::new();
    for (i, (&x, &w)) in grid.nodes.iter().zip(&grid.probs).enumerate() {
        if w <= 0.0 {
            continue;
        }
        let cond = probs
            .iter()
            .map(|&p| conditional_default_prob(p, grid.rho, x))
            .collect::<Result<Vec<_>>>()?;
        let flat = cond
            .iter()
            .zip(&probs)
            .zip(&windows)
            .filter(|((&c, &p), &win)| {
                let scaled = if p > 0.0 { win * c / p } else { 0.0 };
                scaled < NOT_FLAT_EPSILON
            })
            .count();
        let measure = LossProbMeasure::from_weights(
            &cond.iter().map(|&p| (p, 1.0)).collect::<Vec<_>>(),
        )?;
        let offset = i as i64 - width as i64;
        states.push(MixtureState {
            label: format!("x{offset:+06}"),
            prob: w,
            measure,
            not_flat: Some(AssumptionCheck {
                value: flat as f64 / probs.len() as f64,
                ok: (flat as f64 / probs.len() as f64) < alpha,
            }),
        });
    }
    SystemicMixture::new(states)
}
