//! Large-pool asymptotics of the tranche legs and spread.
//!
//! For a pool of `N` names with empirical default-probability measure
//! `Ū^(N)`, the protection leg behaves like
//!
//! ```text
//! e^{−RT} Ĩ(Λ, g) / (N^{3/2} (β − α) √(2πσ²)) · exp(−N 𝔍(α, Ū^(N)))
//! ```
//!
//! with `g = ⌈Nα⌉ − Nα` and the correction terms set to zero. All products
//! are formed in log space so that large `N` does not underflow before the
//! final exponential.

use alloc::vec::Vec;

use crate::entropy::{solve, tilted_mean, RateSolution};
use crate::pool::{check_investment_grade, check_nondegeneracy, LossProbMeasure, TrancheSpec};
use crate::special::{abs, ceil, exp, exp_m1, floor, ln, sqrt, SQRT_2PI};
use crate::{Error, Result};

const GRANULARITY_SNAP: f64 = 1e-9;

/// `⌈Nα⌉ − Nα`, snapped to 0 when `Nα` is within 1e-9 of an integer.
pub fn granularity(n: usize, alpha: f64) -> f64 {
    let x = n as f64 * alpha;
    let nearest = floor(x + 0.5);
    if abs(x - nearest) <= GRANULARITY_SNAP {
        return 0.0;
    }
    ceil(x) - x
}

/// `e^{−λg} { e^{−λ}/(1 − e^{−λ})² + g/(1 − e^{−λ}) }`, the limit of
/// `Σ_{s ∈ g + ℤ₊} s e^{−λs}`.
pub fn i2_factor(lambda: f64, g: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BoundaryMultiplier { lambda });
    }
    if !(0.0..1.0).contains(&g) {
        return Err(Error::invalid("granularity must lie in [0, 1)"));
    }
    // 1 − e^{−λ} without cancellation for small λ
    let one_minus = -exp_m1(-lambda);
    Ok(exp(-lambda * g) * (exp(-lambda) / (one_minus * one_minus) + g / one_minus))
}

/// `Σ_{t ∈ 𝒯} e^{−Rt}`.
pub fn premium_leg(tranche: &TrancheSpec) -> f64 {
    tranche
        .premium_dates
        .iter()
        .map(|&t| exp(-tranche.rate * t))
        .sum()
}

/// Which measure supplies `Λ` and `σ²` in the pre-exponential factor. The
/// exponent always uses the pool's own measure `Ū^(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitMode {
    /// `Λ`, `σ²` from `Ū^(N)`.
    Pool,
    /// `Λ`, `σ²` from the limiting measure `Ū`.
    #[default]
    Limiting,
}

/// Pre-exponential inputs plus the rate in the exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegInputs {
    pub lambda: f64,
    pub sigma_sq: f64,
    pub rate_i: f64,
}

impl LegInputs {
    pub fn from_solution(sol: &RateSolution) -> Self {
        Self {
            lambda: sol.lambda,
            sigma_sq: sol.sigma_sq,
            rate_i: sol.rate_i,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticResult {
    pub n: usize,
    pub granularity: f64,
    pub lambda: f64,
    /// `𝔍(α, Ū^(N))`.
    pub rate_i: f64,
    pub sigma_sq: f64,
    pub i2_factor: f64,
    pub protection_leg: f64,
    pub ln_protection_leg: f64,
    pub premium_leg: f64,
    pub spread: f64,
    pub ln_spread: f64,
}

/// Solve `m` at the tranche attachment, rejecting measures that violate the
/// investment-grade or non-degeneracy assumptions or give no positive
/// multiplier.
pub fn solve_for_pricing(m: &LossProbMeasure, alpha: f64) -> Result<RateSolution> {
    let ig = check_investment_grade(m, alpha);
    if !ig.ok {
        return Err(Error::InvestmentGrade {
            mean: ig.value,
            alpha,
        });
    }
    let nd = check_nondegeneracy(m, alpha);
    if !nd.ok {
        return Err(Error::NonDegenerate {
            mass_at_zero: nd.value,
            bound: 1.0 - alpha,
        });
    }
    let sol = solve(m, alpha)?;
    sol.require_pricable(alpha, m)?;
    Ok(sol)
}

/// `ln` of the asymptotic protection leg from explicit inputs.
pub fn ln_protection_leg_from(inputs: LegInputs, tranche: &TrancheSpec, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("pool size must be at least 1"));
    }
    if !(inputs.sigma_sq > 0.0) {
        return Err(Error::invalid("variance factor must be positive"));
    }
    if !(inputs.rate_i >= 0.0) || !inputs.rate_i.is_finite() {
        return Err(Error::invalid("rate must be finite and nonnegative"));
    }
    let g = granularity(n, tranche.attachment);
    let i2 = i2_factor(inputs.lambda, g)?;
    let nf = n as f64;
    Ok(-tranche.rate * tranche.horizon + ln(i2)
        - 1.5 * ln(nf)
        - ln(tranche.width())
        - ln(SQRT_2PI * sqrt(inputs.sigma_sq))
        - nf * inputs.rate_i)
}

/// Asymptotic protection leg of a pool with measure `m = Ū^(N)`.
pub fn protection_leg_asymptotic(m: &LossProbMeasure, tranche: &TrancheSpec, n: usize) -> Result<f64> {
    let sol = solve_for_pricing(m, tranche.attachment)?;
    Ok(exp(ln_protection_leg_from(LegInputs::from_solution(&sol), tranche, n)?))
}

fn assemble(inputs: LegInputs, tranche: &TrancheSpec, n: usize) -> Result<AsymptoticResult> {
    let ln_leg = ln_protection_leg_from(inputs, tranche, n)?;
    let g = granularity(n, tranche.attachment);
    let premium = premium_leg(tranche);
    let ln_spread = ln_leg - ln(premium);
    let protection_leg = exp(ln_leg);
    Ok(AsymptoticResult {
        n,
        granularity: g,
        lambda: inputs.lambda,
        rate_i: inputs.rate_i,
        sigma_sq: inputs.sigma_sq,
        i2_factor: i2_factor(inputs.lambda, g)?,
        protection_leg,
        ln_protection_leg: ln_leg,
        premium_leg: premium,
        spread: protection_leg / premium,
        ln_spread,
    })
}

/// Full asymptotic record using `m = Ū^(N)` throughout.
pub fn spread_asymptotic(m: &LossProbMeasure, tranche: &TrancheSpec, n: usize) -> Result<AsymptoticResult> {
    let sol = solve_for_pricing(m, tranche.attachment)?;
    assemble(LegInputs::from_solution(&sol), tranche, n)
}

/// Asymptotic record with `Λ`, `σ²` taken from `limit` (when the mode asks
/// for it) and the exponent from the pool measure.
pub fn spread_asymptotic_mixed(
    pool_measure: &LossProbMeasure,
    limit: &LossProbMeasure,
    tranche: &TrancheSpec,
    n: usize,
    mode: LimitMode,
) -> Result<AsymptoticResult> {
    let pool_sol = solve_for_pricing(pool_measure, tranche.attachment)?;
    let inputs = match mode {
        LimitMode::Pool => LegInputs::from_solution(&pool_sol),
        LimitMode::Limiting => {
            let lim = solve_for_pricing(limit, tranche.attachment)?;
            LegInputs {
                lambda: lim.lambda,
                sigma_sq: lim.sigma_sq,
                rate_i: pool_sol.rate_i,
            }
        }
    };
    assemble(inputs, tranche, n)
}

/// `(λ, ∫ Φ(p, λ) m(dp))` for every grid point.
pub fn lambda_curve(m: &LossProbMeasure, lambda_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if lambda_grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::invalid("lambda grid must be finite"));
    }
    Ok(lambda_grid.iter().map(|&l| (l, tilted_mean(m, l))).collect())
}

/// One row of the `S*_N` curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SstarRow {
    pub n: usize,
    pub result: Result<AsymptoticResult>,
}

/// `S*_N` over `n_list`. `pool_measure(N)` rebuilds `Ū^(N)` for each size;
/// `limit` supplies `Λ`, `σ²` in [`LimitMode::Limiting`].
pub fn sstar_curve<F>(
    mut pool_measure: F,
    limit: Option<&LossProbMeasure>,
    tranche: &TrancheSpec,
    n_list: &[usize],
    mode: LimitMode,
) -> Result<Vec<SstarRow>>
where
    F: FnMut(usize) -> Result<LossProbMeasure>,
{
    if n_list.is_empty() {
        return Err(Error::invalid("pool size list is empty"));
    }
    if mode == LimitMode::Limiting && limit.is_none() {
        return Err(Error::invalid("limiting mode needs a limiting measure"));
    }
    Ok(n_list
        .iter()
        .map(|&n| {
            let result = pool_measure(n).and_then(|m| match (mode, limit) {
                (LimitMode::Limiting, Some(lim)) => {
                    spread_asymptotic_mixed(&m, lim, tranche, n, mode)
                }
                _ => spread_asymptotic(&m, tranche, n),
            });
            SstarRow { n, result }
        })
        .collect())
}
