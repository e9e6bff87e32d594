//! Merton first-passage defaults with gamma-distributed volatilities.
//!
//! A name's log-value starts at 0 and follows a Brownian motion with drift
//! `θ − σ²/2` and volatility `σ`; default is the first passage below
//! `ln K`. The default-time law has density
//!
//! ```text
//! f(t) = b / √(2πσ²t³) · exp(−(νt + b)² / (2σ²t)),   b = ln(1/K),  ν = θ − σ²/2
//! ```
//!
//! on `(0, ∞)` and puts the remaining mass at `+∞`. The probability of
//! default by `T` is computed two ways: adaptive quadrature of the density
//! ([`merton_default_prob`]) and the reflection-principle closed form
//! ([`merton_default_prob_closed`]).

use alloc::vec::Vec;

use crate::pool::{DefaultDistribution, LossProbMeasure, PoolSpec};
use crate::special::{
    adaptive_simpson, bracketed_root, exp, gauss_legendre, ln, ln_gamma, normal_cdf,
    powf, regularized_lower_gamma, sqrt, SQRT_2PI,
};
use crate::{Error, Result};

/// Quadrature starts here; the density vanishes faster than any power at 0.
const T_MIN: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-10;
const QUAD_PANELS: usize = 48;
/// Lower/upper gamma quantiles bounding the volatility grid.
const VOL_TRUNCATION: f64 = 1e-9;

/// Drift, barrier and volatility of one Merton name (initial value 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertonParams {
    /// Risk-neutral drift per year.
    pub theta: f64,
    /// Bankruptcy barrier in `(0, 1]`; `K = 1` means immediate default.
    pub barrier: f64,
    /// Volatility per √year.
    pub sigma: f64,
}

impl MertonParams {
    pub fn new(theta: f64, barrier: f64, sigma: f64) -> Result<Self> {
        if !(barrier > 0.0 && barrier <= 1.0) {
            return Err(Error::invalid("Merton barrier must lie in (0, 1]"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() || !theta.is_finite() {
            return Err(Error::invalid("Merton volatility must be positive and drift finite"));
        }
        Ok(Self {
            theta,
            barrier,
            sigma,
        })
    }

    fn distance(&self) -> f64 {
        -ln(self.barrier)
    }

    fn drift(&self) -> f64 {
        self.theta - 0.5 * self.sigma * self.sigma
    }

    /// First-passage density at `t > 0`.
    pub fn density(&self, t: f64) -> f64 {
        let b = self.distance();
        if t <= 0.0 || b == 0.0 {
            return 0.0;
        }
        let s2t = self.sigma * self.sigma * t;
        let z = self.drift() * t + b;
        b / (SQRT_2PI * sqrt(s2t) * t) * exp(-z * z / (2.0 * s2t))
    }

    /// Closed-form `μ[0, t]`.
    pub fn cdf(&self, t: f64) -> f64 {
        let b = self.distance();
        if t < 0.0 {
            return 0.0;
        }
        if b == 0.0 {
            return 1.0;
        }
        if t == 0.0 {
            return 0.0;
        }
        let nu = self.drift();
        let s2 = self.sigma * self.sigma;
        if t == f64::INFINITY {
            return if nu <= 0.0 { 1.0 } else { exp(-2.0 * nu * b / s2) };
        }
        let st = self.sigma * sqrt(t);
        let first = normal_cdf((-b - nu * t) / st);
        let second = exp(-2.0 * nu * b / s2) * normal_cdf((-b + nu * t) / st);
        (first + second).clamp(0.0, 1.0)
    }

    /// Time `t < horizon` with `cdf(t) = target`, solved in `ln t`.
    pub(crate) fn inverse_cdf(&self, target: f64, horizon: f64) -> f64 {
        if self.distance() == 0.0 || target <= self.cdf(T_MIN) {
            return 0.0;
        }
        let p = self.cdf(horizon);
        if target >= p {
            return horizon;
        }
        let tol = 1e-14 * p;
        bracketed_root(
            |s| self.cdf(exp(s)) - target,
            ln(T_MIN),
            ln(horizon),
            tol,
            1e-13,
            400,
        )
        .map(exp)
        .unwrap_or(horizon)
    }
}

/// `μ[0, T)` by adaptive Simpson quadrature of the first-passage density.
///
/// `[T_MIN, T]` is split into geometrically spaced panels so the narrow peak
/// near 0 cannot be stepped over; the density is treated as 0 below `T_MIN`.
pub fn merton_default_prob(params: &MertonParams, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon must be positive"));
    }
    if params.distance() == 0.0 {
        return Ok(1.0);
    }
    if horizon <= T_MIN {
        return Ok(0.0);
    }
    let ratio = horizon / T_MIN;
    let f = |t: f64| params.density(t);
    let mut total = 0.0;
    let mut lo = T_MIN;
    for k in 1..=QUAD_PANELS {
        let hi = if k == QUAD_PANELS {
            horizon
        } else {
            T_MIN * powf(ratio, k as f64 / QUAD_PANELS as f64)
        };
        total += adaptive_simpson(&f, lo, hi, QUAD_TOL / QUAD_PANELS as f64, 50)?;
        lo = hi;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `μ[0, T)` from the reflection-principle closed form,
/// `N((−b−νT)/(σ√T)) + e^{−2νb/σ²} N((−b+νT)/(σ√T))`.
pub fn merton_default_prob_closed(params: &MertonParams, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon must be positive"));
    }
    Ok(params.cdf(horizon))
}

/// Gamma law of volatilities with scale `σ∘` and shape `ς`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaVolSpec {
    pub scale: f64,
    pub shape: f64,
}

impl GammaVolSpec {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0 && shape > 0.0) || !scale.is_finite() || !shape.is_finite() {
            return Err(Error::invalid("gamma scale and shape must be positive"));
        }
        Ok(Self { scale, shape })
    }

    pub fn cdf(&self, sigma: f64) -> f64 {
        regularized_lower_gamma(self.shape, sigma / self.scale)
    }

    pub fn density(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let x = sigma / self.scale;
        exp((self.shape - 1.0) * ln(x) - x - ln_gamma(self.shape)) / self.scale
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
}

/// Volatility at gamma quantile `u ∈ (0, 1)`.
pub fn gamma_inverse_cdf(spec: &GammaVolSpec, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid("gamma quantile level must lie in (0, 1)"));
    }
    let mut hi = spec.mean().max(spec.scale);
    while spec.cdf(hi) < u {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence("gamma quantile bracket"));
        }
    }
    // relative tolerance in σ; absolute 1e-15 on the CDF
    let root = bracketed_root(|s| spec.cdf(s) - u, 0.0, hi, 1e-15, 1e-15, 2000)?;
    Ok(root)
}

/// Pool of `n` Merton names with volatilities at gamma quantiles
/// `k/(n+1)`, `k = 1..=n`.
pub fn build_gamma_merton_pool(
    spec: &GammaVolSpec,
    theta: f64,
    barrier: f64,
    n: usize,
) -> Result<PoolSpec> {
    if n == 0 {
        return Err(Error::invalid("pool size must be at least 1"));
    }
    let names = gamma_merton_volatilities(spec, n)?
        .into_iter()
        .map(|sigma| MertonParams::new(theta, barrier, sigma).map(DefaultDistribution::Merton))
        .collect::<Result<Vec<_>>>()?;
    PoolSpec::new(names)
}

/// The volatility grid behind [`build_gamma_merton_pool`].
pub fn gamma_merton_volatilities(spec: &GammaVolSpec, n: usize) -> Result<Vec<f64>> {
    (1..=n)
        .map(|k| gamma_inverse_cdf(spec, k as f64 / (n as f64 + 1.0)))
        .collect()
}

/// Gauss–Legendre rule against the gamma density on the volatility range
/// between the `1e-9` and `1 − 1e-9` quantiles: `(σ_j, weight_j)`, weights
/// including the density and renormalized to total 1.
#[derive(Debug, Clone, PartialEq)]
pub struct VolQuadrature {
    pub nodes: Vec<(f64, f64)>,
    /// Gamma mass outside the truncated range.
    pub truncated_mass: f64,
}

pub fn volatility_quadrature(spec: &GammaVolSpec, n_quad: usize) -> Result<VolQuadrature> {
    if n_quad < 8 {
        return Err(Error::invalid("limiting measure needs at least 8 quadrature nodes"));
    }
    let lo = gamma_inverse_cdf(spec, VOL_TRUNCATION)?;
    let hi = gamma_inverse_cdf(spec, 1.0 - VOL_TRUNCATION)?;
    let truncated_mass = spec.cdf(lo) + (1.0 - spec.cdf(hi));
    if truncated_mass > 1e-8 {
        return Err(Error::invalid("volatility truncation leaves more than 1e-8 gamma mass"));
    }
    let mut nodes: Vec<(f64, f64)> = gauss_legendre(n_quad, lo, hi)
        .into_iter()
        .map(|(s, w)| (s, w * spec.density(s)))
        .collect();
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    for n in &mut nodes {
        n.1 /= total;
    }
    Ok(VolQuadrature {
        nodes,
        truncated_mass,
    })
}

/// Discretized limit of the pool's default-probability measure,
/// `∫ δ_{p(σ)} γ(σ) dσ`, with `p(σ)` from [`merton_default_prob`].
pub fn limiting_measure(
    spec: &GammaVolSpec,
    theta: f64,
    barrier: f64,
    horizon: f64,
    n_quad: usize,
) -> Result<LossProbMeasure> {
    let quad = volatility_quadrature(spec, n_quad)?;
    let atoms = quad
        .nodes
        .iter()
        .map(|&(sigma, w)| {
            let params = MertonParams::new(theta, barrier, sigma)?;
            Ok((merton_default_prob(&params, horizon)?, w))
        })
        .collect::<Result<Vec<_>>>()?;
    // nodes far in the tails can carry weights that underflow to 0
    let atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
    LossProbMeasure::from_weights(&atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(sigma: f64) -> MertonParams {
        MertonParams::new(6.0, 0.857, sigma).unwrap()
    }

    #[test]
    fn barrier_at_one_defaults_immediately() {
        let p = MertonParams::new(6.0, 1.0, 0.5).unwrap();
        assert_eq!(merton_default_prob(&p, 5.0).unwrap(), 1.0);
        assert_eq!(merton_default_prob_closed(&p, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn driftless_case_is_twice_the_terminal_tail() {
        // θ = σ²/2 ⇒ ν = 0 ⇒ p = 2 N(−b/(σ√T))
        let sigma: f64 = 0.4;
        let p = MertonParams::new(0.5 * sigma * sigma, 0.857, sigma).unwrap();
        let b = -(0.857f64).ln();
        let expected = 2.0 * normal_cdf(-b / (sigma * 2.0f64.sqrt()));
        assert_abs_diff_eq!(merton_default_prob_closed(&p, 2.0).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(merton_default_prob(&p, 2.0).unwrap(), expected, epsilon = 1e-8);
    }

    #[test]
    fn closed_form_reference_values() {
        // frozen from an independent mpmath evaluation of the closed form
        let tiny = merton_default_prob_closed(&params(0.3), 5.0).unwrap();
        assert!((tiny / 1.352_473_510_660_5e-9 - 1.0).abs() < 1e-6, "{tiny}");
        let big = merton_default_prob_closed(&params(1.5), 5.0).unwrap();
        assert_abs_diff_eq!(big, 0.512_369_844_760_816_5, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for &s in &[0.2, 0.5, 1.0, 1.5, 3.0] {
            let q = merton_default_prob(&params(s), 5.0).unwrap();
            let c = merton_default_prob_closed(&params(s), 5.0).unwrap();
            assert_abs_diff_eq!(q, c, epsilon = 1e-8);
        }
    }

    #[test]
    fn gamma_quantile_shape_two() {
        let spec = GammaVolSpec::new(0.3, 2.0).unwrap();
        // F(0.3) = 1 − 2/e
        let u = 1.0 - 2.0 * (-1.0f64).exp();
        assert_abs_diff_eq!(gamma_inverse_cdf(&spec, u).unwrap(), 0.3, epsilon = 1e-12);
        let median = gamma_inverse_cdf(&spec, 0.5).unwrap();
        assert_abs_diff_eq!(spec.cdf(median), 0.5, epsilon = 1e-10);
        let small = gamma_inverse_cdf(&spec, 1e-12).unwrap();
        assert!(small > 0.0 && small < 1e-5);
    }

    #[test]
    fn inverse_cdf_hits_target() {
        let p = params(1.2);
        let pt = p.cdf(5.0);
        for &u in &[0.0, 0.1, 0.5, 0.9, 0.999_999] {
            let t = p.inverse_cdf(u * pt, 5.0);
            assert!((0.0..5.0).contains(&t));
            assert!((p.cdf(t) - u * pt).abs() < 1e-10, "u={u}");
        }
    }

    #[test]
    fn small_quadrature_rejected() {
        let spec = GammaVolSpec::new(0.3, 2.0).unwrap();
        assert!(limiting_measure(&spec, 6.0, 0.857, 5.0, 4).is_err());
    }
}
