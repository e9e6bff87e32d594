//! Binary relative entropy, the exponential tilt and the dual problem that
//! produces the large-deviations rate of a heterogeneous pool.
//!
//! For a loss measure `m` on `[0, 1]` and attachment `α`, the rate is
//!
//! ```text
//! 𝔍(α, m) = inf { ∫ ℏ(φ(p), p) m(dp) : ∫ φ dm = α },
//! ```
//!
//! attained by the tilt `φ(p) = Φ(p, Λ)` where `Λ` solves `∫ Φ(p, Λ) m(dp) = α`.

use alloc::vec::Vec;

use crate::pool::LossProbMeasure;
use crate::special::{abs, bracketed_root, ceil, exp, ln, ln_1p};
use crate::{Error, Result};

/// Tolerance for matching `α` against the boundary masses `m{1}` and `1 − m{0}`.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Target accuracy of `|∫Φ(p, Λ) m(dp) − α|`.
pub const SOLVER_TOL: f64 = 1e-12;
const MAX_BRACKET: f64 = 1e6;

/// Relative entropy of a Bernoulli(`b1`) law with respect to Bernoulli(`b2`).
pub fn hbar(b1: f64, b2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&b1) || !(0.0..=1.0).contains(&b2) {
        return Err(Error::invalid("relative entropy arguments must lie in [0, 1]"));
    }
    Ok(hbar_unchecked(b1, b2))
}

pub(crate) fn hbar_unchecked(b1: f64, b2: f64) -> f64 {
    if b1 == 1.0 {
        return if b2 > 0.0 { -ln(b2) } else { f64::INFINITY };
    }
    if b1 == 0.0 {
        return if b2 < 1.0 { -ln_1p(-b2) } else { f64::INFINITY };
    }
    if b2 == 0.0 || b2 == 1.0 {
        return f64::INFINITY;
    }
    let h = b1 * ln(b1 / b2) + (1.0 - b1) * (ln_1p(-b1) - ln_1p(-b2));
    // rounding can push the value a hair below 0 when b1 ≈ b2
    h.max(0.0)
}

/// `∂ℏ/∂b1 = ln(b1/b2) − ln((1−b1)/(1−b2))` for `b1, b2 ∈ (0, 1)`.
pub fn hbar_d1(b1: f64, b2: f64) -> f64 {
    ln(b1 / b2) - (ln_1p(-b1) - ln_1p(-b2))
}

/// Exponential tilt `p e^λ / (1 − p + p e^λ)`, with the indicator limits at
/// `λ = ±∞`.
pub fn phi(p: f64, lambda: f64) -> f64 {
    if lambda == f64::INFINITY {
        return if p > 0.0 { 1.0 } else { 0.0 };
    }
    if lambda == f64::NEG_INFINITY {
        return if p == 1.0 { 1.0 } else { 0.0 };
    }
    if p == 0.0 || p == 1.0 {
        return p;
    }
    if lambda > 0.0 {
        p / (p + (1.0 - p) * exp(-lambda))
    } else {
        let w = p * exp(lambda);
        w / (1.0 - p + w)
    }
}

/// How the dual problem was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCase {
    Interior,
    LambdaMinusInf,
    LambdaPlusInf,
    /// `m` is the two-point law `(1−α)δ₀ + αδ₁`.
    DegenerateMuDagger,
    Infeasible,
}

/// Multiplier, rate and variance factor of `m` at one attachment level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSolution {
    pub lambda: f64,
    pub rate_i: f64,
    pub sigma_sq: f64,
    pub boundary_case: BoundaryCase,
}

impl RateSolution {
    /// The solution as a usable pricing input: finite `Λ > 0` and `σ² > 0`.
    pub fn require_pricable(&self, alpha: f64, m: &LossProbMeasure) -> Result<()> {
        match self.boundary_case {
            BoundaryCase::Infeasible => Err(Error::Infeasible {
                alpha,
                mass_at_one: m.mass_at(1.0),
                mass_at_zero: m.mass_at(0.0),
            }),
            BoundaryCase::DegenerateMuDagger => Err(Error::DegenerateMeasure),
            BoundaryCase::LambdaMinusInf | BoundaryCase::LambdaPlusInf => {
                Err(Error::BoundaryMultiplier { lambda: self.lambda })
            }
            BoundaryCase::Interior if !(self.lambda > 0.0) || !(self.sigma_sq > 0.0) => {
                Err(Error::BoundaryMultiplier { lambda: self.lambda })
            }
            BoundaryCase::Interior => Ok(()),
        }
    }
}

/// `∫ Φ(p, λ) m(dp)`.
pub fn tilted_mean(m: &LossProbMeasure, lambda: f64) -> f64 {
    m.integrate(|p| phi(p, lambda))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("attachment must lie in (0, 1)"))
    }
}

/// Classify the problem and find `Λ` (the `rate_i` and `sigma_sq` fields are
/// left at 0; see [`solve`]).
pub fn solve_lambda(m: &LossProbMeasure, alpha: f64) -> Result<RateSolution> {
    check_alpha(alpha)?;
    let at_one = m.mass_at(1.0);
    let at_zero = m.mass_at(0.0);
    let lower = at_one;
    let upper = 1.0 - at_zero;
    let partial = |lambda, case| RateSolution {
        lambda,
        rate_i: 0.0,
        sigma_sq: 0.0,
        boundary_case: case,
    };
    let hits_lower = abs(alpha - lower) <= BOUNDARY_TOL;
    let hits_upper = abs(alpha - upper) <= BOUNDARY_TOL;
    if hits_lower && hits_upper {
        return Ok(partial(0.0, BoundaryCase::DegenerateMuDagger));
    }
    if hits_lower {
        return Ok(partial(f64::NEG_INFINITY, BoundaryCase::LambdaMinusInf));
    }
    if hits_upper {
        return Ok(partial(f64::INFINITY, BoundaryCase::LambdaPlusInf));
    }
    if alpha < lower || alpha > upper {
        return Ok(partial(f64::NAN, BoundaryCase::Infeasible));
    }

    let f = |lambda: f64| tilted_mean(m, lambda) - alpha;
    let (mut lo, mut hi) = (-50.0, 50.0);
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -MAX_BRACKET {
            return Err(Error::NoConvergence("multiplier bracket (lower end)"));
        }
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > MAX_BRACKET {
            return Err(Error::NoConvergence("multiplier bracket (upper end)"));
        }
    }
    let lambda = bracketed_root(f, lo, hi, SOLVER_TOL, 1e-15, 4000)?;
    Ok(partial(lambda, BoundaryCase::Interior))
}

/// `𝔍(α, m) = ∫ ℏ(Φ(p, Λ), p) m(dp)` for a solved multiplier.
pub fn rate_at(m: &LossProbMeasure, lambda: f64) -> f64 {
    m.integrate(|p| hbar_unchecked(phi(p, lambda), p))
}

/// `σ²(α, m) = ∫ Φ(p, Λ)(1 − Φ(p, Λ)) m(dp)` for a solved multiplier.
pub fn sigma_sq_at(m: &LossProbMeasure, lambda: f64) -> f64 {
    m.integrate(|p| {
        let t = phi(p, lambda);
        t * (1.0 - t)
    })
}

/// Full solution: multiplier, rate and variance factor.
pub fn solve(m: &LossProbMeasure, alpha: f64) -> Result<RateSolution> {
    let mut sol = solve_lambda(m, alpha)?;
    match sol.boundary_case {
        BoundaryCase::Infeasible => {
            sol.rate_i = f64::INFINITY;
        }
        BoundaryCase::DegenerateMuDagger => {}
        _ => {
            sol.rate_i = rate_at(m, sol.lambda);
            sol.sigma_sq = sigma_sq_at(m, sol.lambda);
        }
    }
    Ok(sol)
}

/// `𝔍(α, m)`; `+∞` when `α` is infeasible.
pub fn rate_i(m: &LossProbMeasure, alpha: f64) -> Result<f64> {
    Ok(solve(m, alpha)?.rate_i)
}

/// `σ²(α, m)`; rejects infeasible attachments.
pub fn sigma_sq(m: &LossProbMeasure, alpha: f64) -> Result<f64> {
    let sol = solve(m, alpha)?;
    if sol.boundary_case == BoundaryCase::Infeasible {
        return Err(Error::Infeasible {
            alpha,
            mass_at_one: m.mass_at(1.0),
            mass_at_zero: m.mass_at(0.0),
        });
    }
    Ok(sol.sigma_sq)
}

/// Direct minimization of `Σ w_i ℏ(φ_i, p_i)` subject to `Σ w_i φ_i = α` by
/// grid search, for measures with at most three atoms.
///
/// The heaviest atom's `φ` is solved from the constraint; the others run
/// over a grid of spacing `grid_step` on `[0, 1]` (endpoints included),
/// augmented by the points where the solved coordinate reaches 0 or 1.
pub fn brute_force_rate(m: &LossProbMeasure, alpha: f64, grid_step: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let atoms = m.atoms();
    if atoms.len() > 3 {
        return Err(Error::invalid("brute-force rate handles at most 3 atoms"));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::invalid("grid step must lie in (0, 1]"));
    }
    let dep = (0..atoms.len())
        .max_by(|&i, &j| atoms[i].1.total_cmp(&atoms[j].1))
        .unwrap_or(0);
    let free: Vec<(f64, f64)> = atoms
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != dep)
        .map(|(_, &a)| a)
        .collect();
    let (p_dep, w_dep) = atoms[dep];

    let steps = ceil(1.0 / grid_step - 1e-9) as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| (k as f64 * grid_step).min(1.0))
        .collect();

    let objective = |phis: &[f64]| -> f64 {
        let used: f64 = phis.iter().zip(&free).map(|(f, a)| f * a.1).sum();
        let phi_dep = (alpha - used) / w_dep;
        if !(-1e-12..=1.0 + 1e-12).contains(&phi_dep) {
            return f64::INFINITY;
        }
        let phi_dep = phi_dep.clamp(0.0, 1.0);
        let mut total = w_dep * hbar_unchecked(phi_dep, p_dep);
        for (f, a) in phis.iter().zip(&free) {
            total += a.1 * hbar_unchecked(*f, a.0);
        }
        total
    };

    let mut best = f64::INFINITY;
    match free.len() {
        0 => best = objective(&[]),
        1 => {
            let w = free[0].1;
            let mut candidates = grid.clone();
            // the free values where the dependent coordinate hits 0 or 1
            for target in [0.0, 1.0] {
                let f = (alpha - target * w_dep) / w;
                if (0.0..=1.0).contains(&f) {
                    candidates.push(f);
                }
            }
            for f in candidates {
                best = best.min(objective(&[f]));
            }
        }
        _ => {
            for &f0 in &grid {
                let mut seconds = grid.clone();
                for target in [0.0, 1.0] {
                    let f1 = (alpha - target * w_dep - f0 * free[0].1) / free[1].1;
                    if (0.0..=1.0).contains(&f1) {
                        seconds.push(f1);
                    }
                }
                for f1 in seconds {
                    best = best.min(objective(&[f0, f1]));
                }
            }
        }
    }
    Ok(best)
}
