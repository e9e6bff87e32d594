//! Default-time laws, name pools, tranche terms and the empirical measure of
//! default-by-horizon probabilities, plus the finite-pool checks of the
//! standing assumptions (investment grade, non-degeneracy, not flat before
//! the horizon) and the Chebyshev tail bound.

use alloc::vec::Vec;

use crate::merton::MertonParams;
use crate::special::{abs, floor, log10, powf, round};
use crate::{Error, Result};

/// Tolerance for `cdf(last grid point) + tail_mass == 1`.
const MASS_TOL: f64 = 1e-9;

/// Default `δ` for the not-flat check, as a fraction of the horizon.
pub const NOT_FLAT_DELTA_FRACTION: f64 = 1.0 / 20.0;
/// Default `ε` for the not-flat check.
pub const NOT_FLAT_EPSILON: f64 = 1e-8;

/// Piecewise-linear default-time CDF on a finite grid starting at `t = 0`,
/// with the remaining mass sitting at `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    times: Vec<f64>,
    values: Vec<f64>,
    tail_mass: f64,
}

impl TabulatedCdf {
    /// `points` are `(t, F(t))` pairs. The first time must be 0; a positive
    /// `F(0)` is an atom at time 0.
    pub fn new(points: &[(f64, f64)], tail_mass: f64) -> Result<Self> {
        let Some(&(t0, _)) = points.first() else {
            return Err(Error::invalid("tabulated CDF needs at least one point"));
        };
        if t0 != 0.0 {
            return Err(Error::invalid("tabulated CDF grid must start at t = 0"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("tabulated CDF times must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::invalid("tabulated CDF values must be nondecreasing"));
            }
        }
        if points.iter().any(|&(t, f)| !t.is_finite() || !(0.0..=1.0).contains(&f)) {
            return Err(Error::invalid("tabulated CDF values must lie in [0, 1] at finite times"));
        }
        if !(0.0..=1.0).contains(&tail_mass) {
            return Err(Error::invalid("tail mass must lie in [0, 1]"));
        }
        let last = points[points.len() - 1].1;
        if abs(last + tail_mass - 1.0) > MASS_TOL {
            return Err(Error::invalid("tabulated CDF plus tail mass must total 1"));
        }
        Ok(Self {
            times: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
            tail_mass,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if t == f64::INFINITY {
            return 1.0;
        }
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == self.times.len() {
            return self.values[idx - 1];
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (f0, f1) = (self.values[idx - 1], self.values[idx]);
        f0 + (f1 - f0) * (t - t0) / (t1 - t0)
    }

    fn cdf_left(&self, t: f64) -> f64 {
        // continuous except for the atom at 0
        if t <= 0.0 {
            0.0
        } else {
            self.cdf(t)
        }
    }

    fn inverse(&self, target: f64) -> f64 {
        if target <= self.values[0] {
            return 0.0;
        }
        let idx = self.values.partition_point(|&c| c < target);
        if idx == self.values.len() {
            return self.times[idx - 1];
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (f0, f1) = (self.values[idx - 1], self.values[idx]);
        t0 + (target - f0) / (f1 - f0) * (t1 - t0)
    }
}

/// Default-time law with finitely many atoms, plus mass at `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
    tail_mass: f64,
}

impl DiscreteLaw {
    pub fn new(atoms: &[(f64, f64)], tail_mass: f64) -> Result<Self> {
        let mut atoms = atoms.to_vec();
        if atoms.iter().any(|&(t, m)| !(t >= 0.0 && t.is_finite()) || !(m >= 0.0)) {
            return Err(Error::invalid("discrete law atoms need finite t >= 0 and mass >= 0"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = atoms.iter().map(|a| a.1).sum::<f64>() + tail_mass;
        if !(0.0..=1.0).contains(&tail_mass) || abs(total - 1.0) > MASS_TOL {
            return Err(Error::invalid("discrete law masses must total 1"));
        }
        Ok(Self { atoms, tail_mass })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    fn cdf(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 1.0;
        }
        self.atoms.iter().take_while(|a| a.0 <= t).map(|a| a.1).sum()
    }

    fn cdf_left(&self, t: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 < t).map(|a| a.1).sum()
    }

    fn inverse(&self, target: f64, horizon: f64) -> f64 {
        let mut acc = 0.0;
        let mut last = 0.0;
        for &(t, m) in self.atoms.iter().take_while(|a| a.0 < horizon) {
            acc += m;
            last = t;
            if acc >= target && m > 0.0 {
                return t;
            }
        }
        last
    }
}

/// Risk-neutral law of one name's default time on `[0, ∞]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DefaultDistribution {
    Tabulated(TabulatedCdf),
    Discrete(DiscreteLaw),
    Merton(MertonParams),
}

impl DefaultDistribution {
    /// Default by the horizon with probability `p`, spread uniformly over
    /// `[0, horizon)`.
    pub fn uniform_before(p: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(Self::Tabulated(TabulatedCdf::new(&[(0.0, 0.0), (horizon, p)], 1.0 - p)?))
    }

    /// Right-continuous CDF `μ[0, t]`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Self::Tabulated(c) => c.cdf(t),
            Self::Discrete(d) => d.cdf(t),
            Self::Merton(m) => m.cdf(t),
        }
    }

    /// `μ[0, t)`.
    fn cdf_left(&self, t: f64) -> f64 {
        match self {
            Self::Tabulated(c) => c.cdf_left(t),
            Self::Discrete(d) => d.cdf_left(t),
            Self::Merton(m) => {
                if t <= 0.0 {
                    0.0
                } else {
                    m.cdf(t)
                }
            }
        }
    }

    /// `μ[a, b)`.
    pub fn window_prob(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        (self.cdf_left(b) - self.cdf_left(a)).max(0.0)
    }

    /// `μ[0, horizon)`.
    pub fn default_prob(&self, horizon: f64) -> f64 {
        self.cdf_left(horizon).clamp(0.0, 1.0)
    }

    /// Default time given default in `[0, horizon)`, at conditional
    /// quantile `u ∈ [0, 1)`.
    pub fn inverse_cdf(&self, u: f64, horizon: f64) -> f64 {
        let p = self.default_prob(horizon);
        let target = u * p;
        let t = match self {
            Self::Tabulated(c) => c.inverse(target),
            Self::Discrete(d) => d.inverse(target, horizon),
            Self::Merton(m) => m.inverse_cdf(target, horizon),
        };
        t.clamp(0.0, horizon * (1.0 - f64::EPSILON))
    }
}

/// An ordered pool of `N >= 1` names.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolSpec {
    names: Vec<DefaultDistribution>,
}

impl PoolSpec {
    pub fn new(names: Vec<DefaultDistribution>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::invalid("a pool needs at least one name"));
        }
        Ok(Self { names })
    }

    /// Homogeneous-in-law-shape pool: name `n` defaults before `horizon`
    /// with probability `probs[n]`, uniformly in time.
    pub fn from_default_probs(probs: &[f64], horizon: f64) -> Result<Self> {
        let names = probs
            .iter()
            .map(|&p| DefaultDistribution::uniform_before(p, horizon))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names)
    }

    /// Every third name (1-based index divisible by 3) follows `a`, the
    /// rest follow `b`.
    pub fn two_type(n: usize, a: DefaultDistribution, b: DefaultDistribution) -> Result<Self> {
        let names = (1..=n)
            .map(|i| if i % 3 == 0 { a.clone() } else { b.clone() })
            .collect();
        Self::new(names)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[DefaultDistribution] {
        &self.names
    }

    /// Per-name `μ_n[0, horizon)`.
    pub fn default_probs(&self, horizon: f64) -> Vec<f64> {
        self.names.iter().map(|d| d.default_prob(horizon)).collect()
    }
}

/// Tranche terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TrancheSpec {
    pub attachment: f64,
    pub detachment: f64,
    /// Continuously compounded interest rate per year.
    pub rate: f64,
    /// Contract horizon in years.
    pub horizon: f64,
    pub premium_dates: Vec<f64>,
}

impl TrancheSpec {
    pub fn new(
        attachment: f64,
        detachment: f64,
        rate: f64,
        horizon: f64,
        mut premium_dates: Vec<f64>,
    ) -> Result<Self> {
        if !(0.0 < attachment && attachment < detachment && detachment <= 1.0) {
            return Err(Error::invalid("tranche needs 0 < attachment < detachment <= 1"));
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::invalid("interest rate must be finite and nonnegative"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon must be finite and positive"));
        }
        if premium_dates.is_empty() {
            return Err(Error::invalid("at least one premium date is required"));
        }
        if premium_dates.iter().any(|&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::invalid("premium dates must lie in (0, horizon]"));
        }
        premium_dates.sort_by(f64::total_cmp);
        Ok(Self {
            attachment,
            detachment,
            rate,
            horizon,
            premium_dates,
        })
    }

    /// Same terms with a different attachment point.
    pub fn with_attachment(&self, attachment: f64) -> Result<Self> {
        Self::new(
            attachment,
            self.detachment,
            self.rate,
            self.horizon,
            self.premium_dates.clone(),
        )
    }

    pub fn width(&self) -> f64 {
        self.detachment - self.attachment
    }
}

/// Merge key: 0 and 1 exactly, everything else rounded to 12 significant
/// digits (relative, so tiny probabilities keep their own atoms).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum MergeKey {
    Zero,
    Interior(i32, i64),
    One,
}

fn merge_key(p: f64) -> MergeKey {
    if p == 0.0 {
        return MergeKey::Zero;
    }
    if p == 1.0 {
        return MergeKey::One;
    }
    let mut exponent = floor(log10(p)) as i32;
    let mut mantissa = round(p / powi10(exponent - 11)) as i64;
    if mantissa >= 1_000_000_000_000 {
        exponent += 1;
        mantissa = round(p / powi10(exponent - 11)) as i64;
    } else if mantissa < 100_000_000_000 {
        exponent -= 1;
        mantissa = round(p / powi10(exponent - 11)) as i64;
    }
    MergeKey::Interior(exponent, mantissa)
}

fn powi10(e: i32) -> f64 {
    powf(10.0, e as f64)
}

/// Discrete probability measure on `[0, 1]`: atoms `(p, weight)` sorted by
/// `p`. Points agreeing to 12 significant digits are merged into one atom at
/// their weighted mean; 0 and 1 merge only with themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct LossProbMeasure {
    atoms: Vec<(f64, f64)>,
}

impl LossProbMeasure {
    /// Weights must be positive and sum to 1 within 1e-12.
    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if abs(total - 1.0) > 1e-12 {
            return Err(Error::invalid("loss measure weights must sum to 1"));
        }
        Self::from_weights(atoms)
    }

    /// Positive weights, normalized to total mass 1.
    pub fn from_weights(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("loss measure needs at least one atom"));
        }
        if atoms
            .iter()
            .any(|&(p, w)| !(0.0..=1.0).contains(&p) || !(w > 0.0) || !w.is_finite())
        {
            return Err(Error::invalid("loss measure atoms need p in [0, 1] and weight > 0"));
        }
        let mut keyed: Vec<(MergeKey, f64, f64)> =
            atoms.iter().map(|&(p, w)| (merge_key(p), p, w)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let total: f64 = keyed.iter().map(|k| k.2).sum();
        // (key, Σ w·p, Σ w)
        let mut groups: Vec<(MergeKey, f64, f64)> = Vec::with_capacity(keyed.len());
        for (key, p, w) in keyed {
            match groups.last_mut() {
                Some(g) if g.0 == key => {
                    g.1 += w * p;
                    g.2 += w;
                }
                _ => groups.push((key, w * p, w)),
            }
        }
        let atoms = groups
            .into_iter()
            .map(|(key, wp, w)| {
                let p = match key {
                    MergeKey::Zero => 0.0,
                    MergeKey::One => 1.0,
                    MergeKey::Interior(..) => (wp / w).clamp(0.0, 1.0),
                };
                (p, w / total)
            })
            .collect();
        Ok(Self { atoms })
    }

    /// Single atom at `p`.
    pub fn dirac(p: f64) -> Result<Self> {
        Self::new(&[(p, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `∫ f(p) m(dp)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(p, w)| w * f(p)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|p| p)
    }

    /// Weight of the atom merged with `p`, 0 if absent.
    pub fn mass_at(&self, p: f64) -> f64 {
        let key = merge_key(p);
        self.atoms
            .iter()
            .find(|a| merge_key(a.0) == key)
            .map_or(0.0, |a| a.1)
    }

    /// Mass of the closed interval `[lo, hi]`.
    pub fn mass_of_interval(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0 >= lo && a.0 <= hi)
            .map(|a| a.1)
            .sum()
    }
}

/// `(1/N) Σ δ_{p_n}` with `p_n = μ_n[0, horizon)`.
pub fn build_loss_measure(pool: &PoolSpec, horizon: f64) -> LossProbMeasure {
    let n = pool.len() as f64;
    let atoms: Vec<(f64, f64)> = pool
        .default_probs(horizon)
        .into_iter()
        .map(|p| (p, 1.0 / n))
        .collect();
    LossProbMeasure::from_weights(&atoms).expect("default probabilities lie in [0, 1]")
}

/// One assumption evaluated at finite size: the left-hand quantity and
/// whether it satisfies its inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionCheck {
    pub value: f64,
    pub ok: bool,
}

/// Investment grade: `∫ p m(dp) < alpha`.
pub fn check_investment_grade(m: &LossProbMeasure, alpha: f64) -> AssumptionCheck {
    let value = m.mean();
    AssumptionCheck {
        value,
        ok: value < alpha,
    }
}

/// Non-degeneracy: `m{0} < 1 − alpha`.
pub fn check_nondegeneracy(m: &LossProbMeasure, alpha: f64) -> AssumptionCheck {
    let value = m.mass_at(0.0);
    AssumptionCheck {
        value,
        ok: value < 1.0 - alpha,
    }
}

/// Not flat before the horizon: the fraction of names with
/// `μ_n[T − δ, T) < ε` must stay below `alpha`.
pub fn check_not_flat(
    pool: &PoolSpec,
    horizon: f64,
    alpha: f64,
    delta: f64,
    epsilon: f64,
) -> Result<AssumptionCheck> {
    if !(delta > 0.0 && delta < horizon) || !(epsilon > 0.0) {
        return Err(Error::invalid("not-flat check needs 0 < delta < horizon and epsilon > 0"));
    }
    let flat = pool
        .names()
        .iter()
        .filter(|d| d.window_prob(horizon - delta, horizon) < epsilon)
        .count();
    let value = flat as f64 / pool.len() as f64;
    Ok(AssumptionCheck {
        value,
        ok: value < alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevBound {
    /// `Σ p_n(1 − p_n) / (N² (α − mean)²)`.
    pub variance_bound: f64,
    /// `1 / (4N (α − mean)²)`.
    pub crude_bound: f64,
}

/// Chebyshev bound on `P{L_{T−} > alpha}` for a pool of `n` names whose
/// empirical default-probability measure is `m`.
pub fn chebyshev_tail_bound(m: &LossProbMeasure, n: usize, alpha: f64) -> Result<ChebyshevBound> {
    let mean = m.mean();
    if mean >= alpha {
        return Err(Error::InvestmentGrade { mean, alpha });
    }
    let gap_sq = (alpha - mean) * (alpha - mean);
    let n = n as f64;
    Ok(ChebyshevBound {
        variance_bound: m.integrate(|p| p * (1.0 - p)) / (n * gap_sq),
        crude_bound: 1.0 / (4.0 * n * gap_sq),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub mean_default_prob: f64,
    pub ig_ok: bool,
    pub zero_mass_fraction: f64,
    pub nondegen_ok: bool,
    pub not_flat_delta: f64,
    pub not_flat_epsilon: f64,
    pub notflat_fraction: f64,
    pub notflat_ok: bool,
    /// `None` when the pool is not investment grade.
    pub chebyshev_bound: Option<ChebyshevBound>,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.ig_ok && self.nondegen_ok && self.notflat_ok
    }
}

/// Runs every finite-pool assumption check. `delta`/`epsilon` default to
/// `T/20` and `1e-8`.
pub fn assess_pool(
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    delta: Option<f64>,
    epsilon: Option<f64>,
) -> Result<AssumptionReport> {
    let delta = delta.unwrap_or(tranche.horizon * NOT_FLAT_DELTA_FRACTION);
    let epsilon = epsilon.unwrap_or(NOT_FLAT_EPSILON);
    let m = build_loss_measure(pool, tranche.horizon);
    let ig = check_investment_grade(&m, tranche.attachment);
    let nd = check_nondegeneracy(&m, tranche.attachment);
    let nf = check_not_flat(pool, tranche.horizon, tranche.attachment, delta, epsilon)?;
    Ok(AssumptionReport {
        mean_default_prob: ig.value,
        ig_ok: ig.ok,
        zero_mass_fraction: nd.value,
        nondegen_ok: nd.ok,
        not_flat_delta: delta,
        not_flat_epsilon: epsilon,
        notflat_fraction: nf.value,
        notflat_ok: nf.ok,
        chebyshev_bound: chebyshev_tail_bound(&m, pool.len(), tranche.attachment).ok(),
    })
}
