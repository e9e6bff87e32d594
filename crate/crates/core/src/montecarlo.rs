//! Monte Carlo validation: plain sampling, exponentially tilted importance
//! sampling, and exact small-pool oracles.
//!
//! Under the tilted measure each name defaults before `T` with probability
//! `ũ_n = Φ(𝔲_n, Λ)`, and its default time given default keeps the base
//! conditional law on `[0, T)`. On a path with `k` defaults and
//! `γ = k − Nα`, the likelihood ratio back to the base measure is
//! `e^{−Λγ} e^{−N𝔍}`, so
//!
//! ```text
//! E[P] = e^{−N𝔍} Ẽ[P e^{−Λγ} 1{γ > 0}]
//! ```
//!
//! Every sample draws from its own ChaCha8 stream (stream number = sample
//! index), and samples are reduced in fixed blocks of [`BLOCK_SIZE`] in
//! block order, so estimates do not depend on how blocks are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::entropy::{phi, rate_at, solve, BoundaryCase};
use crate::pool::{build_loss_measure, DefaultDistribution, PoolSpec, TrancheSpec};
use crate::special::{abs, ceil, exp, floor, ln, powf, round, sqrt, SQRT_2PI};
use crate::{Error, Result};

pub const BLOCK_SIZE: usize = 1024;
/// Largest pool accepted by [`poisson_binomial_pmf`].
pub const PMF_MAX_NAMES: usize = 100_000;
/// Bins of [`hn_empirical`] with fewer samples are flagged and not compared.
pub const HN_MIN_BIN: usize = 30;
const ENUMERATION_MAX_OUTCOMES: u64 = 20_000_000;

/// `Nα` and `Nβ`, snapped to integers within 1e-9 so that loss counts are
/// compared against the attachment without float noise.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CountScale {
    n: usize,
    n_alpha: f64,
    n_beta: f64,
}

fn snap(x: f64) -> f64 {
    let r = round(x);
    if abs(x - r) <= 1e-9 {
        r
    } else {
        x
    }
}

impl CountScale {
    fn new(n: usize, tranche: &TrancheSpec) -> Self {
        let nf = n as f64;
        Self {
            n,
            n_alpha: snap(nf * tranche.attachment),
            n_beta: snap(nf * tranche.detachment),
        }
    }

    fn gamma(&self, count: usize) -> f64 {
        count as f64 - self.n_alpha
    }

    /// Tranche loss `L̄` after `count` defaults.
    fn tranche_loss(&self, count: usize) -> f64 {
        let k = count as f64;
        (k.min(self.n_beta) - self.n_alpha).max(0.0) / (self.n_beta - self.n_alpha)
    }
}

/// Base pool together with its exponential tilt at the tranche attachment.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedPool {
    pub base: PoolSpec,
    pub horizon: f64,
    pub lambda: f64,
    /// `𝔍(α, Ū^(N))` at `lambda`.
    pub rate_i: f64,
    /// `𝔲_n = μ_n[0, T)`.
    pub base_probs: Vec<f64>,
    /// `ũ_n = Φ(𝔲_n, Λ)`.
    pub tilted_probs: Vec<f64>,
}

/// Tilt `pool` so that its mean default probability before `T` becomes the
/// attachment point.
pub fn tilt_pool(pool: &PoolSpec, tranche: &TrancheSpec) -> Result<TiltedPool> {
    let m = build_loss_measure(pool, tranche.horizon);
    let sol = solve(&m, tranche.attachment)?;
    match sol.boundary_case {
        BoundaryCase::Interior => {}
        BoundaryCase::Infeasible | BoundaryCase::DegenerateMuDagger => {
            sol.require_pricable(tranche.attachment, &m)?;
        }
        BoundaryCase::LambdaMinusInf | BoundaryCase::LambdaPlusInf => {
            return Err(Error::BoundaryMultiplier { lambda: sol.lambda });
        }
    }
    let base_probs = pool.default_probs(tranche.horizon);
    let tilted_probs = base_probs.iter().map(|&p| phi(p, sol.lambda)).collect();
    Ok(TiltedPool {
        base: pool.clone(),
        horizon: tranche.horizon,
        lambda: sol.lambda,
        rate_i: rate_at(&m, sol.lambda),
        base_probs,
        tilted_probs,
    })
}

impl TiltedPool {
    pub fn len(&self) -> usize {
        self.base_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_probs.is_empty()
    }

    /// `(1/N) Σ ũ_n`.
    pub fn tilted_mean(&self) -> f64 {
        self.tilted_probs.iter().sum::<f64>() / self.len() as f64
    }

    /// Tilted law of name `i`: `μ̃[0, t]`, scaled by `ũ/𝔲` on `[0, T)` and by
    /// `(1−ũ)/(1−𝔲)` from `T` on.
    pub fn tilted_cdf(&self, i: usize, t: f64) -> f64 {
        let law = &self.base.names()[i];
        let (p, q) = (self.base_probs[i], self.tilted_probs[i]);
        if t < self.horizon {
            if p == 0.0 {
                0.0
            } else {
                law.cdf(t) * q / p
            }
        } else if p == 1.0 {
            1.0
        } else {
            q + (law.cdf(t) - p) * (1.0 - q) / (1.0 - p)
        }
    }

    /// `ln dP/dP̃` on a path with `count` defaults before `T`:
    /// `−Λ(count − Nα) − N𝔍`.
    pub fn ln_likelihood_ratio(&self, count: usize, attachment: f64) -> f64 {
        let n = self.len() as f64;
        -self.lambda * (count as f64 - n * attachment) - n * self.rate_i
    }
}

/// Default times before the horizon, sorted, and `γ_N = N(L_{T−} − α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPath {
    pub default_times: Vec<f64>,
    pub gamma: f64,
}

/// `∫_{[0,T)} e^{−Rs} dL̄_s` for a path with sorted default times.
pub fn protection_payoff(default_times: &[f64], n: usize, tranche: &TrancheSpec) -> f64 {
    payoff_scaled(default_times, &CountScale::new(n, tranche), tranche.rate)
}

fn payoff_scaled(times: &[f64], scale: &CountScale, rate: f64) -> f64 {
    let mut total = 0.0;
    let mut prev = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let level = scale.tranche_loss(k + 1);
        let jump = level - prev;
        if jump > 0.0 {
            total += exp(-rate * t) * jump;
        }
        prev = level;
    }
    total
}

/// Which payoff the estimators average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Payoff {
    /// Discounted tranche loss.
    #[default]
    Protection,
    /// `1{L_{T−} > α}`.
    Exceedance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Plain,
    Importance,
}

/// Draws default counts and times for one measure (base or tilted).
#[derive(Debug, Clone)]
pub struct PathSampler<'a> {
    names: &'a [DefaultDistribution],
    probs: &'a [f64],
    horizon: f64,
    rate: f64,
    scale: CountScale,
    lambda: f64,
    ln_exponent: f64,
    kind: EstimatorKind,
    payoff: Payoff,
}

/// One simulated path summarized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub count: usize,
    pub gamma: f64,
    /// Payoff on the path (0 when `γ ≤ 0`).
    pub payoff: f64,
    /// Payoff times the importance weight `e^{−Λγ}1{γ>0}` (the payoff itself
    /// for plain sampling).
    pub weighted: f64,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

impl<'a> PathSampler<'a> {
    pub fn plain(pool: &'a PoolSpec, probs: &'a [f64], tranche: &TrancheSpec, payoff: Payoff) -> Self {
        Self {
            names: pool.names(),
            probs,
            horizon: tranche.horizon,
            rate: tranche.rate,
            scale: CountScale::new(pool.len(), tranche),
            lambda: 0.0,
            ln_exponent: 0.0,
            kind: EstimatorKind::Plain,
            payoff,
        }
    }

    pub fn tilted(tilted: &'a TiltedPool, tranche: &TrancheSpec, payoff: Payoff) -> Self {
        Self {
            names: tilted.base.names(),
            probs: &tilted.tilted_probs,
            horizon: tranche.horizon,
            rate: tranche.rate,
            scale: CountScale::new(tilted.len(), tranche),
            lambda: tilted.lambda,
            ln_exponent: -(tilted.len() as f64) * tilted.rate_i,
            kind: EstimatorKind::Importance,
            payoff,
        }
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    fn rng(seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng
    }

    /// Full path for sample `index` of stream family `seed`.
    pub fn sample_loss_path(&self, seed: u64, index: u64) -> LossPath {
        let mut rng = Self::rng(seed, index);
        let defaulted = self.draw_defaults(&mut rng);
        let gamma = self.scale.gamma(defaulted.len());
        LossPath {
            default_times: self.draw_times(&defaulted, &mut rng),
            gamma,
        }
    }

    fn draw_defaults(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| (uniform(rng) < p).then_some(i))
            .collect()
    }

    fn draw_times(&self, defaulted: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut times: Vec<f64> = defaulted
            .iter()
            .map(|&i| self.names[i].inverse_cdf(uniform(rng), self.horizon))
            .collect();
        times.sort_by(f64::total_cmp);
        times
    }

    /// Sample `index`; default times are only drawn when the tranche is hit.
    pub fn sample(&self, seed: u64, index: u64) -> SampleOutcome {
        let mut rng = Self::rng(seed, index);
        let defaulted = self.draw_defaults(&mut rng);
        let count = defaulted.len();
        let gamma = self.scale.gamma(count);
        if gamma <= 0.0 {
            return SampleOutcome {
                count,
                gamma,
                payoff: 0.0,
                weighted: 0.0,
            };
        }
        let payoff = match self.payoff {
            Payoff::Protection => {
                payoff_scaled(&self.draw_times(&defaulted, &mut rng), &self.scale, self.rate)
            }
            Payoff::Exceedance => 1.0,
        };
        let weighted = match self.kind {
            EstimatorKind::Plain => payoff,
            EstimatorKind::Importance => payoff * exp(-self.lambda * gamma),
        };
        SampleOutcome {
            count,
            gamma,
            payoff,
            weighted,
        }
    }

    /// Accumulate samples `[block·BLOCK_SIZE, min((block+1)·BLOCK_SIZE, n_samples))`.
    pub fn run_block(&self, seed: u64, block: usize, n_samples: usize) -> BlockStats {
        let start = block * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(n_samples);
        let mut stats = BlockStats::default();
        for index in start..end {
            stats.push(&self.sample(seed, index as u64));
        }
        stats
    }

    /// Combine per-block statistics (in block order) into an estimate.
    pub fn finish(&self, blocks: &[BlockStats], seed: u64) -> Result<McEstimate> {
        let mut total = BlockStats::default();
        for b in blocks {
            total.merge(b);
        }
        if self.kind == EstimatorKind::Importance && total.positive == 0 && total.count > 0 {
            return Err(Error::NoEffectiveSamples);
        }
        let n = total.count as f64;
        let se = if total.count > 1 {
            sqrt(total.m2 / (n - 1.0) / n)
        } else {
            0.0
        };
        let scale = exp(self.ln_exponent);
        Ok(McEstimate {
            n_samples: total.count,
            kind: self.kind,
            seed,
            scaled_mean: total.mean,
            scaled_standard_error: se,
            ln_exponent: self.ln_exponent,
            mean: total.mean * scale,
            standard_error: se * scale,
            ln_mean: ln(total.mean) + self.ln_exponent,
            positive_samples: total.positive,
        })
    }

    /// Sequential estimate over `n_samples`.
    pub fn estimate(&self, n_samples: usize, seed: u64) -> Result<McEstimate> {
        if n_samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        let blocks: Vec<BlockStats> = (0..block_count(n_samples))
            .map(|b| self.run_block(seed, b, n_samples))
            .collect();
        self.finish(&blocks, seed)
    }
}

pub fn block_count(n_samples: usize) -> usize {
    n_samples.div_ceil(BLOCK_SIZE)
}

/// Count, mean and centred second moment of the weighted payoffs, plus the
/// number of samples with `γ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockStats {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
    pub positive: usize,
}

impl BlockStats {
    fn push(&mut self, s: &SampleOutcome) {
        self.count += 1;
        if s.gamma > 0.0 {
            self.positive += 1;
        }
        let delta = s.weighted - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (s.weighted - self.mean);
    }

    /// Chan et al. pairwise update.
    pub fn merge(&mut self, other: &BlockStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
        self.positive += other.positive;
    }
}

/// Monte Carlo estimate of the expected payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub n_samples: usize,
    pub kind: EstimatorKind,
    pub seed: u64,
    /// Sample mean before the exponential factor (`I_N` for importance
    /// sampling; the estimate itself for plain sampling).
    pub scaled_mean: f64,
    pub scaled_standard_error: f64,
    /// `−N𝔍` for importance sampling, 0 for plain sampling.
    pub ln_exponent: f64,
    pub mean: f64,
    pub standard_error: f64,
    pub ln_mean: f64,
    pub positive_samples: usize,
}

/// Importance-sampling estimate of the expected protection payoff.
pub fn estimate_protection_is(
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let tilted = tilt_pool(pool, tranche)?;
    PathSampler::tilted(&tilted, tranche, Payoff::Protection).estimate(n_samples, seed)
}

/// Plain Monte Carlo estimate of the expected protection payoff.
pub fn estimate_protection_plain(
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let probs = pool.default_probs(tranche.horizon);
    PathSampler::plain(pool, &probs, tranche, Payoff::Protection).estimate(n_samples, seed)
}

/// Exact law of the number of successes among independent Bernoulli trials.
pub fn poisson_binomial_pmf(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.len() > PMF_MAX_NAMES {
        return Err(Error::invalid("Poisson-binomial PMF is limited to 100000 names"));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::invalid("probabilities must lie in [0, 1]"));
    }
    let mut pmf = vec![0.0; probs.len() + 1];
    pmf[0] = 1.0;
    // support of the running PMF is [lo, hi]
    let (mut lo, mut hi) = (0usize, 0usize);
    for &p in probs {
        let q = 1.0 - p;
        if p == 1.0 {
            pmf.copy_within(lo..=hi, lo + 1);
            pmf[lo] = 0.0;
            lo += 1;
            hi += 1;
            continue;
        }
        if p == 0.0 {
            continue;
        }
        pmf[hi + 1] = pmf[hi] * p;
        for k in (lo + 1..=hi).rev() {
            pmf[k] = pmf[k] * q + pmf[k - 1] * p;
        }
        pmf[lo] *= q;
        hi += 1;
    }
    Ok(pmf)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalCltRow {
    /// `s = k − Nα`.
    pub s: f64,
    pub count: usize,
    pub probability: f64,
    /// `|√(2πNσ²) P{γ = s} − 1|`.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalCltReport {
    pub n: usize,
    pub sigma_sq: f64,
    pub rows: Vec<LocalCltRow>,
    pub max_relative_error: f64,
}

/// Compare the exact law of `γ_N` under the tilted probabilities with the
/// local normal approximation `1/√(2πNσ²)` for `0 ≤ s ≤ N^{1/4}`.
pub fn local_clt_check(tilted_probs: &[f64], alpha: f64) -> Result<LocalCltReport> {
    let n = tilted_probs.len();
    if n == 0 {
        return Err(Error::invalid("empty pool"));
    }
    let nf = n as f64;
    let sigma_sq = tilted_probs.iter().map(|&u| u * (1.0 - u)).sum::<f64>() / nf;
    if !(sigma_sq > 0.0) {
        return Err(Error::invalid("variance factor must be positive"));
    }
    let pmf = poisson_binomial_pmf(tilted_probs)?;
    let n_alpha = snap(nf * alpha);
    let cutoff = powf(nf, 0.25);
    let norm = sqrt(2.0 * core::f64::consts::PI * nf * sigma_sq);
    let mut rows = Vec::new();
    let mut count = ceil(n_alpha) as usize;
    while count <= n && count as f64 - n_alpha <= cutoff {
        let probability = pmf[count];
        rows.push(LocalCltRow {
            s: count as f64 - n_alpha,
            count,
            probability,
            relative_error: abs(norm * probability - 1.0),
        });
        count += 1;
    }
    let max_relative_error = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    Ok(LocalCltReport {
        n,
        sigma_sq,
        rows,
        max_relative_error,
    })
}

/// Conditional mean of the protection payoff given `γ_N = s` under tilted
/// sampling, against `e^{−RT} s / (N(β − α))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HnRow {
    pub s: f64,
    pub samples: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub reference: f64,
    pub ratio: f64,
    /// Fewer than [`HN_MIN_BIN`] samples: not compared.
    pub flagged: bool,
}

/// Accumulators per loss count for [`hn_empirical`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HnBins {
    /// Indexed by `count − ⌈Nα⌉`.
    pub bins: Vec<BlockStats>,
}

impl HnBins {
    pub fn merge(&mut self, other: &HnBins) {
        if self.bins.len() < other.bins.len() {
            self.bins.resize(other.bins.len(), BlockStats::default());
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.merge(b);
        }
    }
}

impl PathSampler<'_> {
    fn hn_first_count(&self) -> usize {
        let first = ceil(self.scale.n_alpha) as usize;
        if first as f64 == self.scale.n_alpha {
            first + 1
        } else {
            first
        }
    }

    fn hn_bin_count(&self) -> usize {
        let cutoff = powf(self.scale.n as f64, 0.25);
        let last = floor(self.scale.n_alpha + cutoff) as usize;
        (last + 1).saturating_sub(self.hn_first_count())
    }

    /// Per-count payoff statistics for one block of tilted samples.
    pub fn run_hn_block(&self, seed: u64, block: usize, n_samples: usize) -> HnBins {
        let first = self.hn_first_count();
        let mut bins = HnBins {
            bins: vec![BlockStats::default(); self.hn_bin_count()],
        };
        let start = block * BLOCK_SIZE;
        let end = (start + BLOCK_SIZE).min(n_samples);
        for index in start..end {
            let s = self.sample(seed, index as u64);
            if s.count >= first && s.count - first < bins.bins.len() {
                let raw = SampleOutcome {
                    weighted: s.payoff,
                    ..s
                };
                bins.bins[s.count - first].push(&raw);
            }
        }
        bins
    }

    /// Rows of the `H_N` table from merged bins.
    pub fn hn_rows(&self, bins: &HnBins) -> Vec<HnRow> {
        let first = self.hn_first_count();
        let width = (self.scale.n_beta - self.scale.n_alpha) / self.scale.n as f64;
        let discount = exp(-self.rate * self.horizon);
        (0..self.hn_bin_count())
            .map(|j| {
                let stats = bins.bins.get(j).copied().unwrap_or_default();
                let s = self.scale.gamma(first + j);
                let reference = discount * s / (self.scale.n as f64 * width);
                let nb = stats.count as f64;
                let standard_error = if stats.count > 1 {
                    sqrt(stats.m2 / (nb - 1.0) / nb)
                } else {
                    0.0
                };
                HnRow {
                    s,
                    samples: stats.count,
                    mean: stats.mean,
                    standard_error,
                    reference,
                    ratio: stats.mean / reference,
                    flagged: stats.count < HN_MIN_BIN,
                }
            })
            .collect()
    }
}

/// Empirical `H_N(s)` for `0 < s ≤ N^{1/4}` from `n_samples` tilted paths.
pub fn hn_empirical(
    pool: &PoolSpec,
    tranche: &TrancheSpec,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<HnRow>> {
    let tilted = tilt_pool(pool, tranche)?;
    let sampler = PathSampler::tilted(&tilted, tranche, Payoff::Protection);
    let mut bins = HnBins::default();
    for b in 0..block_count(n_samples) {
        bins.merge(&sampler.run_hn_block(seed, b, n_samples));
    }
    Ok(sampler.hn_rows(&bins))
}

/// Exact expected protection payoff by enumerating every joint outcome of
/// a pool of discrete default-time laws (each name: one of its atoms before
/// `T`, or no default before `T`).
pub fn enumerate_protection(pool: &PoolSpec, tranche: &TrancheSpec) -> Result<f64> {
    let horizon = tranche.horizon;
    let mut outcomes: Vec<Vec<(Option<f64>, f64)>> = Vec::with_capacity(pool.len());
    for law in pool.names() {
        let DefaultDistribution::Discrete(d) = law else {
            return Err(Error::invalid("enumeration needs discrete default-time laws"));
        };
        let mut list: Vec<(Option<f64>, f64)> = d
            .atoms()
            .iter()
            .filter(|a| a.0 < horizon && a.1 > 0.0)
            .map(|&(t, m)| (Some(t), m))
            .collect();
        list.push((None, 1.0 - law.default_prob(horizon)));
        outcomes.push(list);
    }
    let total: u64 = outcomes
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .unwrap_or(u64::MAX);
    if total > ENUMERATION_MAX_OUTCOMES {
        return Err(Error::invalid("too many joint outcomes to enumerate"));
    }
    let scale = CountScale::new(pool.len(), tranche);
    let mut idx = vec![0usize; outcomes.len()];
    let mut times = Vec::with_capacity(outcomes.len());
    let mut expectation = 0.0;
    loop {
        let mut prob = 1.0;
        times.clear();
        for (o, &i) in outcomes.iter().zip(&idx) {
            let (t, m) = o[i];
            prob *= m;
            if let Some(t) = t {
                times.push(t);
            }
        }
        if prob > 0.0 && scale.gamma(times.len()) > 0.0 {
            times.sort_by(f64::total_cmp);
            expectation += prob * payoff_scaled(&times, &scale, tranche.rate);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(expectation);
            }
            idx[pos] += 1;
            if idx[pos] < outcomes[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `1/√(2πNσ²)`, the local normal density at lattice spacing 1.
pub fn local_normal_density(n: usize, sigma_sq: f64) -> f64 {
    1.0 / (SQRT_2PI * sqrt(n as f64 * sigma_sq))
}
