//! JSON run configuration.

use std::fs;
use std::path::Path;

use cdo_ld_core::correlation::{copula_mixture, gaussian_copula_grid, SystemicMixture};
use cdo_ld_core::merton::{build_gamma_merton_pool, limiting_measure, GammaVolSpec, MertonParams};
use cdo_ld_core::pool::{
    DefaultDistribution, DiscreteLaw, LossProbMeasure, PoolSpec, TabulatedCdf, TrancheSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    /// Required unless the correlation block lists its own state pools.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<PoolConfig>,
    pub tranche: TrancheConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationConfig>,
    #[serde(default)]
    pub assumptions: AssumptionConfig,
    #[serde(default)]
    pub curves: CurvesConfig,
    #[serde(default)]
    pub mc: McConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolConfig {
    Explicit {
        names: Vec<NameConfig>,
    },
    MertonGamma {
        theta: f64,
        #[serde(rename = "K")]
        barrier: f64,
        sigma_scale: f64,
        sigma_shape: f64,
        #[serde(rename = "N")]
        n: usize,
        #[serde(default = "default_n_quad")]
        n_quad: usize,
    },
    TwoType {
        #[serde(rename = "N")]
        n: usize,
        a: NameLaw,
        b: NameLaw,
    },
}

fn default_n_quad() -> usize {
    96
}

/// A name law repeated `count` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameConfig {
    #[serde(default = "one")]
    pub count: usize,
    #[serde(flatten)]
    pub law: NameLaw,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NameLaw {
    /// Default probability `p` by the horizon, spread uniformly over `[0, T)`.
    Uniform { p: f64 },
    /// `(t, F(t))` pairs from `t = 0`; the remaining mass never defaults.
    Tabulated { points: Vec<(f64, f64)>, tail_mass: f64 },
    /// `(t, mass)` atoms.
    Discrete { atoms: Vec<(f64, f64)>, tail_mass: f64 },
    Merton {
        theta: f64,
        #[serde(rename = "K")]
        barrier: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrancheConfig {
    pub attachment: f64,
    pub detachment: f64,
    pub rate: f64,
    pub horizon: f64,
    pub premium_dates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationConfig {
    States {
        states: Vec<StateConfig>,
        #[serde(default)]
        allow_state_violations: bool,
    },
    GaussianCopula {
        rho: f64,
        resolution: usize,
        #[serde(default)]
        allow_state_violations: bool,
    },
}

impl CorrelationConfig {
    pub fn allow_state_violations(&self) -> bool {
        match self {
            Self::States {
                allow_state_violations,
                ..
            }
            | Self::GaussianCopula {
                allow_state_violations,
                ..
            } => *allow_state_violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub label: String,
    pub prob: f64,
    pub pool: PoolConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionConfig {
    /// Not-flat window length; defaults to `T/20`.
    pub delta: Option<f64>,
    /// Not-flat mass threshold; defaults to `1e-8`.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvesConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub n_list: Vec<usize>,
    /// Attachment points for the spread curves; the tranche's own when empty.
    pub alphas: Vec<f64>,
}

impl Default for CurvesConfig {
    fn default() -> Self {
        Self {
            lambda_min: -10.0,
            lambda_max: 10.0,
            lambda_steps: 401,
            n_list: (1..=20).map(|k| 100 * k).collect(),
            alphas: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub clt_bound: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 1,
            clt_bound: 0.1,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse and validate: every pool and the tranche are built once here so
    /// that no command starts work on a broken config.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config =
            serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let tranche = self.tranche()?;
        match (&self.pool, &self.correlation) {
            (None, Some(CorrelationConfig::States { .. })) => {}
            (None, _) => return Err(config_err("config needs a pool")),
            (Some(p), _) => {
                p.build(tranche.horizon)?;
            }
        }
        if let Some(corr) = &self.correlation {
            self.mixture(&tranche)?;
            if let CorrelationConfig::GaussianCopula { .. } = corr {
                if self.pool.is_none() {
                    return Err(config_err("gaussian_copula correlation needs a base pool"));
                }
            }
        }
        let c = &self.curves;
        if !c.lambda_min.is_finite() || !c.lambda_max.is_finite() || c.lambda_min >= c.lambda_max || c.lambda_steps < 2 {
            return Err(config_err("curves need lambda_min < lambda_max and at least 2 steps"));
        }
        if c.n_list.is_empty() || c.n_list.contains(&0) {
            return Err(config_err("curves.n_list must hold positive pool sizes"));
        }
        for &a in &c.alphas {
            tranche.with_attachment(a).map_err(|e| config_err(format!("curves.alphas: {e}")))?;
        }
        if self.mc.samples == 0 {
            return Err(config_err("mc.samples must be positive"));
        }
        Ok(())
    }

    pub fn tranche(&self) -> Result<TrancheSpec, CliError> {
        let t = &self.tranche;
        TrancheSpec::new(
            t.attachment,
            t.detachment,
            t.rate,
            t.horizon,
            t.premium_dates.clone(),
        )
        .map_err(|e| config_err(format!("tranche: {e}")))
    }

    /// The single pool; an error for configs that only carry state pools.
    pub fn pool(&self) -> Result<PoolSpec, CliError> {
        let horizon = self.tranche.horizon;
        self.pool
            .as_ref()
            .ok_or_else(|| config_err("this command needs a top-level pool"))?
            .build(horizon)
    }

    /// Pool size: the top-level pool's, or the (shared) size of the state pools.
    pub fn pool_size(&self) -> Result<usize, CliError> {
        let horizon = self.tranche.horizon;
        match (&self.pool, &self.correlation) {
            (Some(p), _) => Ok(p.build(horizon)?.len()),
            (None, Some(CorrelationConfig::States { states, .. })) if !states.is_empty() => {
                Ok(states[0].pool.build(horizon)?.len())
            }
            _ => Err(config_err("config needs a pool")),
        }
    }

    pub fn limiting(&self) -> Result<Option<LossProbMeasure>, CliError> {
        match &self.pool {
            Some(p) => p.limiting(self.tranche.horizon),
            None => Ok(None),
        }
    }

    pub fn mixture(&self, tranche: &TrancheSpec) -> Result<Option<SystemicMixture>, CliError> {
        let horizon = tranche.horizon;
        let alpha = tranche.attachment;
        let mix = match &self.correlation {
            None => return Ok(None),
            Some(CorrelationConfig::States { states, .. }) => {
                let pools = states
                    .iter()
                    .map(|s| Ok((s.label.clone(), s.prob, s.pool.build(horizon)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                SystemicMixture::from_pools(pools, horizon, alpha)
            }
            Some(CorrelationConfig::GaussianCopula {
                rho, resolution, ..
            }) => {
                let grid = gaussian_copula_grid(*resolution, *rho)
                    .map_err(|e| config_err(format!("correlation: {e}")))?;
                copula_mixture(&self.pool()?, horizon, alpha, &grid)
            }
        };
        mix.map(Some)
            .map_err(|e| config_err(format!("correlation: {e}")))
    }
}

impl PoolConfig {
    pub fn build(&self, horizon: f64) -> Result<PoolSpec, CliError> {
        let wrap = |e: cdo_ld_core::Error| config_err(format!("pool: {e}"));
        match self {
            Self::Explicit { names } => {
                let mut laws = Vec::new();
                for n in names {
                    let law = n.law.build(horizon)?;
                    laws.extend(std::iter::repeat(law).take(n.count));
                }
                PoolSpec::new(laws).map_err(wrap)
            }
            Self::MertonGamma {
                theta,
                barrier,
                sigma_scale,
                sigma_shape,
                n,
                ..
            } => {
                let spec = GammaVolSpec::new(*sigma_scale, *sigma_shape).map_err(wrap)?;
                build_gamma_merton_pool(&spec, *theta, *barrier, *n).map_err(wrap)
            }
            Self::TwoType { n, a, b } => {
                PoolSpec::two_type(*n, a.build(horizon)?, b.build(horizon)?).map_err(wrap)
            }
        }
    }

    /// Same family at another pool size, when the family has a size parameter.
    pub fn resized(&self, n: usize) -> Option<PoolConfig> {
        match self {
            Self::Explicit { .. } => None,
            Self::MertonGamma { .. } => {
                let mut c = self.clone();
                if let Self::MertonGamma { n: size, .. } = &mut c {
                    *size = n;
                }
                Some(c)
            }
            Self::TwoType { a, b, .. } => Some(Self::TwoType {
                n,
                a: a.clone(),
                b: b.clone(),
            }),
        }
    }

    pub fn limiting(&self, horizon: f64) -> Result<Option<LossProbMeasure>, CliError> {
        match self {
            Self::MertonGamma {
                theta,
                barrier,
                sigma_scale,
                sigma_shape,
                n_quad,
                ..
            } => {
                let spec = GammaVolSpec::new(*sigma_scale, *sigma_shape)?;
                Ok(Some(limiting_measure(&spec, *theta, *barrier, horizon, *n_quad)?))
            }
            _ => Ok(None),
        }
    }
}

impl NameLaw {
    pub fn build(&self, horizon: f64) -> Result<DefaultDistribution, CliError> {
        let wrap = |e: cdo_ld_core::Error| config_err(format!("pool name: {e}"));
        match self {
            Self::Uniform { p } => DefaultDistribution::uniform_before(*p, horizon).map_err(wrap),
            Self::Tabulated { points, tail_mass } => TabulatedCdf::new(points, *tail_mass)
                .map(DefaultDistribution::Tabulated)
                .map_err(wrap),
            Self::Discrete { atoms, tail_mass } => DiscreteLaw::new(atoms, *tail_mass)
                .map(DefaultDistribution::Discrete)
                .map_err(wrap),
            Self::Merton {
                theta,
                barrier,
                sigma,
            } => MertonParams::new(*theta, *barrier, *sigma)
                .map(DefaultDistribution::Merton)
                .map_err(wrap),
        }
    }
}
