//! TOML experiment configuration. Every key is optional; missing keys take
//! the defaults below.
//!
//! ```toml
//! base_seed = 0
//!
//! [bandit]
//! arms = [10, 100, 1000]
//! horizon = 1000
//! seeds = 100
//! agents = ["de", "ts", "eps_greedy"]
//! half_life = 100.0
//! gate_price = 0.1
//! surprisal_cap = 10.0
//!
//! [deepsea]
//! sizes = [10]
//! seeds = 30
//! temperature = 0.01
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgentSpec, EnvSpec, SweepSpec};
use crate::agents::EpsilonSchedule;
use crate::delight::{DelightConfig, HostMode};
use crate::error::{Error, Result};
use crate::reservoir::TailPrior;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub base_seed: u64,
    pub bandit: BanditSection,
    pub linear: LinearSection,
    pub deepsea: DeepSeaSection,
    pub reservoir: ReservoirSection,
    pub tune: TuneSection,
}

/// Hyperparameters shared by DE and annealed ε-greedy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyper {
    pub half_life: f64,
    pub gate_price: f64,
    pub surprisal_cap: f64,
    /// Boltzmann host temperature; absent means a greedy host.
    pub temperature: Option<f64>,
    /// Constant ε for ε-greedy; absent means annealed with `half_life`.
    pub epsilon: Option<f64>,
}

impl Default for Hyper {
    fn default() -> Self {
        let d = DelightConfig::default();
        Self {
            half_life: d.half_life,
            gate_price: d.gate_price,
            surprisal_cap: d.surprisal_cap,
            temperature: None,
            epsilon: None,
        }
    }
}

impl Hyper {
    pub fn delight(&self) -> DelightConfig {
        DelightConfig {
            gate_price: self.gate_price,
            surprisal_cap: self.surprisal_cap,
            half_life: self.half_life,
            host: match self.temperature {
                Some(temperature) => HostMode::Boltzmann { temperature },
                None => HostMode::Greedy,
            },
        }
    }

    pub fn schedule(&self) -> EpsilonSchedule {
        match self.epsilon {
            Some(epsilon) => EpsilonSchedule::Constant { epsilon },
            None => EpsilonSchedule::Annealed {
                half_life: self.half_life,
            },
        }
    }

    /// Builds the agent called `name`.
    pub fn agent(&self, name: &str) -> Result<AgentSpec> {
        Ok(match name {
            "de" => AgentSpec::Delight(self.delight()),
            "ts" => AgentSpec::Thompson,
            "eps_greedy" => AgentSpec::EpsGreedy(self.schedule()),
            "ucb" => AgentSpec::Ucb,
            "greedy" => AgentSpec::Greedy,
            "warm_host" => AgentSpec::WarmHost {
                temperature: self
                    .temperature
                    .ok_or_else(|| Error::Config("warm_host needs a temperature".into()))?,
            },
            "psrl" => AgentSpec::Psrl,
            other => return Err(Error::Config(format!("unknown agent {other:?}"))),
        })
    }

    pub fn agents(&self, names: &[String]) -> Result<Vec<AgentSpec>> {
        names.iter().map(|n| self.agent(n)).collect()
    }
}

fn bandit_agents() -> Vec<String> {
    ["de", "ts", "eps_greedy"].map(String::from).to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BanditSection {
    pub arms: Vec<usize>,
    pub horizon: u64,
    pub seeds: u64,
    pub agents: Vec<String>,
    pub cold_start: bool,
    #[serde(flatten)]
    pub hyper: Hyper,
}

impl Default for BanditSection {
    fn default() -> Self {
        Self {
            arms: vec![10, 100, 1000],
            horizon: 1000,
            seeds: 100,
            agents: bandit_agents(),
            cold_start: false,
            hyper: Hyper::default(),
        }
    }
}

impl BanditSection {
    pub fn sweep(&self, name: &str, base_seed: u64) -> Result<SweepSpec> {
        Ok(SweepSpec {
            name: name.into(),
            conditions: self
                .arms
                .iter()
                .map(|&arms| EnvSpec::Bernoulli { arms })
                .collect(),
            agents: self.hyper.agents(&self.agents)?,
            horizon: self.horizon,
            seeds: self.seeds,
            base_seed,
            cold_start: self.cold_start,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSection {
    pub arms: Vec<usize>,
    pub dims: Vec<usize>,
    pub noises: Vec<f64>,
    pub horizon: u64,
    pub seeds: u64,
    pub agents: Vec<String>,
    #[serde(flatten)]
    pub hyper: Hyper,
}

impl Default for LinearSection {
    fn default() -> Self {
        Self {
            arms: vec![100],
            dims: vec![30],
            noises: vec![1.0],
            horizon: 1000,
            seeds: 100,
            agents: bandit_agents(),
            hyper: Hyper::default(),
        }
    }
}

impl LinearSection {
    /// Full grid over arms × dims × noises.
    pub fn sweep(&self, name: &str, base_seed: u64) -> Result<SweepSpec> {
        let mut conditions = Vec::new();
        for &arms in &self.arms {
            for &dim in &self.dims {
                for &noise in &self.noises {
                    conditions.push(EnvSpec::Linear { arms, dim, noise });
                }
            }
        }
        Ok(SweepSpec {
            name: name.into(),
            conditions,
            agents: self.hyper.agents(&self.agents)?,
            horizon: self.horizon,
            seeds: self.seeds,
            base_seed,
            cold_start: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeepSeaSection {
    pub sizes: Vec<usize>,
    /// Dirichlet pseudo-count per successor state; absent means `1/S`.
    pub concentration: Option<f64>,
    /// Episodes.
    pub horizon: u64,
    pub seeds: u64,
    pub agents: Vec<String>,
    #[serde(flatten)]
    pub hyper: Hyper,
}

impl Default for DeepSeaSection {
    fn default() -> Self {
        Self {
            sizes: vec![10],
            concentration: None,
            horizon: 1000,
            seeds: 30,
            agents: ["de", "psrl", "eps_greedy"].map(String::from).to_vec(),
            hyper: Hyper {
                temperature: Some(0.01),
                ..Hyper::default()
            },
        }
    }
}

impl DeepSeaSection {
    pub fn sweep(&self, name: &str, base_seed: u64) -> Result<SweepSpec> {
        Ok(SweepSpec {
            name: name.into(),
            conditions: self
                .sizes
                .iter()
                .map(|&size| EnvSpec::DeepSea {
                    size,
                    concentration: self.concentration,
                })
                .collect(),
            agents: self.hyper.agents(&self.agents)?,
            horizon: self.horizon,
            seeds: self.seeds,
            base_seed,
            cold_start: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirSection {
    pub prior: TailPrior,
    pub horizons: Vec<u64>,
    pub seeds: u64,
    pub override_rate: Option<f64>,
    pub surprisal_cap: f64,
}

impl Default for ReservoirSection {
    fn default() -> Self {
        Self {
            prior: TailPrior::Uniform,
            horizons: vec![1_000, 10_000, 100_000, 1_000_000],
            seeds: 200,
            override_rate: None,
            surprisal_cap: DelightConfig::default().surprisal_cap,
        }
    }
}

/// Hyperparameter sensitivity: DE over `half_lives` at the base gate price
/// and over `gate_prices` at the base half-life, with the baselines alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    /// `bernoulli` or `linear`; the linear case takes dim and noise from the
    /// first entries of `[linear]`.
    pub family: String,
    pub arms: usize,
    pub horizon: u64,
    pub seeds: u64,
    pub half_lives: Vec<f64>,
    pub gate_prices: Vec<f64>,
    pub baselines: Vec<String>,
    #[serde(flatten)]
    pub hyper: Hyper,
}

impl Default for TuneSection {
    fn default() -> Self {
        Self {
            family: "bernoulli".into(),
            arms: 100,
            horizon: 1000,
            seeds: 100,
            half_lives: vec![10.0, 100.0, 1_000.0, 10_000.0],
            gate_prices: vec![0.001, 0.01, 0.1, 1.0],
            baselines: vec!["ts".into()],
            hyper: Hyper::default(),
        }
    }
}

impl TuneSection {
    pub fn sweep(&self, name: &str, base_seed: u64, linear: &LinearSection) -> Result<SweepSpec> {
        let env = match self.family.as_str() {
            "bernoulli" => EnvSpec::Bernoulli { arms: self.arms },
            "linear" => EnvSpec::Linear {
                arms: self.arms,
                dim: *linear
                    .dims
                    .first()
                    .ok_or_else(|| Error::Config("linear.dims is empty".into()))?,
                noise: *linear
                    .noises
                    .first()
                    .ok_or_else(|| Error::Config("linear.noises is empty".into()))?,
            },
            other => {
                return Err(Error::Config(format!(
                    "tune.family must be bernoulli or linear, got {other:?}"
                )))
            }
        };
        let mut agents = Vec::new();
        let mut push = |a: AgentSpec| {
            if !agents.contains(&a) {
                agents.push(a);
            }
        };
        for &half_life in &self.half_lives {
            push(AgentSpec::Delight(
                Hyper {
                    half_life,
                    ..self.hyper
                }
                .delight(),
            ));
        }
        for &gate_price in &self.gate_prices {
            push(AgentSpec::Delight(
                Hyper {
                    gate_price,
                    ..self.hyper
                }
                .delight(),
            ));
        }
        for name in &self.baselines {
            push(self.hyper.agent(name)?);
        }
        Ok(SweepSpec {
            name: name.into(),
            conditions: vec![env],
            agents,
            horizon: self.horizon,
            seeds: self.seeds,
            base_seed,
            cold_start: false,
        })
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}
