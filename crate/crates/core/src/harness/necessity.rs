//! Canned experiments showing what goes wrong without the gate: greedy
//! lock-in, constant-rate unpriced overrides and a fixed-temperature host.
//! DE runs on the same instance for contrast.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{tail_slope, Moments};
use super::{run_one, AgentSpec, EnvSpec, ExperimentSpec};
use crate::agents::EpsilonSchedule;
use crate::delight::DelightConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityConfig {
    /// Two-arm instance for the slope demos.
    pub means: Vec<f64>,
    pub horizon: u64,
    pub seeds: u64,
    pub base_seed: u64,
    pub constant_epsilon: f64,
    pub warm_temperature: f64,
    /// Instance for the greedy lock-in demo.
    pub lock_in_means: Vec<f64>,
    pub lock_in_horizon: u64,
    /// Seeds scanned for one where the first pull of the best arm fails.
    pub lock_in_scan: u64,
    pub delight: DelightConfig,
}

impl Default for NecessityConfig {
    fn default() -> Self {
        Self {
            means: vec![0.9, 0.1],
            horizon: 10_000,
            seeds: 20,
            base_seed: 0,
            constant_epsilon: 0.2,
            warm_temperature: 0.5,
            lock_in_means: vec![0.9, 0.6],
            lock_in_horizon: 10_000,
            lock_in_scan: 200,
            delight: DelightConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeDemo {
    pub name: String,
    pub agent: String,
    /// Rounds at the end of the run over which the slope is fitted.
    pub window: u64,
    /// Least-squares slope of mean cumulative regret per round.
    pub tail_slope: f64,
    /// Analytic per-round regret floor, when there is one.
    pub floor: Option<f64>,
    /// `tail_slope >= floor / 2` for the baselines, `< 1e-3` for DE.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockInDemo {
    /// First scanned seed where greedy's first pull of arm 0 fails.
    pub seed: Option<u64>,
    /// Greedy pulls of the best arm on that seed, whole run.
    pub best_arm_pulls: u64,
    /// Rounds greedy spent on the inferior arm.
    pub inferior_pulls: u64,
    pub greedy_regret: f64,
    /// DE on the same instance and seed.
    pub de_regret: f64,
    /// Best arm pulled exactly once: greedy never came back.
    pub locked_in: bool,
    /// Share of scanned seeds with a failed first pull that locked in.
    pub lock_in_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub slopes: Vec<SlopeDemo>,
    pub lock_in: LockInDemo,
    pub pass: bool,
}

/// DE's final-window slope must stay below this.
pub const DE_SLOPE_LIMIT: f64 = 1e-3;

fn mean_trace(spec: &ExperimentSpec, agent: &AgentSpec) -> Result<Vec<f64>> {
    let traces: Vec<Vec<f64>> = (0..spec.seeds)
        .into_par_iter()
        .map(|s| run_one(spec, agent, s).map(|t| t.cumulative_regret))
        .collect::<Result<_>>()?;
    let n = spec.horizon as usize;
    Ok((0..n)
        .map(|i| traces.iter().map(|t| t[i]).collect::<Moments>().mean)
        .collect())
}

pub fn necessity_demos(cfg: &NecessityConfig) -> Result<NecessityReport> {
    let spec = ExperimentSpec {
        name: "necessity".into(),
        env: EnvSpec::BernoulliFixed {
            means: cfg.means.clone(),
        },
        horizon: cfg.horizon,
        seeds: cfg.seeds,
        base_seed: cfg.base_seed,
        condition: 0,
        cold_start: false,
    };
    spec.validate()?;
    let k = cfg.means.len() as f64;
    let best = cfg.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_gap = cfg
        .means
        .iter()
        .map(|m| best - m)
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mean_gap = cfg.means.iter().map(|m| best - m).sum::<f64>() / k;
    let half = cfg.horizon / 2;
    let quarter = cfg.horizon / 4;

    let mut slopes = Vec::new();
    let eps = AgentSpec::EpsGreedy(EpsilonSchedule::Constant {
        epsilon: cfg.constant_epsilon,
    });
    // A uniform override costs the average gap.
    let eps_floor = cfg.constant_epsilon * mean_gap;
    let slope = tail_slope(&mean_trace(&spec, &eps)?, half as usize);
    slopes.push(SlopeDemo {
        name: "constant_epsilon".into(),
        agent: eps.label(),
        window: half,
        tail_slope: slope,
        floor: Some(eps_floor),
        pass: slope >= 0.5 * eps_floor,
    });

    let warm = AgentSpec::WarmHost {
        temperature: cfg.warm_temperature,
    };
    let warm_floor = min_gap * (-1.0 / cfg.warm_temperature).exp() / k;
    let slope = tail_slope(&mean_trace(&spec, &warm)?, quarter as usize);
    slopes.push(SlopeDemo {
        name: "warm_host".into(),
        agent: warm.label(),
        window: quarter,
        tail_slope: slope,
        floor: Some(warm_floor),
        pass: slope >= 0.5 * warm_floor,
    });

    let de = AgentSpec::Delight(cfg.delight);
    let slope = tail_slope(&mean_trace(&spec, &de)?, quarter as usize);
    slopes.push(SlopeDemo {
        name: "delight".into(),
        agent: de.label(),
        window: quarter,
        tail_slope: slope,
        floor: None,
        pass: slope < DE_SLOPE_LIMIT,
    });

    let lock_in = lock_in_demo(cfg)?;
    let pass = slopes.iter().all(|s| s.pass) && lock_in.locked_in;
    Ok(NecessityReport {
        slopes,
        lock_in,
        pass,
    })
}

fn lock_in_demo(cfg: &NecessityConfig) -> Result<LockInDemo> {
    let spec = ExperimentSpec {
        name: "lock_in".into(),
        env: EnvSpec::BernoulliFixed {
            means: cfg.lock_in_means.clone(),
        },
        horizon: cfg.lock_in_horizon,
        seeds: cfg.lock_in_scan,
        base_seed: cfg.base_seed,
        condition: 0,
        cold_start: false,
    };
    spec.validate()?;
    let best = crate::delight::argmax(&cfg.lock_in_means);
    let mut failed = 0u64;
    let mut locked = 0u64;
    let mut chosen = None;
    for seed in 0..cfg.lock_in_scan {
        let mut first_reward = None;
        let mut best_pulls = 0u64;
        let trace = super::run_one_observed(&spec, &AgentSpec::Greedy, seed, |view| {
            if view.selection.action == best {
                best_pulls += 1;
                first_reward.get_or_insert(view.reward);
            }
        })?;
        if first_reward != Some(0.0) {
            continue;
        }
        failed += 1;
        if best_pulls == 1 {
            locked += 1;
            chosen.get_or_insert((seed, trace.final_regret()));
        }
    }
    let (seed, greedy_regret) = match chosen {
        Some((s, r)) => (Some(s), r),
        None => (None, 0.0),
    };
    let de_regret = match seed {
        Some(s) => run_one(&spec, &AgentSpec::Delight(cfg.delight), s)?.final_regret(),
        None => 0.0,
    };
    Ok(LockInDemo {
        seed,
        best_arm_pulls: u64::from(seed.is_some()),
        inferior_pulls: if seed.is_some() {
            cfg.lock_in_horizon - 1
        } else {
            0
        },
        greedy_regret,
        de_regret,
        locked_in: seed.is_some(),
        lock_in_rate: if failed == 0 {
            0.0
        } else {
            locked as f64 / failed as f64
        },
    })
}
