//! Deterministic experiment runner: single runs, sweeps over conditions and
//! agents, aggregation, serialization, the necessity demos and the
//! property/oracle report.
//!
//! Every run draws from two streams keyed by `(base seed, name, condition,
//! seed index, role)`. The environment stream is keyed by the fixed name
//! `"env"` so all agents in a cell face the same instance and reward draws;
//! the agent stream is keyed by the agent label. Nothing depends on thread
//! count or scheduling order.

pub mod config;
pub mod necessity;
pub mod output;
pub mod stats;
pub mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, EpsilonSchedule, Policy, Selection};
use crate::delight::{DelightConfig, HostMode};
use crate::env::{BernoulliEnv, DeepSeaEnv, LinearEnv};
use crate::error::{Error, Result};
use crate::mdp::{deepsea_posterior, MdpPolicy};
use crate::rng::{Role, StreamKey};
use stats::Moments;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "DELIGHT_THREADS";

/// Prior precision η of the linear agents.
pub const LINEAR_PRIOR_PRECISION: f64 = 1.0;
/// Floor on the noise variance the linear agents assume.
pub const LINEAR_NOISE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnvSpec {
    /// Means drawn iid uniform on `[0, 1]`.
    Bernoulli { arms: usize },
    /// Fixed means, identical for every seed.
    BernoulliFixed { means: Vec<f64> },
    /// Features `N(0, I/d)`, parameter `N(0, I)`, Gaussian noise `sigma`.
    Linear { arms: usize, dim: usize, noise: f64 },
    /// `concentration` is the per-successor Dirichlet pseudo-count of the
    /// transition prior; absent means `1/S`, one pseudo-count per row.
    DeepSea {
        size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        concentration: Option<f64>,
    },
}

impl EnvSpec {
    pub fn family(&self) -> &'static str {
        match self {
            EnvSpec::Bernoulli { .. } | EnvSpec::BernoulliFixed { .. } => "bernoulli",
            EnvSpec::Linear { .. } => "linear",
            EnvSpec::DeepSea { .. } => "deepsea",
        }
    }

    pub fn arms(&self) -> Option<usize> {
        match self {
            EnvSpec::Bernoulli { arms } | EnvSpec::Linear { arms, .. } => Some(*arms),
            EnvSpec::BernoulliFixed { means } => Some(means.len()),
            EnvSpec::DeepSea { .. } => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            EnvSpec::Linear { dim, .. } => Some(*dim),
            _ => None,
        }
    }

    pub fn noise(&self) -> Option<f64> {
        match self {
            EnvSpec::Linear { noise, .. } => Some(*noise),
            _ => None,
        }
    }

    pub fn depth(&self) -> Option<usize> {
        match self {
            EnvSpec::DeepSea { size, .. } => Some(*size),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            EnvSpec::Bernoulli { arms } if *arms == 0 => {
                bad("bernoulli needs at least one arm".into())
            }
            EnvSpec::BernoulliFixed { means }
                if means.is_empty() || means.iter().any(|m| !(0.0..=1.0).contains(m)) =>
            {
                bad(format!(
                    "fixed means must be non-empty and in [0, 1]: {means:?}"
                ))
            }
            EnvSpec::Linear { arms, dim, noise } if *arms == 0 || *dim == 0 || !(*noise >= 0.0) => {
                bad(format!(
                    "linear needs arms, dim >= 1 and noise >= 0 (got {arms}, {dim}, {noise})"
                ))
            }
            EnvSpec::DeepSea { size, .. } if *size == 0 => {
                bad("deepsea size must be at least 1".into())
            }
            EnvSpec::DeepSea {
                concentration: Some(c),
                ..
            } if !(*c > 0.0) => bad(format!("dirichlet concentration must be positive, got {c}")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentSpec {
    Delight(DelightConfig),
    Thompson,
    EpsGreedy(EpsilonSchedule),
    Ucb,
    Greedy,
    WarmHost {
        temperature: f64,
    },
    /// Posterior sampling on DeepSea.
    Psrl,
}

impl AgentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AgentSpec::Delight(_) => "de",
            AgentSpec::Thompson => "ts",
            AgentSpec::EpsGreedy(_) => "eps_greedy",
            AgentSpec::Ucb => "ucb",
            AgentSpec::Greedy => "greedy",
            AgentSpec::WarmHost { .. } => "warm_host",
            AgentSpec::Psrl => "psrl",
        }
    }

    /// Name plus hyperparameters; distinct configs get distinct labels.
    pub fn label(&self) -> String {
        match self {
            AgentSpec::Delight(c) => {
                let host = match c.host {
                    HostMode::Greedy => String::new(),
                    HostMode::Boltzmann { temperature } => format!(",tau={temperature}"),
                };
                format!(
                    "de[M={},lambda={},L={}{host}]",
                    c.half_life, c.gate_price, c.surprisal_cap
                )
            }
            AgentSpec::EpsGreedy(EpsilonSchedule::Annealed { half_life }) => {
                format!("eps_greedy[M={half_life}]")
            }
            AgentSpec::EpsGreedy(EpsilonSchedule::Constant { epsilon }) => {
                format!("eps_greedy[eps={epsilon}]")
            }
            AgentSpec::WarmHost { temperature } => format!("warm_host[tau={temperature}]"),
            other => other.name().to_string(),
        }
    }

    pub fn half_life(&self) -> Option<f64> {
        match self {
            AgentSpec::Delight(c) => Some(c.half_life),
            AgentSpec::EpsGreedy(EpsilonSchedule::Annealed { half_life }) => Some(*half_life),
            _ => None,
        }
    }

    pub fn gate_price(&self) -> Option<f64> {
        match self {
            AgentSpec::Delight(c) => Some(c.gate_price),
            _ => None,
        }
    }

    pub fn surprisal_cap(&self) -> Option<f64> {
        match self {
            AgentSpec::Delight(c) => Some(c.surprisal_cap),
            _ => None,
        }
    }

    fn bandit_policy(&self) -> Result<Policy> {
        Ok(match *self {
            AgentSpec::Delight(c) => Policy::Delight(c),
            AgentSpec::Thompson => Policy::Thompson,
            AgentSpec::EpsGreedy(s) => Policy::EpsGreedy(s),
            AgentSpec::Ucb => Policy::Ucb,
            AgentSpec::Greedy => Policy::Host(HostMode::Greedy),
            AgentSpec::WarmHost { temperature } => {
                Policy::Host(HostMode::Boltzmann { temperature })
            }
            AgentSpec::Psrl => return Err(Error::Config("psrl only runs on deepsea".into())),
        })
    }

    fn mdp_policy(&self) -> Result<MdpPolicy> {
        match *self {
            AgentSpec::Delight(c) => {
                c.validate()?;
                Ok(MdpPolicy::Delight(c))
            }
            AgentSpec::Psrl | AgentSpec::Thompson => Ok(MdpPolicy::Psrl),
            AgentSpec::EpsGreedy(s) => Ok(MdpPolicy::EpsGreedy(s)),
            other => Err(Error::Config(format!(
                "{} does not run on deepsea",
                other.name()
            ))),
        }
    }
}

/// One (environment, agent) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub env: EnvSpec,
    /// Rounds (bandits) or episodes (DeepSea).
    pub horizon: u64,
    pub seeds: u64,
    pub base_seed: u64,
    /// Index of this condition inside its sweep; part of the stream key.
    pub condition: u64,
    /// Pull every arm once first (bandits only).
    pub cold_start: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::Config("seed count must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        self.env.validate()
    }

    fn stream(&self, agent: &str, seed_index: u64, role: Role) -> crate::rng::StreamRng {
        StreamKey {
            base_seed: self.base_seed,
            agent,
            condition: self.condition,
            seed_index,
            role,
        }
        .rng()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run_id: String,
    pub agent: String,
    pub label: String,
    pub env_family: String,
    pub condition: u64,
    pub arms: Option<usize>,
    pub dim: Option<usize>,
    pub noise: Option<f64>,
    pub depth: Option<usize>,
    pub half_life: Option<f64>,
    pub gate_price: Option<f64>,
    pub surprisal_cap: Option<f64>,
    pub seed: u64,
}

impl RunMeta {
    fn new(spec: &ExperimentSpec, agent: &AgentSpec, seed: u64) -> Self {
        let label = agent.label();
        Self {
            run_id: format!("{}/c{}/{}/s{}", spec.name, spec.condition, label, seed),
            agent: agent.name().to_string(),
            label,
            env_family: spec.env.family().to_string(),
            condition: spec.condition,
            arms: spec.env.arms(),
            dim: spec.env.dim(),
            noise: spec.env.noise(),
            depth: spec.env.depth(),
            half_life: agent.half_life(),
            gate_price: agent.gate_price(),
            surprisal_cap: agent.surprisal_cap(),
            seed,
        }
    }

    /// Run id without the seed suffix: identifies the summary row.
    pub fn cell_id(&self) -> &str {
        cell_id(&self.run_id)
    }
}

pub fn cell_id(run_id: &str) -> &str {
    run_id.rsplit_once("/s").map_or(run_id, |(cell, _)| cell)
}

/// Dense per-round record of one run. Entry `t` holds totals after `t + 1`
/// rounds (or episodes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub meta: RunMeta,
    pub cumulative_regret: Vec<f64>,
    pub gated_overrides: Vec<u64>,
    pub fresh_arms: Vec<u64>,
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.cumulative_regret.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }

    pub fn is_monotone(&self) -> bool {
        self.cumulative_regret.first().is_none_or(|&r| r >= 0.0)
            && self.cumulative_regret.windows(2).all(|w| w[1] >= w[0])
    }

    /// Values at 1-based rounds `ts`.
    pub fn at_checkpoints(&self, ts: &[u64]) -> Vec<CheckpointRow> {
        ts.iter()
            .map(|&t| {
                let i = t as usize - 1;
                CheckpointRow {
                    t,
                    cumulative_regret: self.cumulative_regret[i],
                    gated_overrides: self.gated_overrides[i],
                    fresh_arms: self.fresh_arms[i],
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    pub t: u64,
    pub cumulative_regret: f64,
    pub gated_overrides: u64,
    pub fresh_arms: u64,
}

/// Roughly ten log-spaced rounds per decade in `1..=horizon`, always ending
/// with `horizon`.
pub fn checkpoints(horizon: u64) -> Vec<u64> {
    let mut ts = Vec::new();
    if horizon == 0 {
        return ts;
    }
    let mut i = 0;
    loop {
        let t = 10f64.powf(i as f64 / 10.0).round() as u64;
        if t >= horizon {
            break;
        }
        if ts.last() != Some(&t) {
            ts.push(t);
        }
        i += 1;
    }
    ts.push(horizon);
    ts
}

/// What an observer sees on each bandit round: the agent before it absorbs
/// the reward, its selection, and the reward drawn.
pub struct RoundView<'a> {
    pub t: u64,
    pub agent: &'a Agent,
    pub selection: &'a Selection,
    pub reward: f64,
    /// True arm means.
    pub means: &'a [f64],
}

/// Runs one seed; deterministic in `(spec, agent, seed)`.
pub fn run_one(spec: &ExperimentSpec, agent: &AgentSpec, seed: u64) -> Result<RegretTrace> {
    run_one_observed(spec, agent, seed, |_| {})
}

/// [`run_one`] with a per-round observer (bandit environments only; DeepSea
/// runs never call it).
pub fn run_one_observed<F: FnMut(&RoundView)>(
    spec: &ExperimentSpec,
    agent: &AgentSpec,
    seed: u64,
    observe: F,
) -> Result<RegretTrace> {
    spec.validate()?;
    let meta = RunMeta::new(spec, agent, seed);
    let mut env_rng = spec.stream("env", seed, Role::Env);
    let mut agent_rng = spec.stream(&meta.label, seed, Role::Agent);
    match &spec.env {
        EnvSpec::Bernoulli { arms } => {
            let env = BernoulliEnv::sample(*arms, &mut env_rng)?;
            let learner = Agent::bernoulli(agent.bandit_policy()?, *arms)?;
            bandit_loop(
                spec,
                meta,
                learner,
                env.means().to_vec(),
                |a, rng| env.step(a, rng),
                env_rng,
                agent_rng,
                observe,
            )
        }
        EnvSpec::BernoulliFixed { means } => {
            let env = BernoulliEnv::from_means(means.clone())?;
            let learner = Agent::bernoulli(agent.bandit_policy()?, means.len())?;
            bandit_loop(
                spec,
                meta,
                learner,
                env.means().to_vec(),
                |a, rng| env.step(a, rng),
                env_rng,
                agent_rng,
                observe,
            )
        }
        EnvSpec::Linear { arms, dim, noise } => {
            let env = LinearEnv::sample(*arms, *dim, *noise, &mut env_rng)?;
            let learner = Agent::linear(
                agent.bandit_policy()?,
                env.features().to_vec(),
                *dim,
                LINEAR_PRIOR_PRECISION,
                (noise * noise).max(LINEAR_NOISE_FLOOR),
            )?;
            bandit_loop(
                spec,
                meta,
                learner,
                env.arm_means().to_vec(),
                |a, rng| env.step(a, rng),
                env_rng,
                agent_rng,
                observe,
            )
        }
        EnvSpec::DeepSea {
            size,
            concentration,
        } => {
            let env = DeepSeaEnv::sample(*size, &mut env_rng)?;
            let policy = agent.mdp_policy()?;
            let c0 = concentration.unwrap_or(1.0 / env.num_states() as f64);
            let mut posterior = deepsea_posterior(&env, c0)?;
            let optimal = env.optimal_return();
            let mut visited = vec![false; env.num_states() * DeepSeaEnv::NUM_ACTIONS];
            let n = spec.horizon as usize;
            let mut trace = empty_trace(meta, n);
            let (mut regret, mut gated, mut fresh) = (0.0, 0u64, 0u64);
            for episode in 0..spec.horizon {
                let traj = policy.run_episode(&mut posterior, &env, episode, &mut agent_rng)?;
                regret += (optimal - traj.total_return()).max(0.0);
                gated += traj.gated_overrides();
                for step in &traj.steps {
                    let key = env.state_index(step.state) * DeepSeaEnv::NUM_ACTIONS + step.action;
                    if !visited[key] {
                        visited[key] = true;
                        fresh += 1;
                    }
                }
                trace.cumulative_regret.push(regret);
                trace.gated_overrides.push(gated);
                trace.fresh_arms.push(fresh);
            }
            Ok(trace)
        }
    }
}

fn empty_trace(meta: RunMeta, n: usize) -> RegretTrace {
    RegretTrace {
        meta,
        cumulative_regret: Vec::with_capacity(n),
        gated_overrides: Vec::with_capacity(n),
        fresh_arms: Vec::with_capacity(n),
    }
}

#[allow(clippy::too_many_arguments)]
fn bandit_loop<S, F>(
    spec: &ExperimentSpec,
    meta: RunMeta,
    learner: Agent,
    means: Vec<f64>,
    step: S,
    mut env_rng: crate::rng::StreamRng,
    mut agent_rng: crate::rng::StreamRng,
    mut observe: F,
) -> Result<RegretTrace>
where
    S: Fn(usize, &mut crate::rng::StreamRng) -> Result<(f64, f64)>,
    F: FnMut(&RoundView),
{
    let mut learner = learner.with_cold_start(spec.cold_start);
    let mut trace = empty_trace(meta, spec.horizon as usize);
    let mut regret = 0.0;
    for t in 0..spec.horizon {
        let selection = learner.select(&mut agent_rng);
        let (reward, r) = step(selection.action, &mut env_rng)?;
        observe(&RoundView {
            t,
            agent: &learner,
            selection: &selection,
            reward,
            means: &means,
        });
        learner.update(selection.action, reward)?;
        regret += r.max(0.0);
        trace.cumulative_regret.push(regret);
        trace
            .gated_overrides
            .push(learner.counters().gated_overrides);
        trace
            .fresh_arms
            .push(learner.counters().fresh_arm_selections);
    }
    Ok(trace)
}

/// Conditions × agents × seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub conditions: Vec<EnvSpec>,
    pub agents: Vec<AgentSpec>,
    pub horizon: u64,
    pub seeds: u64,
    pub base_seed: u64,
    pub cold_start: bool,
}

impl SweepSpec {
    pub fn experiment(&self, condition: usize) -> ExperimentSpec {
        ExperimentSpec {
            name: self.name.clone(),
            env: self.conditions[condition].clone(),
            horizon: self.horizon,
            seeds: self.seeds,
            base_seed: self.base_seed,
            condition: condition as u64,
            cold_start: self.cold_start,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() || self.agents.is_empty() {
            return Err(Error::Config(
                "sweep needs at least one condition and one agent".into(),
            ));
        }
        let mut labels: Vec<String> = self.agents.iter().map(AgentSpec::label).collect();
        labels.sort();
        labels.dedup();
        if labels.len() != self.agents.len() {
            return Err(Error::Config(
                "duplicate agent configurations in sweep".into(),
            ));
        }
        for c in 0..self.conditions.len() {
            self.experiment(c).validate()?;
        }
        Ok(())
    }
}

/// Checkpointed values of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub meta: RunMeta,
    pub rows: Vec<CheckpointRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell_id: String,
    pub condition: u64,
    pub agent: String,
    pub label: String,
    pub env_family: String,
    pub arms: Option<usize>,
    pub dim: Option<usize>,
    pub noise: Option<f64>,
    pub depth: Option<usize>,
    pub half_life: Option<f64>,
    pub gate_price: Option<f64>,
    pub surprisal_cap: Option<f64>,
    pub seeds: u64,
    /// Mean cumulative regret at each checkpoint.
    pub mean_regret: Vec<f64>,
    /// Sample standard deviation over `√seeds` at each checkpoint.
    pub std_error: Vec<f64>,
    pub final_mean: f64,
    pub final_std_error: f64,
    pub mean_gated_overrides: f64,
    pub mean_fresh_arms: f64,
    /// Set when only one seed ran and the standard errors are reported as 0.
    pub single_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub name: String,
    pub horizon: u64,
    pub base_seed: u64,
    pub checkpoints: Vec<u64>,
    pub rows: Vec<SummaryRow>,
}

impl SweepSummary {
    pub fn row(&self, condition: u64, agent: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.condition == condition && r.agent == agent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub summary: SweepSummary,
    pub runs: Vec<RunRecord>,
}

/// Runs every (condition, agent, seed) cell on the current rayon pool and
/// aggregates. Results do not depend on the pool size.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let ts = checkpoints(spec.horizon);
    let cells: Vec<(usize, usize, u64)> = (0..spec.conditions.len())
        .flat_map(|c| {
            (0..spec.agents.len()).flat_map(move |a| (0..spec.seeds).map(move |s| (c, a, s)))
        })
        .collect();
    let experiments: Vec<ExperimentSpec> = (0..spec.conditions.len())
        .map(|c| spec.experiment(c))
        .collect();
    let runs: Vec<RunRecord> = cells
        .par_iter()
        .map(|&(c, a, s)| {
            let trace = run_one(&experiments[c], &spec.agents[a], s)?;
            Ok(RunRecord {
                rows: trace.at_checkpoints(&ts),
                meta: trace.meta,
            })
        })
        .collect::<Result<_>>()?;
    let per_cell = spec.seeds as usize;
    let rows = runs
        .chunks(per_cell)
        .map(|chunk| summarize(chunk, ts.len()))
        .collect();
    Ok(SweepResult {
        summary: SweepSummary {
            name: spec.name.clone(),
            horizon: spec.horizon,
            base_seed: spec.base_seed,
            checkpoints: ts,
            rows,
        },
        runs,
    })
}

/// Aggregates the runs of one cell.
pub fn summarize(runs: &[RunRecord], n_checkpoints: usize) -> SummaryRow {
    let mut regret = vec![Moments::default(); n_checkpoints];
    let mut gated = Moments::default();
    let mut fresh = Moments::default();
    for run in runs {
        for (m, row) in regret.iter_mut().zip(&run.rows) {
            m.push(row.cumulative_regret);
        }
        if let Some(last) = run.rows.last() {
            gated.push(last.gated_overrides as f64);
            fresh.push(last.fresh_arms as f64);
        }
    }
    let meta = &runs[0].meta;
    if runs.len() == 1 {
        log::warn!(
            "{}: single seed, standard errors reported as 0",
            meta.cell_id()
        );
    }
    let mean_regret: Vec<f64> = regret.iter().map(|m| m.mean).collect();
    let std_error: Vec<f64> = regret.iter().map(Moments::std_error).collect();
    SummaryRow {
        cell_id: meta.cell_id().to_string(),
        condition: meta.condition,
        agent: meta.agent.clone(),
        label: meta.label.clone(),
        env_family: meta.env_family.clone(),
        arms: meta.arms,
        dim: meta.dim,
        noise: meta.noise,
        depth: meta.depth,
        half_life: meta.half_life,
        gate_price: meta.gate_price,
        surprisal_cap: meta.surprisal_cap,
        seeds: runs.len() as u64,
        final_mean: mean_regret.last().copied().unwrap_or(0.0),
        final_std_error: std_error.last().copied().unwrap_or(0.0),
        mean_regret,
        std_error,
        mean_gated_overrides: gated.mean,
        mean_fresh_arms: fresh.mean,
        single_seed: runs.len() == 1,
    }
}

/// Worker count: the flag if given, else [`THREADS_ENV`], else all cores.
pub fn thread_count(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(Error::Config("--threads must be at least 1".into()))
        } else {
            Ok(n)
        };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}
