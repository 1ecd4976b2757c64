//! Finite-horizon planning and the episodic agents: delight-gated exploration
//! over a frozen posterior-mean plan, PSRL, and ε-greedy on planned values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::EpsilonSchedule;
use crate::delight::{act, argmax, epsilon_schedule, Branch, DelightConfig, GateDecision};
use crate::env::{DeepSeaEnv, DeepSeaState};
use crate::error::{Error, Result};
use crate::posterior::TabularModelPosterior;

/// Explicit finite-horizon MDP used for planning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningModel {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    /// `S × A × S`, row-major.
    transitions: Vec<f64>,
    /// `S × A`.
    rewards: Vec<f64>,
}

impl PlanningModel {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
    ) -> Result<Self> {
        if transitions.len() != num_states * num_actions * num_states {
            return Err(Error::DimensionMismatch {
                expected: num_states * num_actions * num_states,
                got: transitions.len(),
            });
        }
        if rewards.len() != num_states * num_actions {
            return Err(Error::DimensionMismatch {
                expected: num_states * num_actions,
                got: rewards.len(),
            });
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config("planning rewards must be finite".into()));
        }
        for row in transitions.chunks(num_states.max(1)) {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(
                    "transition rows must be probability vectors".into(),
                ));
            }
        }
        Ok(Self::from_parts(
            num_states,
            num_actions,
            horizon,
            transitions,
            rewards,
        ))
    }

    pub(crate) fn from_parts(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
    ) -> Self {
        Self {
            num_states,
            num_actions,
            horizon,
            transitions,
            rewards,
        }
    }

    /// The true model of a DeepSea instance. Moves out of the last row go to
    /// state 0; the planner never looks past the horizon.
    pub fn deepsea(env: &DeepSeaEnv) -> Self {
        let n = env.size();
        let s_n = env.num_states();
        let mut transitions = vec![0.0; s_n * 2 * s_n];
        let mut rewards = vec![0.0; s_n * 2];
        for row in 0..n {
            for col in 0..=row {
                let state = DeepSeaState { row, col };
                let s = env.state_index(state);
                for a in 0..2 {
                    let (next, r) = env.step(state, a).expect("valid DeepSea cell");
                    rewards[s * 2 + a] = r;
                    let target = if env.is_terminal(next) {
                        0
                    } else {
                        env.state_index(next)
                    };
                    transitions[(s * 2 + a) * s_n + target] = 1.0;
                }
            }
            // Unreachable cells (col > row) self-loop with zero reward.
            for col in row + 1..n {
                let s = env.state_index(DeepSeaState { row, col });
                for a in 0..2 {
                    transitions[(s * 2 + a) * s_n + s] = 1.0;
                }
            }
        }
        Self::from_parts(s_n, 2, n, transitions, rewards)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.num_actions + a) * self.num_states;
        &self.transitions[start..start + self.num_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.num_actions + a]
    }
}

/// Nonstationary action values `Q_h(s, a)` for `h < horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFunction {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl QFunction {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.row(h, s)[a]
    }

    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let start = (h * self.num_states + s) * self.num_actions;
        &self.values[start..start + self.num_actions]
    }

    /// `max_a Q_h(s, a)`.
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.row(h, s)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy_action(&self, h: usize, s: usize) -> usize {
        argmax(self.row(h, s))
    }
}

/// Backward induction `Q_h(s,a) = r(s,a) + E[V_{h+1}(s')]`, `V_H ≡ 0`.
///
/// `expect(s, a, next_values, next_sum)` returns the expected next-step value;
/// `next_sum` is `Σ_s V_{h+1}(s)`, which lets structured models skip the dense
/// row product.
pub fn backward_induction<R, E>(
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    reward: R,
    expect: E,
) -> QFunction
where
    R: Fn(usize, usize) -> f64,
    E: Fn(usize, usize, &[f64], f64) -> f64,
{
    let layer = num_states * num_actions;
    let mut values = vec![0.0; horizon * layer];
    let mut next = vec![0.0; num_states];
    for h in (0..horizon).rev() {
        let next_sum: f64 = next.iter().sum();
        let q_layer = &mut values[h * layer..(h + 1) * layer];
        for s in 0..num_states {
            for a in 0..num_actions {
                q_layer[s * num_actions + a] = reward(s, a) + expect(s, a, &next, next_sum);
            }
        }
        for (s, v) in next.iter_mut().enumerate() {
            *v = q_layer[s * num_actions..(s + 1) * num_actions]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }
    QFunction {
        horizon,
        num_states,
        num_actions,
        values,
    }
}

/// Exact finite-horizon planning on an explicit model.
pub fn plan(model: &PlanningModel) -> QFunction {
    backward_induction(
        model.num_states,
        model.num_actions,
        model.horizon,
        |s, a| model.reward(s, a),
        |s, a, next, _| {
            model
                .transition_row(s, a)
                .iter()
                .zip(next)
                .map(|(p, v)| p * v)
                .sum()
        },
    )
}

/// Plan frozen at the start of an episode, with its Boltzmann host.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenPlan {
    pub q: QFunction,
    pub config: DelightConfig,
}

impl FrozenPlan {
    pub fn host(&self, h: usize, s: usize) -> Vec<f64> {
        self.config.host.policy(self.q.row(h, s))
    }

    /// `V^plan(s) = Σ_b π^host(b|s) Q^plan(s, b)`.
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.host(h, s)
            .iter()
            .zip(self.q.row(h, s))
            .map(|(p, q)| p * q)
            .sum()
    }
}

/// One delight-gated decision at `(h, s)`: EI is the positive part of the
/// live posterior-mean value over the frozen host's value, surprisal is taken
/// under the frozen host.
pub fn de_mdp_decision(
    frozen: &FrozenPlan,
    q_post: &QFunction,
    h: usize,
    s: usize,
) -> GateDecision {
    let host = frozen.host(h, s);
    let v_plan: f64 = host
        .iter()
        .zip(frozen.q.row(h, s))
        .map(|(p, q)| p * q)
        .sum();
    let ei = q_post
        .row(h, s)
        .iter()
        .map(|q| (q - v_plan).max(0.0))
        .collect();
    GateDecision::evaluate(v_plan, ei, host, &frozen.config)
}

/// Samples one action of the delight-gated MDP agent.
pub fn de_mdp_select<R: Rng + ?Sized>(
    frozen: &FrozenPlan,
    q_post: &QFunction,
    h: usize,
    s: usize,
    epsilon: f64,
    rng: &mut R,
) -> (usize, Branch, GateDecision) {
    let decision = de_mdp_decision(frozen, q_post, h, s);
    let acted = act(&decision.host, &decision.override_dist, epsilon, rng);
    (acted.action, acted.branch, decision)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: DeepSeaState,
    pub action: usize,
    pub reward: f64,
    pub gated_override: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn total_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn actions(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn gated_overrides(&self) -> u64 {
        self.steps.iter().filter(|s| s.gated_override).count() as u64
    }
}

fn absorb(
    post: &mut TabularModelPosterior,
    env: &DeepSeaEnv,
    s: DeepSeaState,
    a: usize,
    next: DeepSeaState,
    r: f64,
) -> Result<()> {
    let si = env.state_index(s);
    post.observe_reward(si, a, r)?;
    if !env.is_terminal(next) {
        post.observe_transition(si, a, env.state_index(next))?;
    }
    Ok(())
}

fn check_posterior(post: &TabularModelPosterior, env: &DeepSeaEnv) -> Result<()> {
    if post.num_states() != env.num_states() || post.num_actions() != DeepSeaEnv::NUM_ACTIONS {
        return Err(Error::DimensionMismatch {
            expected: env.num_states(),
            got: post.num_states(),
        });
    }
    Ok(())
}

/// Fresh posterior for a DeepSea instance.
pub fn deepsea_posterior(env: &DeepSeaEnv, concentration: f64) -> Result<TabularModelPosterior> {
    TabularModelPosterior::new(
        env.num_states(),
        DeepSeaEnv::NUM_ACTIONS,
        concentration,
        env.reward_range(),
    )
}

/// One episode of delight-gated exploration.
///
/// The plan and host are frozen from the posterior mean at the start; the
/// posterior is updated after every transition and `Q^post` is replanned
/// before every decision.
pub fn de_mdp_episode<R: Rng + ?Sized>(
    posterior: &mut TabularModelPosterior,
    env: &DeepSeaEnv,
    config: &DelightConfig,
    episode: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_posterior(posterior, env)?;
    let horizon = env.horizon();
    let frozen = FrozenPlan {
        q: posterior.plan_mean(horizon),
        config: *config,
    };
    let epsilon = epsilon_schedule(config.half_life, episode);
    let mut traj = Trajectory::default();
    let mut state = env.initial_state();
    let mut fresh_plan = true;
    while !env.is_terminal(state) {
        let h = state.row;
        let s = env.state_index(state);
        let replanned;
        let q_post = if fresh_plan {
            &frozen.q
        } else {
            replanned = posterior.plan_mean(horizon);
            &replanned
        };
        let (action, branch, decision) = de_mdp_select(&frozen, q_post, h, s, epsilon, rng);
        let (next, reward) = env.step(state, action)?;
        absorb(posterior, env, state, action, next, reward)?;
        fresh_plan = false;
        traj.steps.push(Step {
            state,
            action,
            reward,
            gated_override: branch == Branch::Override && !decision.gate_is_empty(),
        });
        state = next;
    }
    Ok(traj)
}

/// One PSRL episode: sample an MDP, plan on it, act greedily, update.
pub fn psrl_episode<R: Rng + ?Sized>(
    posterior: &mut TabularModelPosterior,
    env: &DeepSeaEnv,
    rng: &mut R,
) -> Result<Trajectory> {
    check_posterior(posterior, env)?;
    let q = plan(&posterior.sample_model(env.horizon(), rng));
    greedy_rollout(posterior, env, |h, s, _| q.greedy_action(h, s), rng)
}

/// One episode of ε-greedy on the posterior-mean plan frozen at episode start.
pub fn eps_greedy_episode<R: Rng + ?Sized>(
    posterior: &mut TabularModelPosterior,
    env: &DeepSeaEnv,
    schedule: &EpsilonSchedule,
    episode: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_posterior(posterior, env)?;
    let q = posterior.plan_mean(env.horizon());
    let epsilon = schedule.epsilon(episode);
    greedy_rollout(
        posterior,
        env,
        |h, s, rng: &mut R| {
            if epsilon > 0.0 && rng.random::<f64>() < epsilon {
                rng.random_range(0..DeepSeaEnv::NUM_ACTIONS)
            } else {
                q.greedy_action(h, s)
            }
        },
        rng,
    )
}

fn greedy_rollout<R: Rng + ?Sized, F>(
    posterior: &mut TabularModelPosterior,
    env: &DeepSeaEnv,
    mut choose: F,
    rng: &mut R,
) -> Result<Trajectory>
where
    F: FnMut(usize, usize, &mut R) -> usize,
{
    let mut traj = Trajectory::default();
    let mut state = env.initial_state();
    while !env.is_terminal(state) {
        let action = choose(state.row, env.state_index(state), rng);
        let (next, reward) = env.step(state, action)?;
        absorb(posterior, env, state, action, next, reward)?;
        traj.steps.push(Step {
            state,
            action,
            reward,
            gated_override: false,
        });
        state = next;
    }
    Ok(traj)
}

/// Episodic agent for DeepSea.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum MdpPolicy {
    Delight(DelightConfig),
    Psrl,
    EpsGreedy(EpsilonSchedule),
}

impl MdpPolicy {
    pub fn run_episode<R: Rng + ?Sized>(
        &self,
        posterior: &mut TabularModelPosterior,
        env: &DeepSeaEnv,
        episode: u64,
        rng: &mut R,
    ) -> Result<Trajectory> {
        match self {
            MdpPolicy::Delight(cfg) => de_mdp_episode(posterior, env, cfg, episode, rng),
            MdpPolicy::Psrl => psrl_episode(posterior, env, rng),
            MdpPolicy::EpsGreedy(schedule) => {
                eps_greedy_episode(posterior, env, schedule, episode, rng)
            }
        }
    }
}
