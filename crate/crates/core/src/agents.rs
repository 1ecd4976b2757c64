//! Bandit agents behind one select/update interface: delight-gated
//! exploration (Bernoulli and linear), Thompson sampling, ε-greedy, UCB1 and
//! a bare host (pure greedy, or a fixed-temperature Boltzmann host).

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::delight::{
    act, argmax, epsilon_schedule, sample_categorical, Branch, DelightConfig, GateDecision,
    HostMode,
};
use crate::error::{Error, Result};
use crate::posterior::{gaussian_ei, BetaPosterior, LinearGaussianPosterior};

/// Override rate of ε-greedy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `ε_t = M / (M + t)`.
    Annealed {
        half_life: f64,
    },
    Constant {
        epsilon: f64,
    },
}

impl EpsilonSchedule {
    pub fn epsilon(&self, t: u64) -> f64 {
        match *self {
            EpsilonSchedule::Annealed { half_life } => epsilon_schedule(half_life, t),
            EpsilonSchedule::Constant { epsilon } => epsilon,
        }
    }
}

/// Action-selection rule of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Policy {
    Delight(DelightConfig),
    Thompson,
    EpsGreedy(EpsilonSchedule),
    /// UCB1 with an infinite index on unpulled arms (Bernoulli only).
    Ucb,
    /// No override at all: just the host.
    Host(HostMode),
}

/// Belief state over arm rewards.
#[derive(Debug, Clone, PartialEq)]
pub enum Beliefs {
    Bernoulli(Vec<BetaPosterior>),
    Linear {
        posterior: LinearGaussianPosterior,
        /// Row-major `num_arms × dim`.
        features: Vec<f64>,
    },
}

impl Beliefs {
    pub fn num_arms(&self) -> usize {
        match self {
            Beliefs::Bernoulli(arms) => arms.len(),
            Beliefs::Linear {
                posterior,
                features,
            } => features.len() / posterior.dim(),
        }
    }

    pub fn means(&self) -> Vec<f64> {
        match self {
            Beliefs::Bernoulli(arms) => arms.iter().map(BetaPosterior::mean).collect(),
            Beliefs::Linear {
                posterior,
                features,
            } => features
                .chunks(posterior.dim())
                .map(|x| {
                    x.iter()
                        .zip(posterior.mean().iter())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        }
    }
}

/// Instrumentation counters. Only `select` touches them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    /// Rounds on which the override branch fired.
    pub override_rounds: u64,
    /// Rounds on which the override fired with a non-empty gate.
    pub gated_overrides: u64,
    /// Per-arm count of gated-override selections.
    pub gated_selections: Vec<u64>,
    /// Rounds that played a never-pulled arm.
    pub fresh_arm_selections: u64,
    /// Gated-override rounds that played a never-pulled arm.
    pub fresh_override_selections: u64,
}

/// One select call's outcome.
#[derive(Debug, Clone)]
pub struct Selection {
    pub action: usize,
    pub branch: Branch,
    pub epsilon: f64,
    /// Present for delight agents.
    pub gate: Option<GateDecision>,
    /// The action had never been pulled.
    pub fresh: bool,
    /// The action came from the forced initial sweep.
    pub cold_start: bool,
}

impl Selection {
    pub fn gated_override(&self) -> bool {
        self.branch == Branch::Override && self.gate.as_ref().is_some_and(|g| !g.gate_is_empty())
    }
}

/// Variant tag used in outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    DeBernoulli,
    DeLinear,
    ThompsonBernoulli,
    ThompsonLinear,
    EpsGreedy,
    Ucb,
    Greedy,
    WarmHost,
}

#[derive(Debug, Clone)]
pub struct Agent {
    policy: Policy,
    beliefs: Beliefs,
    pulls: Vec<u64>,
    reward_sums: Vec<f64>,
    t: u64,
    cold_start: bool,
    counters: Counters,
}

impl Agent {
    /// Agent over `num_arms` Bernoulli arms with Beta(1, 1) priors.
    pub fn bernoulli(policy: Policy, num_arms: usize) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Config("agent needs at least one arm".into()));
        }
        Self::build(
            policy,
            Beliefs::Bernoulli(vec![BetaPosterior::uniform(); num_arms]),
        )
    }

    /// Agent over a linear bandit with a `N(0, η⁻¹ I)` prior.
    pub fn linear(
        policy: Policy,
        features: Vec<f64>,
        dim: usize,
        prior_precision: f64,
        noise_var: f64,
    ) -> Result<Self> {
        if matches!(policy, Policy::Ucb) {
            return Err(Error::Config(
                "UCB is only implemented for Bernoulli arms".into(),
            ));
        }
        let posterior = LinearGaussianPosterior::new(dim, prior_precision, noise_var)?;
        if features.is_empty() || !features.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: features.len() % dim,
            });
        }
        Self::build(
            policy,
            Beliefs::Linear {
                posterior,
                features,
            },
        )
    }

    fn build(policy: Policy, beliefs: Beliefs) -> Result<Self> {
        match policy {
            Policy::Delight(cfg) => cfg.validate()?,
            Policy::Host(HostMode::Boltzmann { temperature }) if !(temperature > 0.0) => {
                return Err(Error::Config("host temperature must be positive".into()))
            }
            Policy::EpsGreedy(EpsilonSchedule::Constant { epsilon })
                if !(0.0..=1.0).contains(&epsilon) =>
            {
                return Err(Error::Config(format!(
                    "epsilon must lie in [0, 1], got {epsilon}"
                )))
            }
            Policy::EpsGreedy(EpsilonSchedule::Annealed { half_life }) if !(half_life > 0.0) => {
                return Err(Error::Config("half-life must be positive".into()))
            }
            _ => {}
        }
        let k = beliefs.num_arms();
        Ok(Self {
            policy,
            beliefs,
            pulls: vec![0; k],
            reward_sums: vec![0.0; k],
            t: 0,
            cold_start: false,
            counters: Counters {
                gated_selections: vec![0; k],
                ..Counters::default()
            },
        })
    }

    /// Pull every arm once, in index order, before the policy takes over.
    #[must_use]
    pub fn with_cold_start(mut self, on: bool) -> Self {
        self.cold_start = on;
        self
    }

    pub fn kind(&self) -> AgentKind {
        let linear = matches!(self.beliefs, Beliefs::Linear { .. });
        match (self.policy, linear) {
            (Policy::Delight(_), false) => AgentKind::DeBernoulli,
            (Policy::Delight(_), true) => AgentKind::DeLinear,
            (Policy::Thompson, false) => AgentKind::ThompsonBernoulli,
            (Policy::Thompson, true) => AgentKind::ThompsonLinear,
            (Policy::EpsGreedy(_), _) => AgentKind::EpsGreedy,
            (Policy::Ucb, _) => AgentKind::Ucb,
            (Policy::Host(HostMode::Greedy), _) => AgentKind::Greedy,
            (Policy::Host(HostMode::Boltzmann { .. }), _) => AgentKind::WarmHost,
        }
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn beliefs(&self) -> &Beliefs {
        &self.beliefs
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn posterior_means(&self) -> Vec<f64> {
        self.beliefs.means()
    }

    pub fn select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Selection {
        if self.cold_start {
            if let Some(a) = self.pulls.iter().position(|&n| n == 0) {
                self.counters.fresh_arm_selections += 1;
                return Selection {
                    action: a,
                    branch: Branch::Host,
                    epsilon: 0.0,
                    gate: None,
                    fresh: true,
                    cold_start: true,
                };
            }
        }
        let (action, branch, epsilon, gate) = match self.policy {
            Policy::Delight(cfg) => {
                let decision = self.delight_decision(&cfg);
                let epsilon = cfg.epsilon(self.t);
                let acted = act(&decision.host, &decision.override_dist, epsilon, rng);
                (acted.action, acted.branch, epsilon, Some(decision))
            }
            Policy::Thompson => (self.thompson_draw(rng), Branch::Host, 0.0, None),
            Policy::EpsGreedy(schedule) => {
                let epsilon = schedule.epsilon(self.t);
                if epsilon > 0.0 && rng.random::<f64>() < epsilon {
                    (
                        rng.random_range(0..self.num_arms()),
                        Branch::Override,
                        epsilon,
                        None,
                    )
                } else {
                    (argmax(&self.beliefs.means()), Branch::Host, epsilon, None)
                }
            }
            Policy::Ucb => (self.ucb_choice(), Branch::Host, 0.0, None),
            Policy::Host(mode) => {
                let host = mode.policy(&self.beliefs.means());
                (sample_categorical(&host, rng), Branch::Host, 0.0, None)
            }
        };
        let selection = Selection {
            action,
            branch,
            epsilon,
            gate,
            fresh: self.pulls[action] == 0,
            cold_start: false,
        };
        self.record(&selection);
        selection
    }

    fn record(&mut self, sel: &Selection) {
        if sel.branch == Branch::Override {
            self.counters.override_rounds += 1;
        }
        if sel.fresh {
            self.counters.fresh_arm_selections += 1;
        }
        if sel.gated_override() {
            self.counters.gated_overrides += 1;
            self.counters.gated_selections[sel.action] += 1;
            if sel.fresh {
                self.counters.fresh_override_selections += 1;
            }
        }
    }

    /// Means, baseline, per-arm EI and the gate for the current beliefs.
    pub fn delight_decision(&self, cfg: &DelightConfig) -> GateDecision {
        let (means, ei) = match &self.beliefs {
            Beliefs::Bernoulli(arms) => {
                let means: Vec<f64> = arms.iter().map(BetaPosterior::mean).collect();
                let v = means[argmax(&means)];
                // Many arms share a posterior (all fresh arms, for one).
                let mut cache: HashMap<(u64, u64), f64> = HashMap::new();
                let ei = arms
                    .iter()
                    .map(|p| {
                        *cache
                            .entry((p.alpha.to_bits(), p.beta.to_bits()))
                            .or_insert_with(|| p.expected_improvement(v))
                    })
                    .collect();
                (means, ei)
            }
            Beliefs::Linear {
                posterior,
                features,
            } => {
                let (means, vars) = posterior
                    .predictive_batch(features)
                    .expect("features match the posterior dimension");
                let v = means[argmax(&means)];
                let ei = means
                    .iter()
                    .zip(&vars)
                    .map(|(&mu, &s2)| gaussian_ei(mu, s2.sqrt(), v))
                    .collect();
                (means, ei)
            }
        };
        let baseline = means[argmax(&means)];
        let host = cfg.host.policy(&means);
        GateDecision::evaluate(baseline, ei, host, cfg)
    }

    fn thompson_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let draws: Vec<f64> = match &self.beliefs {
            Beliefs::Bernoulli(arms) => arms.iter().map(|p| p.sample(rng)).collect(),
            Beliefs::Linear {
                posterior,
                features,
            } => {
                let theta = posterior.sample_theta(rng);
                features
                    .chunks(posterior.dim())
                    .map(|x| x.iter().zip(theta.iter()).map(|(a, b)| a * b).sum())
                    .collect()
            }
        };
        argmax(&draws)
    }

    fn ucb_choice(&self) -> usize {
        if let Some(a) = self.pulls.iter().position(|&n| n == 0) {
            return a;
        }
        let log_t = (self.t.max(1) as f64).ln();
        let index: Vec<f64> = self
            .pulls
            .iter()
            .zip(&self.reward_sums)
            .map(|(&n, &s)| {
                let n = n as f64;
                s / n + (2.0 * log_t / n).sqrt()
            })
            .collect();
        argmax(&index)
    }

    /// Absorbs the reward of `action` and advances the round counter.
    pub fn update(&mut self, action: usize, reward: f64) -> Result<()> {
        if action >= self.num_arms() {
            return Err(Error::InvalidAction {
                action,
                num_actions: self.num_arms(),
            });
        }
        match &mut self.beliefs {
            Beliefs::Bernoulli(arms) => {
                if reward != 0.0 && reward != 1.0 {
                    return Err(Error::Domain(format!(
                        "Bernoulli reward must be 0 or 1, got {reward}"
                    )));
                }
                arms[action].observe(reward == 1.0);
            }
            Beliefs::Linear {
                posterior,
                features,
            } => {
                let d = posterior.dim();
                posterior.update(&features[action * d..(action + 1) * d], reward)?;
            }
        }
        self.pulls[action] += 1;
        self.reward_sums[action] += reward;
        self.t += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn de() -> Policy {
        Policy::Delight(DelightConfig::default())
    }

    #[test]
    fn fresh_arms_all_gated_at_start() {
        let agent = Agent::bernoulli(de(), 3).unwrap();
        let d = agent.delight_decision(&DelightConfig::default());
        assert_eq!(d.baseline, 0.5);
        // Arm 0 is the host; the other two are fresh with delight 10 · 0.125.
        assert_eq!(d.gated, vec![1, 2]);
        assert!((d.delight[1] - 1.25).abs() < 1e-12);
        assert_eq!(d.delight[0], 0.0);
    }

    #[test]
    fn fresh_arms_excluded_above_shutoff() {
        let mut agent = Agent::bernoulli(de(), 4).unwrap();
        if let Beliefs::Bernoulli(arms) = &mut agent.beliefs {
            arms[2] = BetaPosterior::new(90.0, 10.0);
        }
        let d = agent.delight_decision(&DelightConfig::default());
        assert!(d.baseline > DelightConfig::default().fresh_arm_threshold().unwrap());
        assert!(!d.is_gated(0) && !d.is_gated(1) && !d.is_gated(3));
    }

    #[test]
    fn host_branch_is_greedy() {
        let mut agent = Agent::bernoulli(de(), 3).unwrap();
        if let Beliefs::Bernoulli(arms) = &mut agent.beliefs {
            arms[1] = BetaPosterior::new(5.0, 1.0);
        }
        agent.t = 1_000_000_000;
        let mut rng = seeded(3);
        for _ in 0..100 {
            let s = agent.select(&mut rng);
            if s.branch == Branch::Host {
                assert_eq!(s.action, 1);
            }
        }
    }

    #[test]
    fn thompson_extremes() {
        let mut one = Agent::bernoulli(Policy::Thompson, 1).unwrap();
        assert_eq!(one.select(&mut seeded(0)).action, 0);

        let mut agent = Agent::bernoulli(Policy::Thompson, 2).unwrap();
        if let Beliefs::Bernoulli(arms) = &mut agent.beliefs {
            arms[0] = BetaPosterior::new(1e6, 1.0);
            arms[1] = BetaPosterior::new(1.0, 1e6);
        }
        let mut rng = seeded(4);
        let hits = (0..10_000)
            .filter(|_| agent.select(&mut rng).action == 0)
            .count();
        assert!(hits as f64 / 1e4 > 0.999);
    }

    #[test]
    fn thompson_linear_sign() {
        let mut agent = Agent::linear(Policy::Thompson, vec![1.0, -1.0], 1, 1.0, 1.0).unwrap();
        for _ in 0..2000 {
            agent.update(0, 1.0).unwrap();
        }
        let mut rng = seeded(5);
        for _ in 0..100 {
            assert_eq!(agent.select(&mut rng).action, 0);
        }
    }

    #[test]
    fn ucb_prefers_unpulled_then_ties_low() {
        let mut agent = Agent::bernoulli(Policy::Ucb, 4).unwrap();
        let mut rng = seeded(0);
        for expected in 0..4 {
            let s = agent.select(&mut rng);
            assert_eq!(s.action, expected);
            assert!(s.fresh);
            agent.update(s.action, 1.0).unwrap();
        }
        assert_eq!(agent.select(&mut rng).action, 0);
    }

    #[test]
    fn eps_greedy_limits() {
        let mut greedy = Agent::bernoulli(
            Policy::EpsGreedy(EpsilonSchedule::Constant { epsilon: 0.0 }),
            3,
        )
        .unwrap();
        greedy.update(2, 1.0).unwrap();
        let mut rng = seeded(1);
        for _ in 0..50 {
            assert_eq!(greedy.select(&mut rng).action, 2);
        }
    }

    #[test]
    fn update_routes_and_validates() {
        let mut agent = Agent::bernoulli(de(), 3).unwrap();
        agent.update(1, 1.0).unwrap();
        match agent.beliefs() {
            Beliefs::Bernoulli(arms) => assert_eq!(arms[1], BetaPosterior::new(2.0, 1.0)),
            _ => unreachable!(),
        }
        assert_eq!(agent.round(), 1);
        assert_eq!(
            agent.counters(),
            &Counters {
                gated_selections: vec![0; 3],
                ..Default::default()
            }
        );
        assert!(matches!(
            agent.update(3, 1.0),
            Err(Error::InvalidAction { .. })
        ));
        assert!(matches!(agent.update(0, 0.5), Err(Error::Domain(_))));

        let mut lin = Agent::linear(de(), vec![1.0, 0.0, 0.0, 1.0], 2, 1.0, 1.0).unwrap();
        lin.update(0, 1.0).unwrap();
        match lin.beliefs() {
            Beliefs::Linear { posterior, .. } => assert!((posterior.mean()[0] - 0.5).abs() < 1e-15),
            _ => unreachable!(),
        }
        assert!(Agent::linear(Policy::Ucb, vec![1.0], 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn cold_start_sweeps_arms_first() {
        let mut agent = Agent::bernoulli(de(), 3).unwrap().with_cold_start(true);
        let mut rng = seeded(2);
        for a in 0..3 {
            let s = agent.select(&mut rng);
            assert!(s.cold_start);
            assert_eq!(s.action, a);
            agent.update(a, 0.0).unwrap();
        }
        assert!(!agent.select(&mut rng).cold_start);
    }
}
