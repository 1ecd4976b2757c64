use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::BetaPosterior;
use crate::error::{Error, Result};
use crate::mdp::{backward_induction, PlanningModel, QFunction};

/// Dirichlet transition counts plus Beta reward beliefs for a finite MDP.
///
/// Rewards are mapped affinely from `reward_scale = (lo, hi)` onto `[0, 1]`
/// and absorbed as fractional Beta pseudo-counts. Transition rows carry a
/// symmetric Dirichlet prior of `concentration` per next state; only the
/// observed counts are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularModelPosterior {
    num_states: usize,
    num_actions: usize,
    concentration: f64,
    /// Observed `(next_state, count)` pairs per `(s, a)`.
    successors: Vec<Vec<(usize, f64)>>,
    /// Observed transitions per `(s, a)`.
    totals: Vec<f64>,
    reward_beliefs: Vec<BetaPosterior>,
    reward_scale: (f64, f64),
}

impl TabularModelPosterior {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        concentration: f64,
        reward_scale: (f64, f64),
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Config("tabular posterior needs S, A >= 1".into()));
        }
        if !(concentration > 0.0) {
            return Err(Error::Config(format!(
                "Dirichlet concentration must be positive, got {concentration}"
            )));
        }
        let (lo, hi) = reward_scale;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("invalid reward scale ({lo}, {hi})")));
        }
        let pairs = num_states * num_actions;
        Ok(Self {
            num_states,
            num_actions,
            concentration,
            successors: vec![Vec::new(); pairs],
            totals: vec![0.0; pairs],
            reward_beliefs: vec![BetaPosterior::uniform(); pairs],
            reward_scale,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn reward_scale(&self) -> (f64, f64) {
        self.reward_scale
    }

    fn pair(&self, s: usize, a: usize) -> Result<usize> {
        if s >= self.num_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                size: self.num_states,
            });
        }
        if a >= self.num_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                size: self.num_actions,
            });
        }
        Ok(s * self.num_actions + a)
    }

    /// Dirichlet pseudo-count for `(s, a) -> s_next`, prior included.
    pub fn transition_count(&self, s: usize, a: usize, s_next: usize) -> Result<f64> {
        let idx = self.pair(s, a)?;
        self.check_state(s_next)?;
        let observed = self.successors[idx]
            .iter()
            .find(|(n, _)| *n == s_next)
            .map_or(0.0, |(_, c)| *c);
        Ok(self.concentration + observed)
    }

    pub fn reward_belief(&self, s: usize, a: usize) -> Result<BetaPosterior> {
        Ok(self.reward_beliefs[self.pair(s, a)?])
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.num_states {
            return Err(Error::IndexOutOfRange {
                what: "next state",
                index: s,
                size: self.num_states,
            });
        }
        Ok(())
    }

    pub fn observe_transition(&mut self, s: usize, a: usize, s_next: usize) -> Result<()> {
        let idx = self.pair(s, a)?;
        self.check_state(s_next)?;
        let row = &mut self.successors[idx];
        match row.iter_mut().find(|(n, _)| *n == s_next) {
            Some((_, c)) => *c += 1.0,
            None => row.push((s_next, 1.0)),
        }
        self.totals[idx] += 1.0;
        Ok(())
    }

    pub fn observe_reward(&mut self, s: usize, a: usize, reward: f64) -> Result<()> {
        let idx = self.pair(s, a)?;
        let (lo, hi) = self.reward_scale;
        let slack = 1e-12 * (hi - lo);
        if !(reward >= lo - slack && reward <= hi + slack) {
            return Err(Error::RewardOutOfScale { reward, lo, hi });
        }
        let scaled = ((reward - lo) / (hi - lo)).clamp(0.0, 1.0);
        self.reward_beliefs[idx].observe_fraction(scaled);
        Ok(())
    }

    /// Absorbs one observed transition and its reward.
    pub fn update(&mut self, s: usize, a: usize, s_next: usize, reward: f64) -> Result<()> {
        self.pair(s, a)?;
        self.check_state(s_next)?;
        self.observe_reward(s, a, reward)?;
        self.observe_transition(s, a, s_next)
    }

    fn row_total(&self, idx: usize) -> f64 {
        self.concentration * self.num_states as f64 + self.totals[idx]
    }

    /// Posterior-mean transition row for `(s, a)`.
    pub fn mean_transition_row(&self, s: usize, a: usize) -> Result<Vec<f64>> {
        let idx = self.pair(s, a)?;
        let total = self.row_total(idx);
        let mut row = vec![self.concentration / total; self.num_states];
        for &(n, c) in &self.successors[idx] {
            row[n] = (self.concentration + c) / total;
        }
        Ok(row)
    }

    /// Posterior-mean reward of `(s, a)` in original units.
    pub fn mean_reward(&self, s: usize, a: usize) -> Result<f64> {
        let idx = self.pair(s, a)?;
        Ok(self.unscale(self.reward_beliefs[idx].mean()))
    }

    fn unscale(&self, r: f64) -> f64 {
        let (lo, hi) = self.reward_scale;
        lo + (hi - lo) * r
    }

    /// The posterior-mean model as an explicit planning model.
    pub fn posterior_mean_model(&self, horizon: usize) -> PlanningModel {
        let (s_n, a_n) = (self.num_states, self.num_actions);
        let mut transitions = Vec::with_capacity(s_n * a_n * s_n);
        let mut rewards = Vec::with_capacity(s_n * a_n);
        for s in 0..s_n {
            for a in 0..a_n {
                transitions.extend(self.mean_transition_row(s, a).expect("indices in range"));
                rewards.push(self.mean_reward(s, a).expect("indices in range"));
            }
        }
        PlanningModel::from_parts(s_n, a_n, horizon, transitions, rewards)
    }

    /// Backward induction on the posterior-mean model.
    ///
    /// Same recursion as planning on [`Self::posterior_mean_model`], but each
    /// expectation is split into the shared prior mass plus the sparse observed
    /// counts, so a plan costs `O(H · S · A · (1 + observed successors))`.
    pub fn plan_mean(&self, horizon: usize) -> QFunction {
        let rewards: Vec<f64> = self
            .reward_beliefs
            .iter()
            .map(|b| self.unscale(b.mean()))
            .collect();
        let c0 = self.concentration;
        backward_induction(
            self.num_states,
            self.num_actions,
            horizon,
            |s, a| rewards[s * self.num_actions + a],
            |s, a, next_values, next_sum| {
                let idx = s * self.num_actions + a;
                let mut acc = c0 * next_sum;
                for &(n, c) in &self.successors[idx] {
                    acc += c * next_values[n];
                }
                acc / self.row_total(idx)
            },
        )
    }

    /// Draws a full MDP from the posterior: Dirichlet rows and Beta rewards.
    pub fn sample_model<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> PlanningModel {
        let (s_n, a_n) = (self.num_states, self.num_actions);
        let mut transitions = vec![0.0; s_n * a_n * s_n];
        let mut rewards = Vec::with_capacity(s_n * a_n);
        let prior_gamma = Gamma::new(self.concentration, 1.0).expect("concentration is positive");
        for idx in 0..s_n * a_n {
            let row = &mut transitions[idx * s_n..(idx + 1) * s_n];
            for g in row.iter_mut() {
                *g = prior_gamma.sample(rng);
            }
            for &(n, c) in &self.successors[idx] {
                row[n] = Gamma::new(self.concentration + c, 1.0)
                    .expect("positive shape")
                    .sample(rng);
            }
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|g| *g /= total);
            } else {
                // All gamma draws underflowed; fall back to the mean row.
                row.copy_from_slice(&self.mean_transition_row(idx / a_n, idx % a_n).unwrap());
            }
            rewards.push(self.unscale(self.reward_beliefs[idx].sample(rng)));
        }
        PlanningModel::from_parts(s_n, a_n, horizon, transitions, rewards)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::plan;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fresh(s: usize) -> TabularModelPosterior {
        TabularModelPosterior::new(s, 2, 1.0, (-0.1, 1.0)).unwrap()
    }

    #[test]
    fn fresh_posterior_is_uniform_with_midpoint_rewards() {
        let post = fresh(4);
        let row = post.mean_transition_row(1, 0).unwrap();
        assert!(row.iter().all(|&p| (p - 0.25).abs() < 1e-15));
        assert!((post.mean_reward(2, 1).unwrap() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn single_transition_row_mass() {
        let mut post = fresh(5);
        post.update(0, 1, 3, 0.0).unwrap();
        let row = post.mean_transition_row(0, 1).unwrap();
        let c0 = 1.0;
        assert!((row[3] - (1.0 + c0) / (5.0 * c0 + 1.0)).abs() < 1e-15);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_transition_concentrates() {
        let mut post = fresh(6);
        let n = 40;
        for _ in 0..n {
            post.observe_transition(2, 0, 4).unwrap();
        }
        let row = post.mean_transition_row(2, 0).unwrap();
        assert!(row[4] >= n as f64 / (n as f64 + 6.0));
    }

    #[test]
    fn reward_endpoint_counts_as_success() {
        let mut post = fresh(3);
        post.observe_reward(0, 0, 1.0).unwrap();
        assert_eq!(
            post.reward_belief(0, 0).unwrap(),
            BetaPosterior::new(2.0, 1.0)
        );
        post.observe_reward(0, 1, -0.1).unwrap();
        assert_eq!(
            post.reward_belief(0, 1).unwrap(),
            BetaPosterior::new(1.0, 2.0)
        );
    }

    #[test]
    fn index_and_scale_errors() {
        let mut post = fresh(3);
        assert!(matches!(
            post.update(3, 0, 0, 0.0),
            Err(Error::IndexOutOfRange { what: "state", .. })
        ));
        assert!(matches!(
            post.update(0, 2, 0, 0.0),
            Err(Error::IndexOutOfRange { what: "action", .. })
        ));
        assert!(matches!(
            post.update(0, 0, 7, 0.0),
            Err(Error::IndexOutOfRange {
                what: "next state",
                ..
            })
        ));
        assert!(matches!(
            post.update(0, 0, 1, 2.0),
            Err(Error::RewardOutOfScale { .. })
        ));
        // A failed update leaves the posterior untouched.
        assert_eq!(post, fresh(3));
    }

    #[test]
    fn mean_model_rows_are_stochastic() {
        let mut post = fresh(4);
        post.update(0, 0, 1, 0.5).unwrap();
        post.update(0, 0, 1, 0.2).unwrap();
        post.update(3, 1, 2, 1.0).unwrap();
        let model = post.posterior_mean_model(3);
        for s in 0..4 {
            for a in 0..2 {
                let sum: f64 = model.transition_row(s, a).iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn structured_plan_matches_dense_plan() {
        let mut post = fresh(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let s = rng.random_range(0..5);
            let a = rng.random_range(0..2);
            let n = rng.random_range(0..5);
            let r = rng.random_range(-0.1..1.0);
            post.update(s, a, n, r).unwrap();
        }
        let fast = post.plan_mean(4);
        let dense = plan(&post.posterior_mean_model(4));
        for h in 0..4 {
            for s in 0..5 {
                for a in 0..2 {
                    assert!((fast.q(h, s, a) - dense.q(h, s, a)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampled_models_are_valid() {
        let post = fresh(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = post.sample_model(2, &mut rng);
        for s in 0..4 {
            for a in 0..2 {
                let sum: f64 = model.transition_row(s, a).iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                let r = model.reward(s, a);
                assert!((-0.1..=1.0).contains(&r));
            }
        }
        let q = plan(&model);
        for s in 0..4 {
            for a in 0..2 {
                assert!(q.q(0, s, a).abs() <= 2.0 * 1.0 + 1e-12);
            }
        }
    }
}
