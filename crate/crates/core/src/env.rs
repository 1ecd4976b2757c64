//! Environment families with ground-truth regret accounting.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::delight::argmax;
use crate::error::{Error, Result};

fn check_action(action: usize, num_actions: usize) -> Result<()> {
    if action >= num_actions {
        return Err(Error::InvalidAction {
            action,
            num_actions,
        });
    }
    Ok(())
}

/// K-armed Bernoulli bandit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliEnv {
    means: Vec<f64>,
    best_mean: f64,
}

impl BernoulliEnv {
    pub fn from_means(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::Config(
                "Bernoulli bandit needs at least one arm".into(),
            ));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::Config("Bernoulli means must lie in [0, 1]".into()));
        }
        let best_mean = means[argmax(&means)];
        Ok(Self { means, best_mean })
    }

    /// Arm means drawn i.i.d. from Uniform(0, 1).
    pub fn sample<R: Rng + ?Sized>(num_arms: usize, rng: &mut R) -> Result<Self> {
        Self::from_means((0..num_arms).map(|_| rng.random::<f64>()).collect())
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn best_mean(&self) -> f64 {
        self.best_mean
    }

    pub fn gap(&self, action: usize) -> f64 {
        self.best_mean - self.means[action]
    }

    /// Bernoulli reward and the regret increment `f* - μ[a]`.
    pub fn step<R: Rng + ?Sized>(&self, action: usize, rng: &mut R) -> Result<(f64, f64)> {
        check_action(action, self.num_arms())?;
        let reward = if rng.random::<f64>() < self.means[action] {
            1.0
        } else {
            0.0
        };
        Ok((reward, self.gap(action)))
    }
}

/// Linear Gaussian bandit with fixed arm features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEnv {
    num_arms: usize,
    dim: usize,
    /// Row-major `num_arms × dim`.
    features: Vec<f64>,
    theta: Vec<f64>,
    noise: f64,
    arm_means: Vec<f64>,
    best_mean: f64,
}

impl LinearEnv {
    pub fn new(
        num_arms: usize,
        dim: usize,
        features: Vec<f64>,
        theta: Vec<f64>,
        noise: f64,
    ) -> Result<Self> {
        if num_arms == 0 || dim == 0 {
            return Err(Error::Config("linear bandit needs K, d >= 1".into()));
        }
        if features.len() != num_arms * dim {
            return Err(Error::DimensionMismatch {
                expected: num_arms * dim,
                got: features.len(),
            });
        }
        if theta.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: theta.len(),
            });
        }
        if !(noise >= 0.0) {
            return Err(Error::Config(format!(
                "noise must be nonnegative, got {noise}"
            )));
        }
        let arm_means: Vec<f64> = features
            .chunks(dim)
            .map(|x| x.iter().zip(&theta).map(|(a, b)| a * b).sum())
            .collect();
        let best_mean = arm_means[argmax(&arm_means)];
        Ok(Self {
            num_arms,
            dim,
            features,
            theta,
            noise,
            arm_means,
            best_mean,
        })
    }

    /// Features `N(0, I/d)` per arm and `θ* ~ N(0, I)`.
    pub fn sample<R: Rng + ?Sized>(
        num_arms: usize,
        dim: usize,
        noise: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let scale = 1.0 / (dim.max(1) as f64).sqrt();
        let features = (0..num_arms * dim)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let theta = (0..dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::new(num_arms, dim, features, theta, noise)
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature(&self, action: usize) -> &[f64] {
        &self.features[action * self.dim..(action + 1) * self.dim]
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn arm_means(&self) -> &[f64] {
        &self.arm_means
    }

    pub fn best_mean(&self) -> f64 {
        self.best_mean
    }

    /// Noisy reward and the noiseless regret increment.
    pub fn step<R: Rng + ?Sized>(&self, action: usize, rng: &mut R) -> Result<(f64, f64)> {
        check_action(action, self.num_arms)?;
        let mean = self.arm_means[action];
        let reward = if self.noise > 0.0 {
            Normal::new(mean, self.noise)
                .expect("noise is positive")
                .sample(rng)
        } else {
            mean
        };
        Ok((reward, self.best_mean - mean))
    }
}

/// Position in a DeepSea grid; `row == size` marks the end of the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeepSeaState {
    pub row: usize,
    pub col: usize,
}

/// DeepSea: an `N × N` grid descended one row per step over an `N`-step
/// episode. Each cell has a seeded flip bit deciding which raw action means
/// "right"; right moves cost `0.01 / N` and a right move from the
/// bottom-right cell pays the treasure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepSeaEnv {
    size: usize,
    flips: Vec<bool>,
    move_cost: f64,
    treasure: f64,
}

impl DeepSeaEnv {
    pub const NUM_ACTIONS: usize = 2;

    pub fn with_flips(size: usize, flips: Vec<bool>) -> Result<Self> {
        if size == 0 {
            return Err(Error::Config("DeepSea needs size >= 1".into()));
        }
        if flips.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                got: flips.len(),
            });
        }
        Ok(Self {
            size,
            flips,
            move_cost: 0.01 / size as f64,
            treasure: 1.0,
        })
    }

    pub fn sample<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<Self> {
        let flips = (0..size * size).map(|_| rng.random::<bool>()).collect();
        Self::with_flips(size, flips)
    }

    /// Overrides the rightward move cost (default `0.01 / N`).
    pub fn with_move_cost(mut self, move_cost: f64) -> Self {
        self.move_cost = move_cost;
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn horizon(&self) -> usize {
        self.size
    }

    pub fn num_states(&self) -> usize {
        self.size * self.size
    }

    pub fn move_cost(&self) -> f64 {
        self.move_cost
    }

    pub fn treasure(&self) -> f64 {
        self.treasure
    }

    /// Smallest and largest single-step rewards.
    pub fn reward_range(&self) -> (f64, f64) {
        (-self.move_cost, self.treasure)
    }

    pub fn initial_state(&self) -> DeepSeaState {
        DeepSeaState { row: 0, col: 0 }
    }

    pub fn is_terminal(&self, state: DeepSeaState) -> bool {
        state.row >= self.size
    }

    pub fn state_index(&self, state: DeepSeaState) -> usize {
        state.row * self.size + state.col
    }

    /// The raw action bit that moves right at `state`.
    pub fn right_action(&self, state: DeepSeaState) -> usize {
        usize::from(!self.flips[self.state_index(state)])
    }

    pub fn step(&self, state: DeepSeaState, action: usize) -> Result<(DeepSeaState, f64)> {
        if self.is_terminal(state) {
            return Err(Error::EpisodeFinished);
        }
        if state.col > state.row {
            return Err(Error::IndexOutOfRange {
                what: "DeepSea column",
                index: state.col,
                size: state.row + 1,
            });
        }
        check_action(action, Self::NUM_ACTIONS)?;
        let right = action == self.right_action(state);
        let mut reward = 0.0;
        let col = if right {
            reward -= self.move_cost;
            if state.row == self.size - 1 && state.col == self.size - 1 {
                reward += self.treasure;
            }
            (state.col + 1).min(self.size - 1)
        } else {
            state.col.saturating_sub(1)
        };
        Ok((
            DeepSeaState {
                row: state.row + 1,
                col,
            },
            reward,
        ))
    }

    /// Return of the unique treasure-reaching action sequence.
    pub fn optimal_return(&self) -> f64 {
        (self.treasure - self.size as f64 * self.move_cost).max(0.0)
    }
}
