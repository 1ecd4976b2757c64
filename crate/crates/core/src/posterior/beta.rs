use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::special::reg_inc_beta;

/// Beta(α, β) belief over a Bernoulli mean.
///
/// Starting from the uniform prior, `alpha = 1 + successes` and
/// `beta = 1 + failures`. Fractional pseudo-counts are allowed so the same
/// type can track rescaled non-binary rewards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaPosterior {
    fn default() -> Self {
        Self::uniform()
    }
}

impl BetaPosterior {
    pub fn new(alpha: f64, beta: f64) -> Self {
        debug_assert!(alpha > 0.0 && beta > 0.0);
        Self { alpha, beta }
    }

    /// The Beta(1, 1) prior.
    pub fn uniform() -> Self {
        Self::new(1.0, 1.0)
    }

    /// Conjugate update with a Bernoulli observation.
    pub fn observe(&mut self, success: bool) {
        if success {
            self.alpha += 1.0;
        } else {
            self.beta += 1.0;
        }
    }

    /// Returns the posterior after one Bernoulli observation.
    #[must_use]
    pub fn updated(mut self, success: bool) -> Self {
        self.observe(success);
        self
    }

    /// Fractional update with an observation in `[0, 1]`: adds `r` to alpha
    /// and `1 - r` to beta.
    pub fn observe_fraction(&mut self, r: f64) {
        debug_assert!((0.0..=1.0).contains(&r));
        self.alpha += r;
        self.beta += 1.0 - r;
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    /// Observations absorbed on top of the Beta(1, 1) prior.
    pub fn observations(&self) -> f64 {
        self.alpha + self.beta - 2.0
    }

    /// `E[(X - v)^+]` for `X ~ Beta(alpha, beta)`.
    ///
    /// `E[X 1{X > v}] = m (1 - I_v(α + 1, β))`, and both upper tails are
    /// evaluated as `I_{1-v}(β, ·)` so small tails keep relative accuracy.
    pub fn expected_improvement(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return self.mean() - v;
        }
        if v >= 1.0 {
            return 0.0;
        }
        let upper = |a: f64, b: f64| {
            reg_inc_beta(b, a, 1.0 - v).expect("beta parameters are positive and v is in (0, 1)")
        };
        let ei =
            self.mean() * upper(self.alpha + 1.0, self.beta) - v * upper(self.alpha, self.beta);
        ei.max(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Beta::new(self.alpha, self.beta)
            .expect("beta parameters are positive")
            .sample(rng)
    }
}
