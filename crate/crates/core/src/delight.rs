//! Delight-gated exploration: surprisal under the host, the priced gate on
//! prospective delight (`EI × surprisal`), the override distribution, the
//! annealed host/override mixture, and the reservation-index view of the gate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the host turns per-action scores into a policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HostMode {
    /// One-hot on the best score, lowest index on ties.
    Greedy,
    /// Softmax of `score / temperature`.
    Boltzmann { temperature: f64 },
}

impl HostMode {
    pub fn policy(&self, scores: &[f64]) -> Vec<f64> {
        match *self {
            HostMode::Greedy => one_hot(scores.len(), argmax(scores)),
            HostMode::Boltzmann { temperature } => boltzmann(scores, temperature),
        }
    }
}

/// Gate price, surprisal cap, schedule half-life and host.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelightConfig {
    /// λ, in reward × surprisal units.
    pub gate_price: f64,
    /// L, in nats.
    pub surprisal_cap: f64,
    /// M, in rounds (or episodes).
    pub half_life: f64,
    pub host: HostMode,
}

impl Default for DelightConfig {
    fn default() -> Self {
        Self {
            gate_price: 0.1,
            surprisal_cap: 10.0,
            half_life: 100.0,
            host: HostMode::Greedy,
        }
    }
}

impl DelightConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("gate_price", self.gate_price)?;
        positive("surprisal_cap", self.surprisal_cap)?;
        positive("half_life", self.half_life)?;
        if let HostMode::Boltzmann { temperature } = self.host {
            positive("temperature", temperature)?;
        }
        Ok(())
    }

    pub fn epsilon(&self, t: u64) -> f64 {
        epsilon_schedule(self.half_life, t)
    }

    /// Baseline above which an untried Beta(1, 1) arm cannot pass the gate.
    pub fn fresh_arm_threshold(&self) -> Option<f64> {
        fresh_arm_threshold(self.gate_price, self.surprisal_cap)
    }
}

/// Everything the gate computed on one decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub baseline: f64,
    pub host: Vec<f64>,
    pub ei: Vec<f64>,
    pub surprisal: Vec<f64>,
    pub delight: Vec<f64>,
    /// Indices with `delight >= λ`, ascending.
    pub gated: Vec<usize>,
    pub override_dist: Vec<f64>,
}

impl GateDecision {
    /// Runs surprisal, gate and override construction for one decision.
    pub fn evaluate(baseline: f64, ei: Vec<f64>, host: Vec<f64>, config: &DelightConfig) -> Self {
        let surp = match config.host {
            HostMode::Greedy => greedy_surprisal(&host, config.surprisal_cap),
            HostMode::Boltzmann { .. } => surprisal(&host, config.surprisal_cap),
        };
        Self::with_surprisal(baseline, ei, surp, host, config.gate_price)
    }

    /// Like [`Self::evaluate`] but with a precomputed surprisal vector.
    pub fn with_surprisal(
        baseline: f64,
        ei: Vec<f64>,
        surprisal: Vec<f64>,
        host: Vec<f64>,
        gate_price: f64,
    ) -> Self {
        let (delight, gated) = gate(&ei, &surprisal, gate_price);
        let override_dist = override_distribution(&delight, &gated, &host);
        Self {
            baseline,
            host,
            ei,
            surprisal,
            delight,
            gated,
            override_dist,
        }
    }

    pub fn gate_is_empty(&self) -> bool {
        self.gated.is_empty()
    }

    pub fn is_gated(&self, action: usize) -> bool {
        self.gated.binary_search(&action).is_ok()
    }

    /// The full acting distribution `(1 - ε) host + ε override`.
    ///
    /// When the gate is empty the override is the host itself and the host
    /// vector is returned unchanged.
    pub fn acting_distribution(&self, epsilon: f64) -> Vec<f64> {
        if self.gate_is_empty() {
            return self.host.clone();
        }
        mixture(&self.host, &self.override_dist, epsilon)
    }
}

/// Which branch of the acting mixture produced an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Host,
    Override,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Acted {
    pub action: usize,
    pub branch: Branch,
}

/// `ε_t = M / (M + t)`, with `t` counted from zero.
pub fn epsilon_schedule(half_life: f64, t: u64) -> f64 {
    half_life / (half_life + t as f64)
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn one_hot(len: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[index] = 1.0;
    v
}

/// Softmax of `scores / temperature`, computed with max subtraction.
pub fn boltzmann(scores: &[f64], temperature: f64) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = scores
        .iter()
        .map(|s| ((s - top) / temperature).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Capped relative surprisal `min{[-log π(a) - ℓ_min]^+, L}`.
///
/// Zero-probability actions have infinite negative log-probability and so
/// land on the cap.
pub fn surprisal(host_probs: &[f64], cap: f64) -> Vec<f64> {
    let nll: Vec<f64> = host_probs
        .iter()
        .map(|&p| if p > 0.0 { -p.ln() } else { f64::INFINITY })
        .collect();
    let l_min = nll.iter().copied().fold(f64::INFINITY, f64::min);
    nll.iter().map(|&l| (l - l_min).max(0.0).min(cap)).collect()
}

/// Surprisal of a one-hot host: `L · (1 - onehot(argmax))`.
pub fn greedy_surprisal(host_probs: &[f64], cap: f64) -> Vec<f64> {
    let top = argmax(host_probs);
    (0..host_probs.len())
        .map(|a| if a == top { 0.0 } else { cap })
        .collect()
}

/// Prospective delight and the inclusive `delight >= λ` superlevel set.
pub fn gate(ei: &[f64], surp: &[f64], gate_price: f64) -> (Vec<f64>, Vec<usize>) {
    debug_assert_eq!(ei.len(), surp.len());
    let delight: Vec<f64> = ei.iter().zip(surp).map(|(e, s)| e * s).collect();
    let gated = delight
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= gate_price)
        .map(|(a, _)| a)
        .collect();
    (delight, gated)
}

/// Override distribution: proportional to delight on the gated set, or the
/// host itself when nothing is gated.
pub fn override_distribution(delight: &[f64], gated: &[usize], host_probs: &[f64]) -> Vec<f64> {
    if gated.is_empty() {
        return host_probs.to_vec();
    }
    let total: f64 = gated.iter().map(|&a| delight[a]).sum();
    let mut q = vec![0.0; delight.len()];
    for &a in gated {
        q[a] = delight[a] / total;
    }
    q
}

pub fn mixture(host: &[f64], over: &[f64], epsilon: f64) -> Vec<f64> {
    host.iter()
        .zip(over)
        .map(|(h, o)| (1.0 - epsilon) * h + epsilon * o)
        .collect()
}

/// Draws an index from a probability vector by inversion.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Samples the acting mixture: the override with probability `ε`, else the host.
pub fn act<R: Rng + ?Sized>(
    host: &[f64],
    override_dist: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Acted {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        Acted {
            action: sample_categorical(override_dist, rng),
            branch: Branch::Override,
        }
    } else {
        Acted {
            action: sample_categorical(host, rng),
            branch: Branch::Host,
        }
    }
}

/// `v_off = 1 - √(2λ/L)` for `λ < L/2`; `None` when fresh arms never pass.
pub fn fresh_arm_threshold(gate_price: f64, cap: f64) -> Option<f64> {
    if gate_price < cap / 2.0 {
        Some(1.0 - (2.0 * gate_price / cap).sqrt())
    } else {
        None
    }
}

/// `E[(U - z)^+]` for `U ~ Uniform(0, 1)`.
pub fn uniform_tail_value(z: f64) -> f64 {
    if z <= 0.0 {
        0.5 - z
    } else if z >= 1.0 {
        0.0
    } else {
        (1.0 - z) * (1.0 - z) / 2.0
    }
}

const BISECTION_ITERS: usize = 200;

/// Delight reservation index `sup{z : surp · g(z) >= λ}`.
///
/// `g` is the tail-value function `z ↦ E[(X - z)^+]` of a prior supported in
/// `support = (lo, hi)`; bisection runs on `[lo - 1, hi]`. Returns
/// `f64::NEG_INFINITY` when the superlevel set is empty.
pub fn reservation_index<G: Fn(f64) -> f64>(
    tail_value: G,
    surprisal: f64,
    gate_price: f64,
    support: (f64, f64),
) -> f64 {
    let passes = |z: f64| surprisal * tail_value(z) >= gate_price;
    let mut lo = support.0 - 1.0;
    let mut hi = support.1;
    if !passes(lo) {
        return f64::NEG_INFINITY;
    }
    if passes(hi) {
        return hi;
    }
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-13 {
            break;
        }
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Pandora reservation value: `sup{z : g(z) >= cost}`.
pub fn pandora_reservation<G: Fn(f64) -> f64>(
    tail_value: G,
    cost: f64,
    support: (f64, f64),
) -> f64 {
    reservation_index(tail_value, 1.0, cost, support)
}
