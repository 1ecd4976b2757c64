//! The infinite-reservoir revealed-value discovery model: threshold
//! (reservation) policies, horizon pricing, and the prior-tail rate check.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Role, StreamKey};

/// Prior over the revealed value `X ∈ [0, 1]` of a fresh arm, described by
/// its upper tail `p(y) = Pr(X >= 1 - y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailPrior {
    Uniform,
    /// `p(y) = min(c · y^α, 1)`.
    PolynomialTail {
        alpha: f64,
        c: f64,
    },
}

impl TailPrior {
    pub fn validate(&self) -> Result<()> {
        if let TailPrior::PolynomialTail { alpha, c } = *self {
            if !(alpha > 0.0) || !(c > 0.0) {
                return Err(Error::Config(format!(
                    "tail prior needs alpha, c > 0 (got {alpha}, {c})"
                )));
            }
        }
        Ok(())
    }

    fn params(&self) -> (f64, f64) {
        match *self {
            TailPrior::Uniform => (1.0, 1.0),
            TailPrior::PolynomialTail { alpha, c } => (alpha, c),
        }
    }

    /// Tail exponent α.
    pub fn exponent(&self) -> f64 {
        self.params().0
    }

    /// `p(y) = Pr(X >= 1 - y)`.
    pub fn tail(&self, y: f64) -> f64 {
        let (alpha, c) = self.params();
        if y <= 0.0 {
            0.0
        } else if y >= 1.0 {
            1.0
        } else {
            (c * y.powf(alpha)).min(1.0)
        }
    }

    /// `∫_0^y p(s) ds` in closed form.
    pub fn integrated_tail(&self, y: f64) -> f64 {
        let (alpha, c) = self.params();
        let y = y.clamp(0.0, 1.0);
        // p saturates at 1 from s* = c^{-1/α} on.
        let knee = c.powf(-1.0 / alpha).min(1.0);
        let power = |s: f64| c * s.powf(alpha + 1.0) / (alpha + 1.0);
        if y <= knee {
            power(y)
        } else {
            power(knee) + (y - knee)
        }
    }

    /// `E[(X - z)^+] = ∫_0^{1-z} p(s) ds`, extended linearly below 0.
    pub fn tail_value(&self, z: f64) -> f64 {
        if z >= 1.0 {
            0.0
        } else if z >= 0.0 {
            self.integrated_tail(1.0 - z)
        } else {
            self.integrated_tail(1.0) - z
        }
    }

    /// Draws `X` by inversion: `X = max(1 - (U / c)^{1/α}, 0)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (alpha, c) = self.params();
        let u: f64 = rng.random();
        match self {
            TailPrior::Uniform => 1.0 - u,
            TailPrior::PolynomialTail { .. } => (1.0 - (u / c).powf(1.0 / alpha)).max(0.0),
        }
    }
}

/// Outcome of one reservation-policy run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirRunResult {
    pub regret: f64,
    pub inspections: u64,
    pub best_found: f64,
}

/// Threshold policy at level `1 - y` over `horizon` rounds.
///
/// Fresh arms are inspected until one reaches `1 - y`; afterwards the best
/// observed arm is played. With `override_rate = Some(ε)` a fresh inspection
/// only happens on override rounds (probability ε) and other rounds play the
/// best arm seen so far; the very first round always inspects, since there is
/// nothing to play yet. Each round costs `1 - X` of the arm played.
pub fn reservation_policy_run<R: Rng + ?Sized>(
    prior: &TailPrior,
    y: f64,
    horizon: u64,
    override_rate: Option<f64>,
    rng: &mut R,
) -> Result<ReservoirRunResult> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!(
            "threshold gap y must lie in (0, 1), got {y}"
        )));
    }
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    if let Some(eps) = override_rate {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Domain(format!(
                "override rate must lie in (0, 1], got {eps}"
            )));
        }
    }
    let target = 1.0 - y;
    let mut regret = 0.0;
    let mut inspections = 0u64;
    let mut best = f64::NEG_INFINITY;
    let mut t = 0u64;
    while t < horizon {
        if best >= target {
            regret += (horizon - t) as f64 * (1.0 - best);
            break;
        }
        // Rounds spent on the current best arm before the next inspection.
        let wait = match override_rate {
            Some(eps) if inspections > 0 && eps < 1.0 => {
                let u: f64 = rng.random();
                ((1.0 - u).ln() / (1.0 - eps).ln())
                    .floor()
                    .min((horizon - t) as f64) as u64
            }
            _ => 0,
        };
        if wait > 0 {
            regret += wait as f64 * (1.0 - best);
            t += wait;
        }
        if t >= horizon {
            break;
        }
        let x = prior.sample(rng);
        inspections += 1;
        regret += 1.0 - x;
        best = best.max(x);
        t += 1;
    }
    Ok(ReservoirRunResult {
        regret,
        inspections,
        best_found: best.max(0.0),
    })
}

/// Gate price matching threshold `1 - y`: `L · ∫_0^y p(s) ds`.
pub fn horizon_price(prior: &TailPrior, y: f64, cap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!("y must lie in [0, 1], got {y}")));
    }
    Ok(cap * prior.integrated_tail(y))
}

/// Threshold gap `y_T = (ε T)^{-1/(α+1)}` (ε = 1 when unthrottled).
pub fn horizon_gap(prior: &TailPrior, horizon: u64, override_rate: Option<f64>) -> f64 {
    let eff = horizon as f64 * override_rate.unwrap_or(1.0);
    eff.powf(-1.0 / (prior.exponent() + 1.0)).min(0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRatePoint {
    pub horizon: u64,
    pub gap: f64,
    pub mean_regret: f64,
    pub std_error: f64,
    pub mean_inspections: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRateFit {
    pub points: Vec<TailRatePoint>,
    pub slope: f64,
    pub slope_std_error: f64,
    pub intercept: f64,
}

/// Runs the horizon-priced threshold policy at each horizon and fits the
/// least-squares slope of `log mean regret` against `log T`.
pub fn tail_rate_experiment(
    prior: &TailPrior,
    horizons: &[u64],
    seeds: u64,
    override_rate: Option<f64>,
    base_seed: u64,
) -> Result<TailRateFit> {
    prior.validate()?;
    let lo = horizons.iter().copied().min().unwrap_or(0);
    let hi = horizons.iter().copied().max().unwrap_or(0);
    if horizons.len() < 2 || lo == 0 || (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::Config(
            "tail-rate fit needs horizons spanning at least two decades".into(),
        ));
    }
    if seeds == 0 {
        return Err(Error::Config("need at least one seed".into()));
    }
    let mut points = Vec::with_capacity(horizons.len());
    for (ci, &horizon) in horizons.iter().enumerate() {
        let gap = horizon_gap(prior, horizon, override_rate);
        let runs: Vec<ReservoirRunResult> = (0..seeds)
            .into_par_iter()
            .map(|seed_index| {
                let mut rng = StreamKey {
                    base_seed,
                    agent: "reservation",
                    condition: ci as u64,
                    seed_index,
                    role: Role::Env,
                }
                .rng();
                reservation_policy_run(prior, gap, horizon, override_rate, &mut rng)
            })
            .collect::<Result<_>>()?;
        let regrets: Vec<f64> = runs.iter().map(|r| r.regret).collect();
        let (mean, se) = crate::harness::stats::mean_and_se(&regrets);
        let mean_inspections =
            runs.iter().map(|r| r.inspections as f64).sum::<f64>() / runs.len() as f64;
        points.push(TailRatePoint {
            horizon,
            gap,
            mean_regret: mean,
            std_error: se,
            mean_inspections,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.horizon as f64).ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|p| p.mean_regret.max(f64::MIN_POSITIVE).ln())
        .collect();
    let fit = crate::harness::stats::ols(&xs, &ys);
    Ok(TailRateFit {
        points,
        slope: fit.slope,
        slope_std_error: fit.slope_std_error,
        intercept: fit.intercept,
    })
}
