//! Executable property and oracle suite with a machine-readable report.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    output, run_one, run_one_observed, run_sweep, thread_pool, AgentSpec, EnvSpec, ExperimentSpec,
    SweepSpec,
};
use super::{LINEAR_NOISE_FLOOR, LINEAR_PRIOR_PRECISION};
use crate::agents::{Agent, EpsilonSchedule, Policy};
use crate::delight::{act, argmax, reservation_index, uniform_tail_value, Branch, DelightConfig};
use crate::env::BernoulliEnv;
use crate::error::Result;
use crate::posterior::{gaussian_ei, BetaPosterior};
use crate::quad::adaptive_simpson;
use crate::reservoir::{horizon_price, TailPrior};
use crate::rng::{seeded, Role, StreamKey};
use crate::special::{ln_gamma, reg_inc_beta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seeds: u64,
    pub base_seed: u64,
    /// Monte Carlo draws for the Gaussian EI check.
    pub mc_samples: u64,
    /// Replace the gate `delight >= λ` by `delight < λ` in the floor check.
    pub inject_gate_flip: bool,
    pub delight: DelightConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seeds: 5,
            base_seed: 0,
            mc_samples: 1_000_000,
            inject_gate_flip: false,
            delight: DelightConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    /// Pass iff `measured <= limit`, unless `detail` says otherwise.
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBudgetRow {
    pub run_id: String,
    pub gated_overrides: u64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub properties: Vec<PropertyResult>,
    pub linear_budgets: Vec<LinearBudgetRow>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

fn at_most(name: &str, measured: f64, limit: f64, detail: impl Into<String>) -> PropertyResult {
    PropertyResult {
        name: name.into(),
        pass: measured <= limit,
        measured,
        limit,
        detail: detail.into(),
    }
}

/// `2γ_T / min{1, λ²/(L²σ²)}` with `γ_T = d·ln(1 + T/(ησ²d))`.
pub fn linear_override_budget(
    dim: usize,
    horizon: u64,
    prior_precision: f64,
    noise_var: f64,
    cfg: &DelightConfig,
) -> f64 {
    let d = dim as f64;
    let gamma = d * (1.0 + horizon as f64 / (prior_precision * noise_var * d)).ln();
    let per_round = (cfg.gate_price * cfg.gate_price
        / (cfg.surprisal_cap * cfg.surprisal_cap * noise_var))
        .min(1.0);
    2.0 * gamma / per_round
}

/// `⌈L/(2λΔ)⌉`.
pub fn post_separation_budget(cfg: &DelightConfig, gap: f64) -> u64 {
    (cfg.surprisal_cap / (2.0 * cfg.gate_price * gap)).ceil() as u64
}

pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut properties = Vec::new();
    properties.extend(bernoulli_invariants(opts)?);
    properties.push(separation_budget(opts)?);
    let (linear, rows) = linear_budget(opts)?;
    properties.push(linear);
    properties.extend(thermostat(opts)?);
    properties.extend(numerical_oracles(opts));
    properties.push(reservation_equivalence(opts));
    properties.extend(pipeline(opts)?);
    let pass = properties.iter().all(|p| p.pass) && rows.iter().all(|r| r.pass);
    Ok(VerifyReport {
        properties,
        linear_budgets: rows,
        pass,
    })
}

fn bandit_spec(
    name: &str,
    env: EnvSpec,
    horizon: u64,
    opts: &VerifyOptions,
    condition: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        env,
        horizon,
        seeds: opts.seeds,
        base_seed: opts.base_seed,
        condition,
        cold_start: false,
    }
}

/// Fresh-arm shutoff, gate-empty ⇒ host, and the gated EI floor, on every
/// round of DE runs at K ∈ {10, 100, 1000}.
fn bernoulli_invariants(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let cfg = opts.delight;
    let agent = AgentSpec::Delight(cfg);
    let v_off = cfg.fresh_arm_threshold();
    let floor = cfg.gate_price / cfg.surprisal_cap;
    let (mut rounds, mut above, mut shutoff, mut host_mismatch) = (0u64, 0u64, 0u64, 0u64);
    let (mut floor_bad, mut gated_rounds) = (0u64, 0u64);
    for (c, &k) in [10usize, 100, 1000].iter().enumerate() {
        let spec = bandit_spec(
            "invariants",
            EnvSpec::Bernoulli { arms: k },
            1000,
            opts,
            c as u64,
        );
        for seed in 0..opts.seeds {
            run_one_observed(&spec, &agent, seed, |view| {
                let Some(gate) = &view.selection.gate else {
                    return;
                };
                rounds += 1;
                let pulls = view.agent.pulls();
                if v_off.is_some_and(|vo| gate.baseline > vo) {
                    above += 1;
                    if gate.gated.iter().any(|&a| pulls[a] == 0) {
                        shutoff += 1;
                    }
                }
                let acting = gate.acting_distribution(view.selection.epsilon);
                let same = acting == gate.host;
                if gate.gate_is_empty() != same
                    && (gate.gate_is_empty() || view.selection.epsilon > 0.0)
                {
                    host_mismatch += 1;
                }
                if view.selection.gated_override() {
                    gated_rounds += 1;
                    if gate.ei[view.selection.action] < floor {
                        floor_bad += 1;
                    }
                }
            })?;
        }
    }
    let floor_result = if opts.inject_gate_flip {
        let (bad, total) = flipped_gate_floor(opts)?;
        at_most(
            "gated_floor",
            bad as f64,
            0.0,
            format!("fault injected (gate flipped): {bad} of {total} gated overrides below EI >= lambda/L"),
        )
    } else {
        at_most(
            "gated_floor",
            floor_bad as f64,
            0.0,
            format!("{floor_bad} of {gated_rounds} gated overrides below EI >= lambda/L"),
        )
    };
    Ok(vec![
        at_most(
            "fresh_arm_shutoff",
            shutoff as f64,
            0.0,
            format!("rounds with an untried arm gated, over {above} of {rounds} rounds with v_t > v_off"),
        ),
        at_most(
            "gate_empty_is_host",
            host_mismatch as f64,
            0.0,
            format!("rounds where (gate empty) != (acting distribution == host), over {rounds} rounds"),
        ),
        floor_result,
    ])
}

/// DE loop with the gate inequality reversed; returns (floor violations,
/// gated override rounds).
fn flipped_gate_floor(opts: &VerifyOptions) -> Result<(u64, u64)> {
    let cfg = opts.delight;
    let floor = cfg.gate_price / cfg.surprisal_cap;
    let (mut bad, mut total) = (0, 0);
    for seed in 0..opts.seeds {
        let key = |role| StreamKey {
            base_seed: opts.base_seed,
            agent: "flipped",
            condition: 0,
            seed_index: seed,
            role,
        };
        let mut env_rng = key(Role::Env).rng();
        let mut rng = key(Role::Agent).rng();
        let env = BernoulliEnv::sample(100, &mut env_rng)?;
        let mut agent = Agent::bernoulli(Policy::Delight(cfg), 100)?;
        for t in 0..1000 {
            let d = agent.delight_decision(&cfg);
            let gated: Vec<usize> = (0..d.delight.len())
                .filter(|&a| d.delight[a] < cfg.gate_price)
                .collect();
            let mut over = vec![0.0; d.delight.len()];
            for &a in &gated {
                over[a] = 1.0 / gated.len() as f64;
            }
            let override_dist = if gated.is_empty() {
                d.host.clone()
            } else {
                over
            };
            let acted = act(&d.host, &override_dist, cfg.epsilon(t), &mut rng);
            if acted.branch == Branch::Override && !gated.is_empty() {
                total += 1;
                if d.ei[acted.action] < floor {
                    bad += 1;
                }
            }
            let (reward, _) = env.step(acted.action, &mut env_rng)?;
            agent.update(acted.action, reward)?;
        }
    }
    Ok((bad, total))
}

/// Gated overrides of arm `a` on rounds where `m_best - m_a >= Δ_a/2`, against
/// `⌈L/(2λΔ_a)⌉`, with cold start on.
fn separation_budget(opts: &VerifyOptions) -> Result<PropertyResult> {
    let cfg = opts.delight;
    let agent = AgentSpec::Delight(cfg);
    let mut worst: f64 = 0.0;
    let mut counted = 0u64;
    for (c, &k) in [5usize, 20].iter().enumerate() {
        let mut spec = bandit_spec(
            "separation",
            EnvSpec::Bernoulli { arms: k },
            2000,
            opts,
            c as u64,
        );
        spec.cold_start = true;
        for seed in 0..opts.seeds {
            let mut counts = vec![0u64; k];
            let mut means_seen: Vec<f64> = Vec::new();
            run_one_observed(&spec, &agent, seed, |view| {
                if means_seen.is_empty() {
                    means_seen = view.means.to_vec();
                }
                if !view.selection.gated_override() {
                    return;
                }
                let best = argmax(view.means);
                let a = view.selection.action;
                let gap = view.means[best] - view.means[a];
                if a == best || gap <= 0.0 {
                    return;
                }
                let m = view.agent.posterior_means();
                if m[best] - m[a] >= gap / 2.0 {
                    counts[a] += 1;
                }
            })?;
            let best = argmax(&means_seen);
            for a in 0..k {
                let gap = means_seen[best] - means_seen[a];
                if a == best || gap <= 0.0 {
                    continue;
                }
                counted += counts[a];
                worst = worst.max(counts[a] as f64 / post_separation_budget(&cfg, gap) as f64);
            }
        }
    }
    Ok(at_most(
        "post_separation_budget",
        worst,
        1.0,
        format!(
            "max over arms of count / ceil(L/(2 lambda gap)); {counted} separated gated selections"
        ),
    ))
}

fn linear_budget(opts: &VerifyOptions) -> Result<(PropertyResult, Vec<LinearBudgetRow>)> {
    let cfg = opts.delight;
    let agent = AgentSpec::Delight(cfg);
    let horizon = 1000;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut c = 0;
    for &dim in &[2usize, 10] {
        for &noise in &[0.1, 1.0] {
            let spec = bandit_spec(
                "linear_budget",
                EnvSpec::Linear {
                    arms: 50,
                    dim,
                    noise,
                },
                horizon,
                opts,
                c,
            );
            c += 1;
            let noise_var = (noise * noise).max(LINEAR_NOISE_FLOOR);
            let bound =
                linear_override_budget(dim, horizon, LINEAR_PRIOR_PRECISION, noise_var, &cfg);
            for seed in 0..opts.seeds {
                let trace = run_one(&spec, &agent, seed)?;
                let n = *trace.gated_overrides.last().unwrap_or(&0);
                worst = worst.max(n as f64 / bound);
                rows.push(LinearBudgetRow {
                    run_id: trace.meta.run_id,
                    gated_overrides: n,
                    bound,
                    pass: n as f64 <= bound,
                });
            }
        }
    }
    let result = at_most(
        "linear_budget",
        worst,
        1.0,
        format!(
            "max over {} runs of gated overrides / (2 gamma_T / min(1, lambda^2/(L^2 sigma^2)))",
            rows.len()
        ),
    );
    Ok((result, rows))
}

/// K = T + 1: UCB tries a new arm every round; DE never takes a fresh arm
/// through the override once `v_t > v_off`.
fn thermostat(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let horizon = 300u64;
    let spec = bandit_spec(
        "thermostat",
        EnvSpec::Bernoulli {
            arms: horizon as usize + 1,
        },
        horizon,
        opts,
        0,
    );
    let mut ucb_short = 0u64;
    for seed in 0..opts.seeds {
        let t = run_one(&spec, &AgentSpec::Ucb, seed)?;
        ucb_short = ucb_short.max(horizon - t.fresh_arms.last().copied().unwrap_or(0));
    }
    let cfg = opts.delight;
    let v_off = cfg.fresh_arm_threshold().unwrap_or(f64::NEG_INFINITY);
    let (mut above, mut bad) = (0u64, 0u64);
    for seed in 0..opts.seeds {
        run_one_observed(&spec, &AgentSpec::Delight(cfg), seed, |view| {
            let Some(gate) = &view.selection.gate else {
                return;
            };
            if gate.baseline > v_off {
                above += 1;
                if view.selection.gated_override() && view.selection.fresh {
                    bad += 1;
                }
            }
        })?;
    }
    Ok(vec![
        at_most(
            "thermostat_ucb_fresh",
            ucb_short as f64,
            0.0,
            "rounds where UCB did not play a distinct fresh arm",
        ),
        at_most(
            "thermostat_de_no_fresh_override",
            bad as f64,
            0.0,
            format!("fresh override selections on {above} rounds with v_t > v_off"),
        ),
    ])
}

/// Beta density by log-gamma.
fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b))
        .exp()
}

fn numerical_oracles(opts: &VerifyOptions) -> Vec<PropertyResult> {
    let mut rng = seeded(opts.base_seed ^ 0x0AC1E);
    let mut ei_err: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.random_range(1.0..40.0);
        let b = rng.random_range(1.0..40.0);
        let v: f64 = rng.random();
        let quad = adaptive_simpson(|x| (x - v) * beta_pdf(a, b, x), v, 1.0, 1e-13);
        ei_err = ei_err.max((BetaPosterior::new(a, b).expected_improvement(v) - quad).abs());
    }
    let mut refl: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.random_range(0.05..60.0);
        let b = rng.random_range(0.05..60.0);
        let x: f64 = rng.random();
        let s = reg_inc_beta(a, b, x).unwrap_or(f64::NAN)
            + reg_inc_beta(b, a, 1.0 - x).unwrap_or(f64::NAN);
        refl = refl.max((s - 1.0).abs());
    }
    let mut mc_z: f64 = 0.0;
    for &(mu, s, v) in &[(0.0, 1.0, 0.0), (0.3, 0.5, 1.0), (-1.0, 2.0, 0.5)] {
        let n = opts.mc_samples;
        let mut m = super::stats::Moments::default();
        for _ in 0..n {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            m.push((mu + s * z - v).max(0.0));
        }
        mc_z = mc_z.max((m.mean - gaussian_ei(mu, s, v)).abs() / m.std_error());
    }
    let mut kg_excess = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let k = rng.random_range(2..8);
        let arms: Vec<BetaPosterior> = (0..k)
            .map(|_| BetaPosterior::new(rng.random_range(1.0..30.0), rng.random_range(1.0..30.0)))
            .collect();
        let means: Vec<f64> = arms.iter().map(BetaPosterior::mean).collect();
        let v = means[argmax(&means)];
        for a in 0..k {
            let kg = bernoulli_knowledge_gradient(&arms, a);
            kg_excess = kg_excess.max(kg - arms[a].expected_improvement(v));
        }
    }
    vec![
        at_most(
            "beta_ei_vs_quadrature",
            ei_err,
            1e-6,
            "max abs error over 1000 random posteriors",
        ),
        at_most(
            "reg_inc_beta_reflection",
            refl,
            1e-10,
            "max |I_x(a,b) + I_(1-x)(b,a) - 1|",
        ),
        at_most(
            "gaussian_ei_vs_monte_carlo",
            mc_z,
            3.0,
            format!(
                "max |MC - closed form| in standard errors, {} draws each",
                opts.mc_samples
            ),
        ),
        at_most(
            "knowledge_gradient_below_ei",
            kg_excess,
            1e-12,
            "max KG - EI over 1000 instances",
        ),
    ]
}

/// One-step value of information of pulling arm `a`, exact for Beta arms.
pub fn bernoulli_knowledge_gradient(arms: &[BetaPosterior], a: usize) -> f64 {
    let best_other = arms
        .iter()
        .enumerate()
        .filter(|&(b, _)| b != a)
        .map(|(_, p)| p.mean())
        .fold(f64::NEG_INFINITY, f64::max);
    let m = arms[a].mean();
    let now = m.max(best_other);
    let up = arms[a].updated(true).mean().max(best_other);
    let down = arms[a].updated(false).mean().max(best_other);
    (m * up + (1.0 - m) * down - now).max(0.0)
}

/// The gate is Pandora eligibility: `surp·EI(v) >= λ` iff `v <=` the
/// reservation index, away from the boundary. Also checks the horizon price
/// maps back to its threshold.
fn reservation_equivalence(opts: &VerifyOptions) -> PropertyResult {
    let mut rng = seeded(opts.base_seed ^ 0x9A4D);
    let mut mismatches = 0u64;
    for _ in 0..500 {
        let p = BetaPosterior::new(rng.random_range(1.0..20.0), rng.random_range(1.0..20.0));
        let surp = rng.random_range(0.1..10.0);
        let price = rng.random_range(0.001..0.5);
        let z = reservation_index(|v| p.expected_improvement(v), surp, price, (0.0, 1.0));
        for _ in 0..20 {
            let v: f64 = rng.random();
            if (v - z).abs() < 1e-9 {
                continue;
            }
            if (surp * p.expected_improvement(v) >= price) != (v <= z) {
                mismatches += 1;
            }
        }
    }
    for y in [0.01, 0.05, 0.2, 0.6] {
        let price = horizon_price(&TailPrior::Uniform, y, 10.0).unwrap_or(f64::NAN);
        let z = reservation_index(uniform_tail_value, 10.0, price, (0.0, 1.0));
        if !((z - (1.0 - y)).abs() < 1e-8) {
            mismatches += 1;
        }
    }
    at_most(
        "gate_is_pandora_eligibility",
        mismatches as f64,
        0.0,
        "gate vs reservation-index disagreements",
    )
}

/// Determinism across thread counts, trace monotonicity and aggregation
/// recomputation from raw CSV.
fn pipeline(opts: &VerifyOptions) -> Result<Vec<PropertyResult>> {
    let sweep = SweepSpec {
        name: "verify".into(),
        conditions: vec![
            EnvSpec::Bernoulli { arms: 10 },
            EnvSpec::Linear {
                arms: 20,
                dim: 3,
                noise: 1.0,
            },
            EnvSpec::DeepSea {
                size: 4,
                concentration: None,
            },
        ],
        agents: vec![
            AgentSpec::Delight(opts.delight),
            AgentSpec::EpsGreedy(EpsilonSchedule::Annealed {
                half_life: opts.delight.half_life,
            }),
        ],
        horizon: 200,
        seeds: opts.seeds.max(2),
        base_seed: opts.base_seed,
        cold_start: false,
    };
    let one = thread_pool(1)?.install(|| run_sweep(&sweep))?;
    let two = thread_pool(2)?.install(|| run_sweep(&sweep))?;
    let det = at_most(
        "bit_determinism",
        f64::from(u8::from(one != two)),
        0.0,
        "sweep results differ between 1 and 2 worker threads",
    );
    let mut non_monotone = 0u64;
    for c in 0..sweep.conditions.len() {
        let spec = sweep.experiment(c);
        for agent in &sweep.agents {
            for seed in 0..sweep.seeds {
                if !run_one(&spec, agent, seed)?.is_monotone() {
                    non_monotone += 1;
                }
            }
        }
    }
    let mono = at_most(
        "trace_monotone",
        non_monotone as f64,
        0.0,
        "traces with a decreasing cumulative regret",
    );
    let mut buf = Vec::new();
    output::write_csv(&one.runs, &mut buf)?;
    let rows = output::read_csv(buf.as_slice())?;
    let gap = output::aggregation_gap(&one.summary, &rows)?;
    let agg = at_most(
        "aggregation_recompute",
        gap,
        1e-12,
        "max |summary - recomputed from raw CSV|",
    );
    Ok(vec![det, mono, agg])
}
