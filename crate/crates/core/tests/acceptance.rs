//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Built with `harness = false`.

mod common;

use std::ops::Range;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{beta_ei_oracle, mean_se};
use delight_core::harness::config::Config;
use delight_core::harness::necessity::{necessity_demos, NecessityConfig, DE_SLOPE_LIMIT};
use delight_core::harness::stats::mean_and_se;
use delight_core::harness::verify::{
    bernoulli_knowledge_gradient, linear_override_budget, verify, VerifyOptions,
};
use delight_core::harness::{
    run_one_observed, run_sweep, RoundView, LINEAR_NOISE_FLOOR, LINEAR_PRIOR_PRECISION,
};
use delight_core::posterior::gaussian_ei;
use delight_core::reservoir::{tail_rate_experiment, TailPrior};
use delight_core::rng::seeded;
use delight_core::special::reg_inc_beta;
use delight_core::{AgentSpec, BetaPosterior, DelightConfig, Result, SweepSpec, SweepSummary};
use rand::Rng;
use rand_distr::StandardNormal;

const BASE_SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Final-regret mean and standard error of one agent in one condition.
#[derive(Clone, Copy)]
struct Cell {
    mean: f64,
    se: f64,
}

impl Cell {
    fn from_summary(summary: &SweepSummary, condition: u64, agent: &str) -> Self {
        let row = summary.row(condition, agent).expect("baseline row");
        Cell {
            mean: row.final_mean,
            se: row.final_std_error,
        }
    }

    /// Strictly lower, with disjoint ±1 s.e. intervals.
    fn clearly_below(self, other: Cell) -> bool {
        self.mean + self.se < other.mean - other.se
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.1} ± {:.1}", self.mean, self.se)
    }
}

/// Per-round structural checks on instrumented DE bandit runs.
#[derive(Default)]
struct Invariants {
    rounds: u64,
    above_off: u64,
    shutoff_violations: u64,
    host_mismatches: u64,
    gated_rounds: u64,
    floor_violations: u64,
    /// (gated override rounds, budget) per linear run.
    linear: Vec<(u64, f64)>,
}

impl Invariants {
    fn observe(&mut self, cfg: &DelightConfig, bernoulli: bool, view: &RoundView) {
        let Some(gate) = &view.selection.gate else {
            return;
        };
        self.rounds += 1;
        if bernoulli {
            if let Some(v_off) = cfg.fresh_arm_threshold() {
                if gate.baseline > v_off {
                    self.above_off += 1;
                    let pulls = view.agent.pulls();
                    if gate.gated.iter().any(|&a| pulls[a] == 0) {
                        self.shutoff_violations += 1;
                    }
                }
            }
        }
        let eps = view.selection.epsilon;
        let acting = gate.acting_distribution(eps);
        let empty = gate.gate_is_empty();
        // With ε > 0 a non-empty gate always moves mass off the host.
        if (empty && acting != gate.host) || (!empty && eps > 0.0 && acting == gate.host) {
            self.host_mismatches += 1;
        }
        if view.selection.gated_override() {
            self.gated_rounds += 1;
            if gate.ei[view.selection.action] < cfg.gate_price / cfg.surprisal_cap {
                self.floor_violations += 1;
            }
        }
    }
}

/// Splits a sweep into its DE agent and a sweep of the remaining baselines.
/// Condition indices are unchanged, so both see the same instances.
fn split(spec: &SweepSpec) -> (DelightConfig, AgentSpec, SweepSpec) {
    let de = *spec
        .agents
        .iter()
        .find(|a| a.name() == "de")
        .expect("sweep has a DE agent");
    let AgentSpec::Delight(cfg) = de else {
        unreachable!()
    };
    let mut rest = spec.clone();
    rest.agents.retain(|a| a.name() != "de");
    (cfg, de, rest)
}

/// Runs DE on `conditions` of `spec` with every round checked.
fn instrumented_de(
    spec: &SweepSpec,
    conditions: Range<usize>,
    inv: &mut Invariants,
) -> Result<Vec<Cell>> {
    let (cfg, de, _) = split(spec);
    let mut cells = Vec::new();
    for c in conditions {
        let exp = spec.experiment(c);
        let bernoulli = exp.env.family() == "bernoulli";
        let mut finals = Vec::new();
        for seed in 0..spec.seeds {
            let trace =
                run_one_observed(&exp, &de, seed, |view| inv.observe(&cfg, bernoulli, view))?;
            finals.push(trace.final_regret());
            if let (Some(dim), Some(noise)) = (exp.env.dim(), exp.env.noise()) {
                let noise_var = (noise * noise).max(LINEAR_NOISE_FLOOR);
                let budget = linear_override_budget(
                    dim,
                    spec.horizon,
                    LINEAR_PRIOR_PRECISION,
                    noise_var,
                    &cfg,
                );
                inv.linear
                    .push((*trace.gated_overrides.last().unwrap_or(&0), budget));
            }
        }
        let (mean, se) = mean_and_se(&finals);
        cells.push(Cell { mean, se });
    }
    Ok(cells)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn criteria_1_2(inv: &mut Invariants) -> Result<(Outcome, Outcome)> {
    let spec = Config::default().bandit.sweep("bernoulli", BASE_SEED)?;
    let (_, _, rest) = split(&spec);
    let mut small_rest = rest.clone();
    small_rest.conditions.truncate(1);

    // K = 10 on its own, for the small-world runtime budget.
    let (res, t_small) = timed(|| -> Result<_> {
        Ok((instrumented_de(&spec, 0..1, inv)?, run_sweep(&small_rest)?))
    });
    let (de_small, base_small) = res?;
    let ts10 = Cell::from_summary(&base_small.summary, 0, "ts");
    let ratio = de_small[0].mean / ts10.mean;
    let c1 = Outcome {
        pass: ratio <= 1.5 && t_small < Duration::from_secs(60),
        detail: format!(
            "K=10, T={}, {} seeds: DE {} vs TS {ts10}, ratio {ratio:.2} <= 1.5; {:.1}s < 60s",
            spec.horizon,
            spec.seeds,
            de_small[0],
            secs(t_small)
        ),
    };

    // The baseline sweep reruns K = 10 so that condition indices line up.
    let (res, t_large) =
        timed(|| -> Result<_> { Ok((instrumented_de(&spec, 1..3, inv)?, run_sweep(&rest)?)) });
    let (de_large, base) = res?;
    let (de100, de1000) = (de_large[0], de_large[1]);
    let ts = Cell::from_summary(&base.summary, 2, "ts");
    let eg = Cell::from_summary(&base.summary, 2, "eps_greedy");
    let total = t_small + t_large;
    let growth = de1000.mean / de100.mean;
    let c2 = Outcome {
        pass: de1000.clearly_below(ts)
            && de1000.clearly_below(eg)
            && growth <= 2.0
            && spec.seeds >= 50
            && total < Duration::from_secs(600),
        detail: format!(
            "K=1000, {} seeds: DE {de1000} vs TS {ts}, eps-greedy {eg} (disjoint ±1 s.e.); DE K=1000 / K=100 = {growth:.2} <= 2; {:.1}s < 600s",
            spec.seeds,
            secs(total)
        ),
    };
    Ok((c1, c2))
}

fn criterion_3(inv: &mut Invariants) -> Result<Outcome> {
    let mut section = Config::default().linear;
    section.arms = vec![100];
    section.dims = vec![30];
    section.noises = vec![1.0];
    section.seeds = 50;
    let spec = section.sweep("linear", BASE_SEED)?;
    let (_, _, rest) = split(&spec);
    let (res, t) =
        timed(|| -> Result<_> { Ok((instrumented_de(&spec, 0..1, inv)?, run_sweep(&rest)?)) });
    let (de, base) = res?;
    let ts = Cell::from_summary(&base.summary, 0, "ts");
    let eg = Cell::from_summary(&base.summary, 0, "eps_greedy");
    Ok(Outcome {
        pass: de[0].clearly_below(ts) && de[0].clearly_below(eg) && t < Duration::from_secs(600),
        detail: format!(
            "D=30, K=100, sigma=1, {} seeds: DE {} vs TS {ts}, eps-greedy {eg} (disjoint ±1 s.e.); {:.1}s < 600s",
            spec.seeds,
            de[0],
            secs(t)
        ),
    })
}

fn criterion_4() -> Result<Outcome> {
    let spec = Config::default().deepsea.sweep("deepsea", BASE_SEED)?;
    let (res, t) = timed(|| run_sweep(&spec));
    let summary = res?.summary;
    let de = Cell::from_summary(&summary, 0, "de");
    let psrl = Cell::from_summary(&summary, 0, "psrl");
    let eg = Cell::from_summary(&summary, 0, "eps_greedy");
    let (r_psrl, r_eg) = (de.mean / psrl.mean, de.mean / eg.mean);
    Ok(Outcome {
        pass: r_psrl <= 1.2 && r_eg <= 0.3 && t < Duration::from_secs(900),
        detail: format!(
            "H=10, {} episodes, {} seeds: DE {de}, PSRL {psrl}, eps-greedy {eg}; DE/PSRL {r_psrl:.2} <= 1.2, DE/eps-greedy {r_eg:.2} <= 0.3; {:.1}s < 900s",
            spec.horizon,
            spec.seeds,
            secs(t)
        ),
    })
}

fn criterion_5() -> Result<Outcome> {
    let horizons = [1_000, 10_000, 100_000, 1_000_000];
    let (res, t) = timed(|| -> Result<_> {
        let uniform = tail_rate_experiment(&TailPrior::Uniform, &horizons, 200, None, BASE_SEED)?;
        let poly = tail_rate_experiment(
            &TailPrior::PolynomialTail { alpha: 2.0, c: 1.0 },
            &horizons,
            200,
            None,
            BASE_SEED,
        )?;
        Ok((uniform, poly))
    });
    let (uniform, poly) = res?;
    Ok(Outcome {
        pass: (0.4..=0.6).contains(&uniform.slope) && (0.57..=0.77).contains(&poly.slope) && t < Duration::from_secs(300),
        detail: format!(
            "uniform slope {:.3} ± {:.3} in [0.4, 0.6]; alpha=2 slope {:.3} ± {:.3} in [0.57, 0.77]; {:.1}s < 300s",
            uniform.slope,
            uniform.slope_std_error,
            poly.slope,
            poly.slope_std_error,
            secs(t)
        ),
    })
}

fn criterion_6(inv: &Invariants) -> Result<Outcome> {
    let report = verify(&VerifyOptions {
        base_seed: BASE_SEED,
        ..VerifyOptions::default()
    })?;
    let prop = |name: &str| {
        report
            .property(name)
            .unwrap_or_else(|| panic!("missing property {name}"))
    };
    let separation = prop("post_separation_budget");
    let ucb = prop("thermostat_ucb_fresh");
    let de_thermo = prop("thermostat_de_no_fresh_override");
    let linear_max = inv.linear.iter().map(|&(n, _)| n).max().unwrap_or(0);
    let linear_bound = inv
        .linear
        .iter()
        .map(|&(_, b)| b)
        .fold(f64::INFINITY, f64::min);
    let linear_ok = !inv.linear.is_empty() && inv.linear.iter().all(|&(n, b)| n as f64 <= b);
    let pass = inv.rounds > 0
        && inv.above_off > 0
        && inv.shutoff_violations == 0
        && inv.host_mismatches == 0
        && inv.gated_rounds > 0
        && inv.floor_violations == 0
        && linear_ok
        && separation.pass
        && ucb.pass
        && de_thermo.pass;
    Ok(Outcome {
        pass,
        detail: format!(
            "shutoff {} violations over {} rounds above v_off; gate-empty/host {} mismatches over {} rounds; floor {} of {} gated overrides; linear budget max {linear_max} <= {linear_bound:.0} over {} runs; post-separation max ratio {:.3}; thermostat UCB {} / DE {}",
            inv.shutoff_violations,
            inv.above_off,
            inv.host_mismatches,
            inv.rounds,
            inv.floor_violations,
            inv.gated_rounds,
            inv.linear.len(),
            separation.measured,
            if ucb.pass { "ok" } else { "failed" },
            if de_thermo.pass { "ok" } else { "failed" },
        ),
    })
}

fn criterion_7() -> Outcome {
    let mut rng = seeded(700);
    let mut beta_err: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.random_range(1.0..101.0);
        let b = rng.random_range(1.0..101.0);
        let v: f64 = rng.random();
        beta_err = beta_err.max(
            (BetaPosterior::new(a, b).expected_improvement(v) - beta_ei_oracle(a, b, v)).abs(),
        );
    }

    let (mu, s, v) = (0.2, 0.7, 0.5);
    let (mc, mc_se, _) = mean_se((0..10_000_000).map(|_| {
        let z: f64 = rng.sample(StandardNormal);
        (mu + s * z - v).max(0.0)
    }));
    let exact = gaussian_ei(mu, s, v);
    let gauss_ok = (mc - exact).abs() <= 3.0 * mc_se;

    let mut refl: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.random_range(0.05..200.0);
        let b = rng.random_range(0.05..200.0);
        let x: f64 = rng.random();
        let sum = reg_inc_beta(a, b, x).unwrap_or(f64::NAN)
            + reg_inc_beta(b, a, 1.0 - x).unwrap_or(f64::NAN);
        refl = refl.max((sum - 1.0).abs());
    }

    // Gaussian arms, KG by Monte Carlo.
    let mut kg_bad = 0;
    for _ in 0..1000 {
        let k = rng.random_range(2..6);
        let mu: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sd: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.5)).collect();
        let noise = rng.random_range(0.1..2.0f64);
        let a = rng.random_range(0..k);
        let v = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let other = (0..k)
            .filter(|&b| b != a)
            .map(|b| mu[b])
            .fold(f64::NEG_INFINITY, f64::max);
        let spread = sd[a] * sd[a] / (sd[a] * sd[a] + noise * noise).sqrt();
        let (kg, se, _) = mean_se((0..4000).map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (mu[a] + spread * z).max(other) - mu[a].max(other)
        }));
        if kg > gaussian_ei(mu[a], sd[a], v) + 3.0 * se {
            kg_bad += 1;
        }
    }
    // Beta arms, KG exact.
    for _ in 0..1000 {
        let k = rng.random_range(2..8);
        let arms: Vec<BetaPosterior> = (0..k)
            .map(|_| BetaPosterior::new(rng.random_range(1.0..50.0), rng.random_range(1.0..50.0)))
            .collect();
        let v = arms
            .iter()
            .map(BetaPosterior::mean)
            .fold(f64::NEG_INFINITY, f64::max);
        let a = rng.random_range(0..k);
        if bernoulli_knowledge_gradient(&arms, a) > arms[a].expected_improvement(v) + 1e-15 {
            kg_bad += 1;
        }
    }

    Outcome {
        pass: beta_err <= 1e-6 && gauss_ok && refl <= 1e-10 && kg_bad == 0,
        detail: format!(
            "beta_ei max error {beta_err:.1e} <= 1e-6; gaussian_ei {exact:.6} vs MC {mc:.6} ± {mc_se:.1e}; reflection max error {refl:.1e} <= 1e-10; KG > EI + 3 s.e. on {kg_bad} of 2000 instances"
        ),
    }
}

fn criterion_8() -> Result<Outcome> {
    let report = necessity_demos(&NecessityConfig {
        base_seed: BASE_SEED,
        ..NecessityConfig::default()
    })?;
    let parts: Vec<String> = report
        .slopes
        .iter()
        .map(|s| match s.floor {
            Some(f) => format!("{} slope {:.4} >= {:.4}", s.name, s.tail_slope, 0.5 * f),
            None => format!(
                "{} slope {:.1e} < {DE_SLOPE_LIMIT:.0e}",
                s.name, s.tail_slope
            ),
        })
        .collect();
    Ok(Outcome {
        pass: report.slopes.iter().all(|s| s.pass),
        detail: parts.join("; "),
    })
}

fn report(n: u32, outcome: Result<Outcome>) -> bool {
    let outcome = outcome.unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!("error: {e}"),
    });
    println!(
        "{} criterion {n}: {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail
    );
    outcome.pass
}

fn main() -> ExitCode {
    let mut inv = Invariants::default();
    let mut ok = true;
    match criteria_1_2(&mut inv) {
        Ok((c1, c2)) => {
            ok &= report(1, Ok(c1));
            ok &= report(2, Ok(c2));
        }
        Err(e) => {
            let msg = e.to_string();
            report(1, Err(e));
            println!("FAIL criterion 2: error: {msg}");
            ok = false;
        }
    }
    ok &= report(3, criterion_3(&mut inv));
    ok &= report(4, criterion_4());
    ok &= report(5, criterion_5());
    ok &= report(6, criterion_6(&inv));
    ok &= report(7, Ok(criterion_7()));
    ok &= report(8, criterion_8());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
