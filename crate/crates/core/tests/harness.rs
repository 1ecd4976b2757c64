use delight_core::harness::output::{aggregation_gap, read_csv, read_summary, write_sweep};
use delight_core::harness::stats::tail_slope;
use delight_core::harness::{checkpoints, run_one, run_sweep, thread_pool};
use delight_core::reservoir::{tail_rate_experiment, TailPrior};
use delight_core::{AgentSpec, DelightConfig, EnvSpec, EpsilonSchedule, ExperimentSpec, SweepSpec};

fn small_sweep() -> SweepSpec {
    SweepSpec {
        name: "smoke".into(),
        conditions: vec![
            EnvSpec::Bernoulli { arms: 5 },
            EnvSpec::Linear {
                arms: 8,
                dim: 3,
                noise: 0.5,
            },
        ],
        agents: vec![
            AgentSpec::Delight(DelightConfig::default()),
            AgentSpec::Thompson,
            AgentSpec::EpsGreedy(EpsilonSchedule::Annealed { half_life: 100.0 }),
        ],
        horizon: 300,
        seeds: 6,
        base_seed: 42,
        cold_start: false,
    }
}

#[test]
fn written_outputs_round_trip_and_aggregate() {
    let result = run_sweep(&small_sweep()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = write_sweep(&result, dir.path()).unwrap();
    let rows = read_csv(std::fs::File::open(&written.csv).unwrap()).unwrap();
    assert_eq!(rows.len(), result.runs.len() * checkpoints(300).len());
    let summary = read_summary(&written.summary).unwrap();
    assert_eq!(summary, result.summary);
    assert!(aggregation_gap(&summary, &rows).unwrap() <= 1e-12);
    let header = std::fs::read_to_string(&written.csv).unwrap();
    assert!(header.starts_with(
        "run_id,agent,env_family,K,d,sigma,H,M,lambda,L,seed,t,cumulative_regret,gated_override_count,fresh_arm_count"
    ));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let spec = small_sweep();
    let one = thread_pool(1)
        .unwrap()
        .install(|| run_sweep(&spec))
        .unwrap();
    let three = thread_pool(3)
        .unwrap()
        .install(|| run_sweep(&spec))
        .unwrap();
    assert_eq!(one, three);
}

#[test]
fn deepsea_runs_are_reproducible() {
    let spec = ExperimentSpec {
        name: "ds".into(),
        env: EnvSpec::DeepSea {
            size: 5,
            concentration: None,
        },
        horizon: 40,
        seeds: 1,
        base_seed: 3,
        condition: 0,
        cold_start: false,
    };
    for agent in [
        AgentSpec::Delight(DelightConfig::default()),
        AgentSpec::Psrl,
    ] {
        let a = run_one(&spec, &agent, 0).unwrap();
        assert_eq!(a, run_one(&spec, &agent, 0).unwrap());
        assert!(a.is_monotone());
        assert_eq!(a.horizon(), 40);
    }
}

/// Constant-rate ε-greedy keeps paying `ε · mean gap` per round forever.
#[test]
fn constant_epsilon_has_linear_regret() {
    let spec = ExperimentSpec {
        name: "floor".into(),
        env: EnvSpec::BernoulliFixed {
            means: vec![0.9, 0.1],
        },
        horizon: 20_000,
        seeds: 10,
        base_seed: 9,
        condition: 0,
        cold_start: false,
    };
    let agent = AgentSpec::EpsGreedy(EpsilonSchedule::Constant { epsilon: 0.2 });
    let mut mean = vec![0.0; 20_000];
    for seed in 0..spec.seeds {
        let trace = run_one(&spec, &agent, seed).unwrap();
        for (m, r) in mean.iter_mut().zip(&trace.cumulative_regret) {
            *m += r / spec.seeds as f64;
        }
    }
    let slope = tail_slope(&mean, 10_000);
    assert!((slope - 0.08).abs() <= 0.2 * 0.08, "slope {slope}");
}

/// Throttling inspections to rate ε costs more regret but keeps the √T rate
/// under the uniform prior.
#[test]
fn throttled_reservoir_keeps_its_rate() {
    let horizons = [1_000, 10_000, 100_000];
    let free = tail_rate_experiment(&TailPrior::Uniform, &horizons, 200, None, 5).unwrap();
    let slow = tail_rate_experiment(&TailPrior::Uniform, &horizons, 200, Some(0.1), 5).unwrap();
    assert!((free.slope - 0.5).abs() < 0.05, "free slope {}", free.slope);
    assert!(
        (slow.slope - 0.5).abs() < 0.1,
        "throttled slope {}",
        slow.slope
    );
    for (f, s) in free.points.iter().zip(&slow.points) {
        assert!(s.mean_regret > f.mean_regret);
    }
}
