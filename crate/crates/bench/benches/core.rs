use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use delight_core::harness::{run_one, AgentSpec, EnvSpec, ExperimentSpec};
use delight_core::mdp::deepsea_posterior;
use delight_core::rng::seeded;
use delight_core::special::reg_inc_beta;
use delight_core::{Agent, BetaPosterior, DeepSeaEnv, DelightConfig, Policy};

fn special(c: &mut Criterion) {
    c.bench_function("reg_inc_beta(30.5, 12.25, 0.7)", |b| {
        b.iter(|| reg_inc_beta(black_box(30.5), black_box(12.25), black_box(0.7)))
    });
    let p = BetaPosterior::new(12.0, 30.0);
    c.bench_function("beta_ei", |b| {
        b.iter(|| black_box(p).expected_improvement(black_box(0.4)))
    });
}

fn gate(c: &mut Criterion) {
    let mut group = c.benchmark_group("de_decision");
    for k in [10usize, 100, 1000] {
        let mut agent = Agent::bernoulli(Policy::Delight(DelightConfig::default()), k).unwrap();
        let mut rng = seeded(1);
        // Some history so arms differ.
        for _ in 0..200 {
            let a = agent.select(&mut rng).action;
            agent
                .update(a, f64::from(u8::from(a.is_multiple_of(3))))
                .unwrap();
        }
        group.bench_with_input(BenchmarkId::from_parameter(k), &agent, |b, agent| {
            b.iter(|| agent.delight_decision(&DelightConfig::default()))
        });
    }
    group.finish();
}

fn planning(c: &mut Criterion) {
    let mut group = c.benchmark_group("deepsea_plan_mean");
    for n in [10usize, 30] {
        let env = DeepSeaEnv::sample(n, &mut seeded(2)).unwrap();
        let post = deepsea_posterior(&env, 1.0 / env.num_states() as f64).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &post, |b, post| {
            b.iter(|| post.plan_mean(n))
        });
    }
    group.finish();
}

fn runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_one");
    group.sample_size(10);
    let spec = |env| ExperimentSpec {
        name: "bench".into(),
        env,
        horizon: 1000,
        seeds: 1,
        base_seed: 0,
        condition: 0,
        cold_start: false,
    };
    let de = AgentSpec::Delight(DelightConfig::default());
    let bern = spec(EnvSpec::Bernoulli { arms: 1000 });
    group.bench_function("de_bernoulli_k1000", |b| {
        b.iter(|| run_one(&bern, &de, 0).unwrap())
    });
    group.bench_function("ts_bernoulli_k1000", |b| {
        b.iter(|| run_one(&bern, &AgentSpec::Thompson, 0).unwrap())
    });
    let lin = spec(EnvSpec::Linear {
        arms: 100,
        dim: 30,
        noise: 1.0,
    });
    group.bench_function("de_linear_d30", |b| {
        b.iter(|| run_one(&lin, &de, 0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, special, gate, planning, runs);
criterion_main!(benches);
