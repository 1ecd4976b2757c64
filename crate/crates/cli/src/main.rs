//! `delight`: run bandit, linear, DeepSea and reservoir experiments, the
//! hyperparameter sweep, the necessity demos and the property report.
//!
//! Exit codes: 0 success, 1 configuration (or other runtime) error, 2 a
//! verification or demo check failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use delight_core::harness::config::{Config, Hyper};
use delight_core::harness::necessity::{necessity_demos, NecessityConfig};
use delight_core::harness::output::{self, TailRateSummary};
use delight_core::harness::verify::{verify, VerifyOptions};
use delight_core::harness::{
    run_sweep, thread_count, thread_pool, SweepSpec, SweepSummary, THREADS_ENV,
};
use delight_core::reservoir::{tail_rate_experiment, TailPrior};
use delight_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "delight",
    version,
    about = "Delight-gated exploration experiments"
)]
struct Cli {
    /// TOML config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads [default: $DELIGHT_THREADS, else all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    base_seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bernoulli bandits with uniform random means.
    RunBandit(BanditArgs),
    /// Linear-Gaussian bandits.
    RunLinear(LinearArgs),
    /// DeepSea.
    RunDeepsea(DeepSeaArgs),
    /// Horizon-priced reservation search on an infinite reservoir.
    RunReservoir(ReservoirArgs),
    /// DE over a grid of half-lives and gate prices.
    Sweep(TuneArgs),
    /// Greedy lock-in, constant-ε and warm-host demos against DE.
    Necessity(NecessityArgs),
    /// Property and oracle suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default)]
struct HyperArgs {
    /// Agents, comma separated (de, ts, eps_greedy, ucb, greedy, warm_host, psrl).
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<String>>,
    /// Annealing half-life M.
    #[arg(long)]
    half_life: Option<f64>,
    /// Gate price λ.
    #[arg(long)]
    gate_price: Option<f64>,
    /// Surprisal cap L.
    #[arg(long)]
    surprisal_cap: Option<f64>,
    /// Boltzmann host temperature τ.
    #[arg(long)]
    temperature: Option<f64>,
    /// Constant ε for ε-greedy.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    seeds: Option<u64>,
}

impl HyperArgs {
    fn apply(
        &self,
        hyper: &mut Hyper,
        agents: &mut Vec<String>,
        horizon: &mut u64,
        seeds: &mut u64,
    ) {
        if let Some(a) = &self.agents {
            agents.clone_from(a);
        }
        set(&mut hyper.half_life, self.half_life);
        set(&mut hyper.gate_price, self.gate_price);
        set(&mut hyper.surprisal_cap, self.surprisal_cap);
        if self.temperature.is_some() {
            hyper.temperature = self.temperature;
        }
        if self.epsilon.is_some() {
            hyper.epsilon = self.epsilon;
        }
        set(horizon, self.horizon);
        set(seeds, self.seeds);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BanditArgs {
    #[arg(long, value_delimiter = ',')]
    arms: Option<Vec<usize>>,
    /// Pull every arm once before the policy starts.
    #[arg(long)]
    cold_start: bool,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct LinearArgs {
    #[arg(long, value_delimiter = ',')]
    arms: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    noises: Option<Vec<f64>>,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct DeepSeaArgs {
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Dirichlet pseudo-count per successor state [default: 1/S].
    #[arg(long)]
    concentration: Option<f64>,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ReservoirArgs {
    /// Tail exponent α of `p(y) = c·y^α`; omit for the uniform prior.
    #[arg(long)]
    alpha: Option<f64>,
    /// Tail constant c (with --alpha).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<u64>>,
    #[arg(long)]
    seeds: Option<u64>,
    /// Constant override rate ε throttling inspections.
    #[arg(long)]
    override_rate: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct TuneArgs {
    /// bernoulli or linear.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    arms: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    half_lives: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gate_prices: Option<Vec<f64>>,
    #[command(flatten)]
    hyper: HyperArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct NecessityArgs {
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Directory for `necessity.json`; the report always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    seeds: Option<u64>,
    /// Flip the gate inequality in the floor check (the report should fail).
    #[arg(long)]
    inject_fault: bool,
    /// Monte Carlo draws for the Gaussian EI oracle.
    #[arg(long)]
    mc_samples: Option<u64>,
    /// Directory for `verify.json`; the report always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check) => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    set(&mut config.base_seed, cli.base_seed);
    let threads = thread_count(cli.threads)?;
    log::info!("{threads} worker threads ({THREADS_ENV} or --threads)");
    let pool = thread_pool(threads)?;
    pool.install(|| dispatch(cli.command, config))
}

fn dispatch(command: Command, mut config: Config) -> Result<(), Failure> {
    let seed = config.base_seed;
    match command {
        Command::RunBandit(a) => {
            let s = &mut config.bandit;
            set(&mut s.arms, a.arms);
            s.cold_start |= a.cold_start;
            a.hyper
                .apply(&mut s.hyper, &mut s.agents, &mut s.horizon, &mut s.seeds);
            sweep_and_write(&s.sweep("bandit", seed)?, &a.out.out)
        }
        Command::RunLinear(a) => {
            let s = &mut config.linear;
            set(&mut s.arms, a.arms);
            set(&mut s.dims, a.dims);
            set(&mut s.noises, a.noises);
            a.hyper
                .apply(&mut s.hyper, &mut s.agents, &mut s.horizon, &mut s.seeds);
            sweep_and_write(&s.sweep("linear", seed)?, &a.out.out)
        }
        Command::RunDeepsea(a) => {
            let s = &mut config.deepsea;
            set(&mut s.sizes, a.sizes);
            if a.concentration.is_some() {
                s.concentration = a.concentration;
            }
            a.hyper
                .apply(&mut s.hyper, &mut s.agents, &mut s.horizon, &mut s.seeds);
            sweep_and_write(&s.sweep("deepsea", seed)?, &a.out.out)
        }
        Command::RunReservoir(a) => {
            let s = &mut config.reservoir;
            if let Some(alpha) = a.alpha {
                s.prior = TailPrior::PolynomialTail { alpha, c: a.c };
            }
            set(&mut s.horizons, a.horizons);
            set(&mut s.seeds, a.seeds);
            if a.override_rate.is_some() {
                s.override_rate = a.override_rate;
            }
            let fit = tail_rate_experiment(&s.prior, &s.horizons, s.seeds, s.override_rate, seed)?;
            let summary =
                TailRateSummary::new(&fit, s.prior, s.override_rate, s.seeds, s.surprisal_cap)?;
            let written = output::write_tail_rate(&summary, &a.out.out, "reservoir")?;
            println!("horizon      gap          price        mean_regret  std_error");
            for r in &summary.rows {
                println!(
                    "{:<12} {:<12.6} {:<12.6e} {:<12.3} {:.3}",
                    r.horizon, r.gap, r.price, r.mean_regret, r.std_error
                );
            }
            println!(
                "slope {:.4} ± {:.4}",
                summary.slope, summary.slope_std_error
            );
            print_written(&written);
            Ok(())
        }
        Command::Sweep(a) => {
            let s = &mut config.tune;
            set(&mut s.family, a.family);
            set(&mut s.arms, a.arms);
            set(&mut s.half_lives, a.half_lives);
            set(&mut s.gate_prices, a.gate_prices);
            a.hyper
                .apply(&mut s.hyper, &mut s.baselines, &mut s.horizon, &mut s.seeds);
            sweep_and_write(&s.sweep("tune", seed, &config.linear)?, &a.out.out)
        }
        Command::Necessity(a) => {
            let mut cfg = NecessityConfig {
                base_seed: seed,
                delight: config.bandit.hyper.delight(),
                ..NecessityConfig::default()
            };
            set(&mut cfg.seeds, a.seeds);
            set(&mut cfg.horizon, a.horizon);
            let report = necessity_demos(&cfg)?;
            emit_report(&report, a.out.as_deref(), "necessity.json")?;
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Verify(a) => {
            let mut opts = VerifyOptions {
                base_seed: seed,
                inject_gate_flip: a.inject_fault,
                delight: config.bandit.hyper.delight(),
                ..VerifyOptions::default()
            };
            set(&mut opts.seeds, a.seeds);
            set(&mut opts.mc_samples, a.mc_samples);
            let report = verify(&opts)?;
            emit_report(&report, a.out.as_deref(), "verify.json")?;
            for p in &report.properties {
                eprintln!(
                    "{} {} (measured {:e}, limit {:e})",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    p.measured,
                    p.limit
                );
            }
            if report.pass {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn sweep_and_write(spec: &SweepSpec, out: &Path) -> Result<(), Failure> {
    let result = run_sweep(spec)?;
    let written = output::write_sweep(&result, out)?;
    print_summary(&result.summary);
    print_written(&written);
    Ok(())
}

fn print_summary(summary: &SweepSummary) {
    println!(
        "{:<6} {:<44} {:>14} {:>10}",
        "cond", "agent", "regret", "s.e."
    );
    for r in &summary.rows {
        println!(
            "{:<6} {:<44} {:>14.3} {:>10.3}",
            r.condition, r.label, r.final_mean, r.final_std_error
        );
    }
}

fn print_written(w: &output::Written) {
    println!("wrote {} and {}", w.csv.display(), w.summary.display());
}

fn emit_report<T: serde::Serialize>(
    report: &T,
    out: Option<&Path>,
    file: &str,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Failure::Config(e.to_string()))?;
    println!("{text}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Config(e.to_string()))?;
        output::write_json(report, &dir.join(file))?;
    }
    Ok(())
}
