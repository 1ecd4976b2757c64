//! Delight-gated exploration.
//!
//! A host policy (greedy or near-greedy Boltzmann over posterior means) is
//! followed with probability `1 - ε_t`; with probability `ε_t` an override
//! draws from the actions whose prospective delight, expected improvement
//! over the host baseline times surprisal under the host, clears a gate
//! price `λ`. When no action clears the price the override is the host.
//!
//! The crate carries the gate itself ([`delight`]), the conjugate posteriors
//! and analytic expected improvement it needs ([`posterior`], [`special`]),
//! bandit and tabular-MDP agents with their baselines ([`agents`], [`mdp`]),
//! the environments ([`env`]), the revealed-value reservoir model
//! ([`reservoir`]) and a deterministic experiment harness ([`harness`]).

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod delight;
pub mod env;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod posterior;
pub mod quad;
pub mod reservoir;
pub mod rng;
pub mod special;

pub use agents::{Agent, AgentKind, EpsilonSchedule, Policy};
pub use delight::{DelightConfig, GateDecision, HostMode};
pub use env::{BernoulliEnv, DeepSeaEnv, LinearEnv};
pub use error::{Error, Result};
pub use harness::{AgentSpec, EnvSpec, ExperimentSpec, RegretTrace, SweepSpec, SweepSummary};
pub use posterior::{BetaPosterior, LinearGaussianPosterior, TabularModelPosterior};
pub use reservoir::TailPrior;
