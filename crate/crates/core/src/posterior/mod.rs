//! Conjugate posterior state and the analytic expected-improvement formulas
//! that go with each belief family.

mod beta;
mod linear;
mod tabular;

pub use beta::BetaPosterior;
pub use linear::{gaussian_ei, LinearGaussianPosterior};
pub use tabular::TabularModelPosterior;
