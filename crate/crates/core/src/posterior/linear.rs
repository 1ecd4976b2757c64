use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf};

const RESYMMETRIZE_EVERY: u64 = 100;

/// Bayesian linear-regression belief `θ ~ N(mean, covariance)` with prior
/// `N(0, η⁻¹ I)` and Gaussian observation noise of variance `noise_var`.
///
/// The covariance is carried directly and updated with rank-one
/// Sherman–Morrison steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianPosterior {
    dim: usize,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    noise_var: f64,
    prior_precision: f64,
    updates: u64,
}

impl LinearGaussianPosterior {
    pub fn new(dim: usize, prior_precision: f64, noise_var: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("linear posterior needs dim >= 1".into()));
        }
        if !(prior_precision > 0.0) || !(noise_var > 0.0) {
            return Err(Error::Config(format!(
                "prior precision and noise variance must be positive (got {prior_precision}, {noise_var})"
            )));
        }
        Ok(Self {
            dim,
            mean: DVector::zeros(dim),
            covariance: DMatrix::identity(dim, dim) / prior_precision,
            noise_var,
            prior_precision,
            updates: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn prior_precision(&self) -> f64 {
        self.prior_precision
    }

    pub fn num_updates(&self) -> u64 {
        self.updates
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Conjugate update with one observation `y = xᵀθ + noise`.
    pub fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.check_dim(x.len())?;
        let x = DVector::from_column_slice(x);
        let sx = &self.covariance * &x;
        let denom = self.noise_var + x.dot(&sx);
        let residual = y - x.dot(&self.mean);
        self.mean += &sx * (residual / denom);
        self.covariance -= &sx * sx.transpose() / denom;
        self.updates += 1;
        if self.updates.is_multiple_of(RESYMMETRIZE_EVERY) {
            self.covariance = (&self.covariance + self.covariance.transpose()) * 0.5;
        }
        Ok(())
    }

    /// Predictive mean `xᵀ mean` and variance `xᵀ Σ x` of the noiseless reward.
    pub fn predictive(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(x.len())?;
        let x = DVector::from_column_slice(x);
        let mu = x.dot(&self.mean);
        let var = x.dot(&(&self.covariance * &x)).max(0.0);
        Ok((mu, var))
    }

    /// Predictive means and variances for every row of a row-major
    /// `rows × dim` feature matrix.
    pub fn predictive_batch(&self, features: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if !features.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: features.len() % self.dim,
            });
        }
        let rows = features.len() / self.dim;
        let x = DMatrix::from_row_slice(rows, self.dim, features);
        let mu = &x * &self.mean;
        let xs = &x * &self.covariance;
        let var = (0..rows)
            .map(|i| xs.row(i).dot(&x.row(i)).max(0.0))
            .collect();
        Ok((mu.iter().copied().collect(), var))
    }

    /// Draws `θ` from the posterior using a Cholesky factor of the covariance.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + self.cholesky_factor() * z
    }

    fn cholesky_factor(&self) -> DMatrix<f64> {
        let sym = (&self.covariance + self.covariance.transpose()) * 0.5;
        if let Some(ch) = sym.clone().cholesky() {
            return ch.l();
        }
        // Rounding can push a nearly singular covariance off the cone.
        let mut jitter = 1e-12 * (sym.trace() / self.dim as f64).max(1e-300);
        loop {
            let shifted = &sym + DMatrix::identity(self.dim, self.dim) * jitter;
            if let Some(ch) = shifted.cholesky() {
                return ch.l();
            }
            jitter *= 10.0;
        }
    }
}

/// Expected improvement `E[(X - v)^+]` for `X ~ N(mu, s²)`.
///
/// With `s = 0` the deterministic limit `(mu - v)^+` is returned.
pub fn gaussian_ei(mu: f64, s: f64, v: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s <= 0.0 {
        return (mu - v).max(0.0);
    }
    let z = (mu - v) / s;
    (s * (std_normal_pdf(z) + z * std_normal_cdf(z))).max(0.0)
}
