use super::normal::{normal_cdf, normal_sf, normal_upper_quantile};
use crate::error::{Error, Result};

/// Unit-variance Gaussian observations, `H0: mean = -eta` against `H1: mean = +eta`.
///
/// The log-likelihood ratio of one observation `x` is `2 * eta * x`, so the
/// average LLR over `n` observations is an affine function of the sample mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMean {
    eta: f64,
}

impl GaussianMean {
    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta > 0.0 {
            Ok(Self { eta })
        } else {
            Err(Error::Model(format!("gaussian eta must be positive and finite, got {eta}")))
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Common value of both KL divergences, `2 eta^2`.
    pub fn info(&self) -> f64 {
        2.0 * self.eta * self.eta
    }

    pub fn psi0(&self, c: f64) -> f64 {
        let i = self.info();
        (i + c) * (i + c) / (4.0 * i)
    }

    pub fn psi1(&self, c: f64) -> f64 {
        let i = self.info();
        (i - c) * (i - c) / (4.0 * i)
    }

    /// Closed-form `(h0, h1)` for the level pair.
    pub fn h(&self, alpha: f64, beta: f64) -> (f64, f64) {
        let la = alpha.ln().abs();
        let lb = beta.ln().abs();
        let i = self.info();
        let h0 = i / (1.0 + (lb / la).sqrt()).powi(2);
        let h1 = i / (1.0 + (la / lb).sqrt()).powi(2);
        (h0, h1)
    }

    /// Threshold on the sample mean equivalent to `average LLR > c`.
    #[inline]
    pub fn mean_threshold(&self, c: f64) -> f64 {
        c / (2.0 * self.eta)
    }

    /// `P_mu(average LLR over n > c)`.
    pub fn prob_reject(&self, mu: f64, n: usize, c: f64) -> f64 {
        normal_sf((self.mean_threshold(c) - mu) * (n as f64).sqrt())
    }

    /// `P_mu(average LLR over n <= c)`.
    pub fn prob_accept(&self, mu: f64, n: usize, c: f64) -> f64 {
        normal_cdf((self.mean_threshold(c) - mu) * (n as f64).sqrt())
    }

    /// Smallest `c` with `P0(average LLR over n > c) <= alpha`.
    pub fn min_type1_threshold(&self, n: usize, alpha: f64) -> Result<f64> {
        let z = normal_upper_quantile(alpha)?;
        Ok(2.0 * self.eta * (z / (n as f64).sqrt() - self.eta))
    }

    /// Largest `c` with `P1(average LLR over n <= c) <= beta`.
    pub fn max_type2_threshold(&self, n: usize, beta: f64) -> Result<f64> {
        let z = normal_upper_quantile(beta)?;
        Ok(2.0 * self.eta * (self.eta - z / (n as f64).sqrt()))
    }
}
