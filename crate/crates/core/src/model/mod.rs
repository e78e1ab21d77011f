//! Binary hypothesis problems and their large-deviation quantities.
//!
//! A [`HypothesisModel`] describes i.i.d. observations under one of two
//! simple hypotheses. Every test in this crate stops and decides using the
//! average log-likelihood ratio `Λ̄_n = Λ_n / n`, with "reject" meaning
//! `Λ̄_n > c` and "accept" meaning `Λ̄_n <= c`.

mod bernoulli;
mod gaussian;
mod normal;

use std::fmt;
use std::str::FromStr;

pub use bernoulli::BernoulliOneSided;
pub use gaussian::GaussianMean;
pub use normal::{normal_cdf, normal_pdf, normal_quantile, normal_sf, normal_upper_quantile};

use crate::error::{check_level, Error, Result};

/// One of the two simple hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    Null,
    Alternative,
}

impl Hypothesis {
    pub fn index(self) -> u8 {
        match self {
            Hypothesis::Null => 0,
            Hypothesis::Alternative => 1,
        }
    }
}

/// The true parameter generating the data: a Gaussian mean or a Bernoulli
/// success probability.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruthParam(pub f64);

/// A binary testing problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypothesisModel {
    GaussianMean(GaussianMean),
    BernoulliOneSided(BernoulliOneSided),
}

/// Tolerance for `c` slightly outside the rate-function domain due to rounding.
const DOMAIN_SLACK: f64 = 1e-12;

impl HypothesisModel {
    pub fn gaussian(eta: f64) -> Result<Self> {
        GaussianMean::new(eta).map(Self::GaussianMean)
    }

    pub fn bernoulli(p0: f64, p1: f64) -> Result<Self> {
        BernoulliOneSided::new(p0, p1).map(Self::BernoulliOneSided)
    }

    /// `(I0, I1)` in nats.
    pub fn kl_divergences(&self) -> (f64, f64) {
        match self {
            Self::GaussianMean(g) => (g.info(), g.info()),
            Self::BernoulliOneSided(b) => b.kl_divergences(),
        }
    }

    pub fn chernoff(&self) -> f64 {
        match self {
            Self::GaussianMean(g) => g.info() / 4.0,
            Self::BernoulliOneSided(b) => b.psi0(0.0),
        }
    }

    /// Rate function `ψ_i(c)`.
    ///
    /// `ψ0` is defined for `c >= -I0` and `ψ1` for `c <= I1`; on the
    /// Bernoulli lattice the value is infinite beyond the extreme atoms.
    pub fn psi(&self, i: Hypothesis, c: f64) -> Result<f64> {
        let (i0, i1) = self.kl_divergences();
        let c = match i {
            Hypothesis::Null if c >= -i0 => c,
            Hypothesis::Null if c >= -i0 - DOMAIN_SLACK * i0 => -i0,
            Hypothesis::Alternative if c <= i1 => c,
            Hypothesis::Alternative if c <= i1 + DOMAIN_SLACK * i1 => i1,
            _ => return Err(Error::RateDomain { index: i.index(), c }),
        };
        Ok(match (self, i) {
            (Self::GaussianMean(g), Hypothesis::Null) => g.psi0(c),
            (Self::GaussianMean(g), Hypothesis::Alternative) => g.psi1(c),
            (Self::BernoulliOneSided(b), Hypothesis::Null) => b.psi0(c),
            (Self::BernoulliOneSided(b), Hypothesis::Alternative) => b.psi1(c),
        })
    }

    /// `g(c) = ψ0(c) / ψ1(c)` on `(-I0, I1)`.
    pub fn g(&self, c: f64) -> Result<f64> {
        Ok(self.psi(Hypothesis::Null, c)? / self.psi(Hypothesis::Alternative, c)?)
    }

    /// Solves `g(c) = u` by bisection on `(-I0, I1)`.
    pub fn g_inverse(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Model(format!("g_inverse needs a positive finite argument, got {u}")));
        }
        let (i0, i1) = self.kl_divergences();
        let (mut lo, mut hi) = (-i0, i1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let p0 = self.psi(Hypothesis::Null, mid)?;
            let p1 = self.psi(Hypothesis::Alternative, mid)?;
            // g(mid) < u  <=>  p0 < u p1, which avoids dividing by a vanishing p1
            if p0 < u * p1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `h_i(α, β) = ψ_i(g⁻¹(|log α| / |log β|))`.
    pub fn h(&self, i: Hypothesis, alpha: f64, beta: f64) -> Result<f64> {
        check_level("alpha", alpha)?;
        check_level("beta", beta)?;
        match self {
            Self::GaussianMean(g) => {
                let (h0, h1) = g.h(alpha, beta);
                Ok(if i == Hypothesis::Null { h0 } else { h1 })
            }
            Self::BernoulliOneSided(_) => {
                let c = self.g_inverse(alpha.ln() / beta.ln())?;
                self.psi(i, c)
            }
        }
    }

    /// The parameter value under hypothesis `h`.
    pub fn truth_under(&self, h: Hypothesis) -> TruthParam {
        match (self, h) {
            (Self::GaussianMean(g), Hypothesis::Null) => TruthParam(-g.eta()),
            (Self::GaussianMean(g), Hypothesis::Alternative) => TruthParam(g.eta()),
            (Self::BernoulliOneSided(b), Hypothesis::Null) => TruthParam(b.p0()),
            (Self::BernoulliOneSided(b), Hypothesis::Alternative) => TruthParam(b.p1()),
        }
    }

    pub fn check_truth(&self, truth: TruthParam) -> Result<()> {
        let ok = match self {
            Self::GaussianMean(_) => truth.0.is_finite(),
            Self::BernoulliOneSided(_) => truth.0 > 0.0 && truth.0 < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Truth(format!("{} is not a valid parameter for {self}", truth.0)))
        }
    }

    /// `P_θ(Λ̄_n > c)`.
    pub fn prob_reject(&self, truth: TruthParam, n: usize, c: f64) -> f64 {
        match self {
            Self::GaussianMean(g) => g.prob_reject(truth.0, n, c),
            Self::BernoulliOneSided(b) => b.prob_reject(truth.0, n, c),
        }
    }

    /// `P_θ(Λ̄_n <= c)`.
    pub fn prob_accept(&self, truth: TruthParam, n: usize, c: f64) -> f64 {
        match self {
            Self::GaussianMean(g) => g.prob_accept(truth.0, n, c),
            Self::BernoulliOneSided(b) => b.prob_accept(truth.0, n, c),
        }
    }

    /// Type-I error `P0(Λ̄_n > c)` when `truth_is` is the null, and type-II
    /// error `P1(Λ̄_n <= c)` otherwise.
    pub fn single_stage_errors(&self, truth_is: Hypothesis, n: usize, c: f64) -> f64 {
        let truth = self.truth_under(truth_is);
        match truth_is {
            Hypothesis::Null => self.prob_reject(truth, n, c),
            Hypothesis::Alternative => self.prob_accept(truth, n, c),
        }
    }

    /// Expected per-observation LLR under `truth`.
    pub fn llr_mean(&self, truth: TruthParam) -> f64 {
        match self {
            Self::GaussianMean(g) => 2.0 * g.eta() * truth.0,
            Self::BernoulliOneSided(b) => {
                truth.0 * b.llr_success() + (1.0 - truth.0) * b.llr_failure()
            }
        }
    }
}

impl fmt::Display for HypothesisModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussianMean(g) => write!(f, "gaussian:{}", g.eta()),
            Self::BernoulliOneSided(b) => write!(f, "bernoulli:{},{}", b.p0(), b.p1()),
        }
    }
}

impl FromStr for HypothesisModel {
    type Err = Error;

    /// Parses `gaussian:<eta>` or `bernoulli:<p0>,<p1>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Model(format!("expected gaussian:<eta> or bernoulli:<p0>,<p1>, got '{s}'"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match kind.trim() {
            "gaussian" => Self::gaussian(num(args)?),
            "bernoulli" => {
                let (p0, p1) = args.split_once(',').ok_or_else(bad)?;
                Self::bernoulli(num(p0)?, num(p1)?)
            }
            _ => Err(bad()),
        }
    }
}
