//! Optimal fixed-sample-size tests and the non-asymptotic bounds on their size.
//!
//! For levels `(α, β)`, `n*` is the smallest `n` admitting a threshold `c`
//! with `P0(Λ̄_n > c) <= α` and `P1(Λ̄_n <= c) <= β`. The feasible thresholds
//! at `n*` form a left-closed interval (a single point in degenerate cases).

use crate::error::{check_level, Error, Result};
use crate::model::{normal_upper_quantile, Hypothesis, HypothesisModel};

/// Largest sample size explored by the linear scan.
const SCAN_LIMIT: usize = 5_000_000;

/// A fixed-sample-size test: take `n_star` observations and reject iff `Λ̄ > c_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsstDesign {
    pub n_star: usize,
    pub c_star: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FsstOptions {
    /// For the Gaussian model, use the smallest feasible threshold at `n*`
    /// instead of the centre of the feasible interval.
    pub strict_cstar: bool,
}

/// Designs the FSST with default options.
///
/// Gaussian: `n* = ⌈(z_α + z_β)² / (4η²)⌉` and `c* = η (z_α − z_β) / √n*`,
/// the midpoint of the feasible interval. Bernoulli: linear scan with the
/// smallest feasible lattice threshold.
///
/// ```
/// use seqtest::{design_fsst, HypothesisModel};
/// let m = HypothesisModel::gaussian(0.5).unwrap();
/// let d = design_fsst(&m, 1e-12, 1e-2).unwrap();
/// assert_eq!(d.n_star, 88);
/// assert!((d.c_star - 0.2509).abs() < 5e-5);
/// ```
pub fn design_fsst(model: &HypothesisModel, alpha: f64, beta: f64) -> Result<FsstDesign> {
    design_fsst_with(model, alpha, beta, FsstOptions::default())
}

pub fn design_fsst_with(
    model: &HypothesisModel,
    alpha: f64,
    beta: f64,
    opts: FsstOptions,
) -> Result<FsstDesign> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    match model {
        HypothesisModel::GaussianMean(g) => {
            let za = normal_upper_quantile(alpha)?;
            let zb = normal_upper_quantile(beta)?;
            let eta = g.eta();
            let s = za + zb;
            let n_star = if s <= 0.0 {
                1
            } else {
                ((s * s) / (4.0 * eta * eta)).ceil().max(1.0) as usize
            };
            let root = (n_star as f64).sqrt();
            let c_star = if opts.strict_cstar {
                2.0 * eta * (za / root - eta)
            } else {
                eta * (za - zb) / root
            };
            Ok(FsstDesign {
                n_star,
                c_star,
                alpha,
                beta,
            })
        }
        HypothesisModel::BernoulliOneSided(_) => design_fsst_scan(model, alpha, beta),
    }
}

/// Smallest feasible threshold at `n`, if any threshold is feasible.
fn smallest_feasible_threshold(
    model: &HypothesisModel,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<Option<f64>> {
    match model {
        HypothesisModel::GaussianMean(g) => {
            let lo = g.min_type1_threshold(n, alpha)?;
            let hi = g.max_type2_threshold(n, beta)?;
            Ok((lo <= hi).then_some(lo))
        }
        HypothesisModel::BernoulliOneSided(b) => {
            let r_min = b.min_reject_count(n, alpha);
            let r_max = b.max_reject_count(n, beta);
            // r_min >= 1 because alpha < 1, so the atom below it exists
            Ok((r_min <= r_max && r_min >= 1).then(|| b.atom(n, r_min - 1)))
        }
    }
}

/// Generic design by scanning `n = 1, 2, …` and returning the first feasible
/// `n` with its smallest feasible threshold.
pub fn design_fsst_scan(model: &HypothesisModel, alpha: f64, beta: f64) -> Result<FsstDesign> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    for n in 1..=SCAN_LIMIT {
        if let Some(c_star) = smallest_feasible_threshold(model, n, alpha, beta)? {
            return Ok(FsstDesign {
                n_star: n,
                c_star,
                alpha,
                beta,
            });
        }
    }
    Err(Error::Infeasible(format!(
        "no feasible fixed-sample-size test with n <= {SCAN_LIMIT} for alpha = {alpha}, beta = {beta}"
    )))
}

/// Upper bounds on `n*`: `(|log β| / h1(α, β) + 1, |log(α ∧ β)| / 𝒞 + 1)`.
pub fn n_star_bounds(model: &HypothesisModel, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    let h1 = model.h(Hypothesis::Alternative, alpha, beta)?;
    let sharp = beta.ln().abs() / h1 + 1.0;
    let chernoff = alpha.min(beta).ln().abs() / model.chernoff() + 1.0;
    Ok((sharp, chernoff))
}
