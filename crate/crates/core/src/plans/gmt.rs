//! General multistage test: a three-stage core with `K0` extra accept-only
//! and `K1` extra reject-only checkpoints whose levels decay geometrically.

use super::{merge_checkpoints, Budget, ErrorKind, Family, PlanMeta, StatisticMode, TestPlan};
use crate::error::{check_level, Result};
use crate::evaluate::{eval_exact_with, ExactConfig};
use crate::fsst::{design_fsst, FsstDesign};
use crate::model::{Hypothesis, HypothesisModel};

/// Number of points in the geometric search grid for the first-opportunity levels.
const GAMMA_GRID: usize = 200;
const REFINE_STEPS: usize = 100;

/// How the levels `γ00` and `γ10` of the first accept and reject opportunities are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaRule {
    /// Minimise the expected-sample-size upper bound over a geometric grid.
    #[default]
    OptimizeEssBound,
    /// `γ00 = 1/√|log β|`, `γ10 = 1/√|log α|`, clipped into the admissible interval.
    ThetaSqrtLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GmtOptions {
    pub gamma_rule: GammaRule,
    /// After the grid search, move γ to the left end of the optimal `n*` plateau.
    pub refine_gamma: bool,
    /// Search `K0 <= K̂0`, `K1 <= K̂1` jointly for the smallest `ESS0 + ESS1`
    /// instead of using `K̂0`, `K̂1` directly.
    pub joint_k: bool,
}

impl Default for GmtOptions {
    fn default() -> Self {
        Self {
            gamma_rule: GammaRule::OptimizeEssBound,
            refine_gamma: true,
            joint_k: false,
        }
    }
}

/// Designs the GMT with the given γ rule and default options otherwise.
pub fn design_gmt(model: &HypothesisModel, alpha: f64, beta: f64, gamma_rule: GammaRule) -> Result<TestPlan> {
    design_gmt_with(
        model,
        alpha,
        beta,
        GmtOptions {
            gamma_rule,
            ..GmtOptions::default()
        },
    )
}

pub fn design_gmt_with(model: &HypothesisModel, alpha: f64, beta: f64, opts: GmtOptions) -> Result<TestPlan> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    let (k0_hat, k1_hat) = k_hat(model, alpha, beta)?;
    if !opts.joint_k {
        return build(model, alpha, beta, k0_hat, k1_hat, opts);
    }
    let mut best: Option<(f64, TestPlan)> = None;
    for k0 in 0..=k0_hat {
        for k1 in 0..=k1_hat {
            let plan = build(model, alpha, beta, k0, k1, opts)?;
            let cfg = ExactConfig::default();
            let e0 = eval_exact_with(&plan, model, model.truth_under(Hypothesis::Null), &cfg)?.ess;
            let e1 = eval_exact_with(&plan, model, model.truth_under(Hypothesis::Alternative), &cfg)?.ess;
            if best.as_ref().is_none_or(|(v, _)| e0 + e1 < *v) {
                best = Some((e0 + e1, plan));
            }
        }
    }
    Ok(best.expect("K0 = K1 = 0 is always evaluated").1)
}

/// Largest numbers of extra accept and reject opportunities, `(K̂0, K̂1)`.
///
/// `K̂0` is the largest `j >= 0` with `(β/4)^j >= 3α/4` and
/// `n*((β/4)^j, (β/4)^j) <= N`, where `N = n*(α/4, β/4)`; `K̂1` swaps the roles.
pub fn k_hat(model: &HypothesisModel, alpha: f64, beta: f64) -> Result<(usize, usize)> {
    let n_final = design_fsst(model, alpha / 4.0, beta / 4.0)?.n_star;
    let count = |own: f64, other: f64| -> Result<usize> {
        let mut k = 0;
        loop {
            let level = (own / 4.0).powi(k as i32 + 1);
            if level < 0.75 * other || level <= f64::MIN_POSITIVE {
                return Ok(k);
            }
            if design_fsst(model, level, level)?.n_star > n_final {
                return Ok(k);
            }
            k += 1;
        }
    };
    Ok((count(beta, alpha)?, count(alpha, beta)?))
}

/// Sum of `(x/4)^j` for `j = 1..=k`.
fn geometric_tail(x: f64, k: usize) -> f64 {
    (1..=k).map(|j| (x / 4.0).powi(j as i32)).sum()
}

/// The level `γ` of the first opportunity for one side.
///
/// `design(γ)` is the FSST used there and `next_n` the sample size of the
/// following opportunity on the same side, so the ESS bound is
/// `n*(γ) + γ · next_n`.
fn choose_gamma<F>(lower: f64, rule: GammaRule, fallback: f64, refine: bool, next_n: usize, design: F) -> Result<f64>
where
    F: Fn(f64) -> Result<FsstDesign>,
{
    let clip = |g: f64| g.clamp(lower * (1.0 + 1e-9), 1.0 - 1e-9);
    if rule == GammaRule::ThetaSqrtLog {
        return Ok(clip(fallback));
    }
    let log_lo = lower.ln();
    let grid: Vec<f64> = (1..=GAMMA_GRID)
        .map(|i| (log_lo * (1.0 - i as f64 / (GAMMA_GRID + 1) as f64)).exp())
        .collect();
    let objective = |g: f64, n: usize| n as f64 + g * next_n as f64;
    let mut best = (f64::INFINITY, 0usize, 0usize);
    for (i, &g) in grid.iter().enumerate() {
        let n = design(g)?.n_star;
        let v = objective(g, n);
        if v < best.0 {
            best = (v, i, n);
        }
    }
    let (_, i_best, n_best) = best;
    let mut hi = grid[i_best];
    if !refine {
        return Ok(hi);
    }
    // Smallest γ with the same n*: n* is non-increasing in γ, so bisect in log scale.
    let mut lo = if i_best == 0 { lower } else { grid[i_best - 1] };
    for _ in 0..REFINE_STEPS {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        if design(mid)?.n_star <= n_best {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// GMT with `k0` extra accept and `k1` extra reject opportunities.
pub(crate) fn build(
    model: &HypothesisModel,
    alpha: f64,
    beta: f64,
    k0: usize,
    k1: usize,
    opts: GmtOptions,
) -> Result<TestPlan> {
    let last = design_fsst(model, alpha / 4.0, beta / 4.0)?;
    let (n_final, c_final) = (last.n_star, last.c_star);

    let accept_extra: Vec<FsstDesign> = (1..=k0)
        .map(|j| {
            let l = (beta / 4.0).powi(j as i32);
            design_fsst(model, l, l)
        })
        .collect::<Result<_>>()?;
    let reject_extra: Vec<FsstDesign> = (1..=k1)
        .map(|j| {
            let l = (alpha / 4.0).powi(j as i32);
            design_fsst(model, l, l)
        })
        .collect::<Result<_>>()?;

    let beta00 = 0.75 * beta - geometric_tail(beta, k0);
    let alpha10 = 0.75 * alpha - geometric_tail(alpha, k1);
    let next0 = accept_extra.first().map_or(n_final, |d| d.n_star);
    let next1 = reject_extra.first().map_or(n_final, |d| d.n_star);

    let gamma00 = choose_gamma(
        (3.0 * alpha).max(beta) / 4.0,
        opts.gamma_rule,
        1.0 / beta.ln().abs().sqrt(),
        opts.refine_gamma,
        next0,
        |g| design_fsst(model, g, beta00),
    )?;
    let gamma10 = choose_gamma(
        alpha.max(3.0 * beta) / 4.0,
        opts.gamma_rule,
        1.0 / alpha.ln().abs().sqrt(),
        opts.refine_gamma,
        next1,
        |g| design_fsst(model, alpha10, g),
    )?;
    let first_accept = design_fsst(model, gamma00, beta00)?;
    let first_reject = design_fsst(model, alpha10, gamma10)?;

    let mut accepts = vec![(first_accept.n_star, first_accept.c_star)];
    accepts.extend(accept_extra.iter().map(|d| (d.n_star, d.c_star)));
    let mut rejects = vec![(first_reject.n_star, first_reject.c_star)];
    rejects.extend(reject_extra.iter().map(|d| (d.n_star, d.c_star)));
    let checkpoints = merge_checkpoints(&accepts, &rejects, n_final, c_final)?;

    let mut budgets = vec![Budget {
        n: first_accept.n_star,
        kind: ErrorKind::TypeII,
        level: beta00,
    }];
    budgets.extend(accept_extra.iter().map(|d| Budget {
        n: d.n_star,
        kind: ErrorKind::TypeII,
        level: d.beta,
    }));
    budgets.push(Budget {
        n: first_reject.n_star,
        kind: ErrorKind::TypeI,
        level: alpha10,
    });
    budgets.extend(reject_extra.iter().map(|d| Budget {
        n: d.n_star,
        kind: ErrorKind::TypeI,
        level: d.alpha,
    }));
    budgets.push(Budget {
        n: n_final,
        kind: ErrorKind::TypeI,
        level: alpha / 4.0,
    });
    budgets.push(Budget {
        n: n_final,
        kind: ErrorKind::TypeII,
        level: beta / 4.0,
    });

    let meta = PlanMeta {
        family: Family::Gmt,
        model: *model,
        alpha,
        beta,
        params: vec![
            ("k0".into(), k0 as f64),
            ("k1".into(), k1 as f64),
            ("gamma00".into(), gamma00),
            ("gamma10".into(), gamma10),
        ],
        budgets,
    };
    TestPlan::new(checkpoints, StatisticMode::CumulativeAverage, meta)
}
