//! Sequential thresholding (ST) and its modification with a cumulative statistic (mod-ST).
//!
//! Both use `K` stages. Stage 1 has type-II level `β − Σ_{j=2..K} (β/2)^j` and
//! stage `j >= 2` has `(β/2)^j`; a test can reject only at the last stage.

use super::{Budget, Checkpoint, ErrorKind, Family, PlanMeta, Rule, StatisticMode, TestPlan};
use crate::error::{check_level, Error, Result};
use crate::evaluate::recursion::Recursion;
use crate::evaluate::{eval_exact_with, ExactConfig};
use crate::fsst::{design_fsst, FsstDesign};
use crate::model::{Hypothesis, HypothesisModel};

const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdingKind {
    St,
    ModSt,
}

/// Type-II levels per stage.
fn stage_betas(beta: f64, k: usize) -> Result<Vec<f64>> {
    let later: Vec<f64> = (2..=k).map(|j| (beta / 2.0).powi(j as i32)).collect();
    if let Some(j) = later.iter().position(|&b| b <= 0.0 || b < f64::MIN_POSITIVE) {
        return Err(Error::Infeasible(format!(
            "type-II level (β/2)^{} underflows; use fewer than {} stages",
            j + 2,
            j + 2
        )));
    }
    let mut out = vec![beta - later.iter().sum::<f64>()];
    out.extend(later);
    Ok(out)
}

fn stage_alpha(alpha: f64, k: usize) -> Result<f64> {
    let a = (alpha.ln() / k as f64).exp();
    if a >= 1.0 {
        return Err(Error::Infeasible(format!(
            "per-stage level α^(1/K) rounds to 1 for α = {alpha}, K = {k}"
        )));
    }
    Ok(a)
}

fn meta(model: &HypothesisModel, family: Family, alpha: f64, beta: f64, k: usize, a_stage: f64) -> PlanMeta {
    PlanMeta {
        family,
        model: *model,
        alpha,
        beta,
        params: vec![("stages".into(), k as f64), ("alpha_stage".into(), a_stage)],
        budgets: Vec::new(),
    }
}

/// Sequential thresholding with `k` stages. Each stage takes fresh
/// observations and compares their average LLR with its own threshold.
pub fn design_st(model: &HypothesisModel, alpha: f64, beta: f64, k: usize) -> Result<TestPlan> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    if k == 0 {
        return Err(Error::Plan("the number of stages must be at least 1".into()));
    }
    if k == 1 {
        return Ok(TestPlan::from_fsst(model, &design_fsst(model, alpha, beta)?));
    }
    let a_stage = stage_alpha(alpha, k)?;
    let betas = stage_betas(beta, k)?;
    let mut meta = meta(model, Family::St, alpha, beta, k, a_stage);
    let mut checkpoints = Vec::with_capacity(k);
    let mut total = 0;
    for (j, &b) in betas.iter().enumerate() {
        let d = design_fsst(model, a_stage, b)?;
        total += d.n_star;
        let rule = if j + 1 == k {
            Rule::Final(d.c_star)
        } else {
            Rule::AcceptOnly(d.c_star)
        };
        checkpoints.push(Checkpoint { n: total, rule });
        meta.budgets.push(Budget {
            n: total,
            kind: ErrorKind::TypeII,
            level: b,
        });
    }
    meta.budgets.push(Budget {
        n: total,
        kind: ErrorKind::TypeI,
        level: alpha,
    });
    TestPlan::new(checkpoints, StatisticMode::PerStageAverage, meta)
}

/// Modified sequential thresholding with the default grid configuration.
pub fn design_mod_st(model: &HypothesisModel, alpha: f64, beta: f64, k: usize) -> Result<TestPlan> {
    design_mod_st_with(model, alpha, beta, k, &ExactConfig::default())
}

/// Largest threshold `b` with `P1(Λ̄_n <= b) <= level`, or `None` if every
/// threshold violates it.
fn max_accept_threshold(model: &HypothesisModel, n: usize, level: f64) -> Result<Option<f64>> {
    Ok(match model {
        HypothesisModel::GaussianMean(g) => Some(g.max_type2_threshold(n, level)?),
        HypothesisModel::BernoulliOneSided(b) => {
            let r = b.max_reject_count(n, level);
            (r >= 1).then(|| b.atom(n, r - 1))
        }
    })
}

/// Modified sequential thresholding: stage `j` ends at the first cumulative
/// size `M_j` where some threshold `b` meets both
/// `P1(Λ̄_{M_j} <= b) <= (β/2)^j` and
/// `P0(no acceptance before stage j, Λ̄_{M_j} > b) <= α^{j/K}`;
/// the smallest such `b` is used.
pub fn design_mod_st_with(
    model: &HypothesisModel,
    alpha: f64,
    beta: f64,
    k: usize,
    cfg: &ExactConfig,
) -> Result<TestPlan> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    if k == 0 {
        return Err(Error::Plan("the number of stages must be at least 1".into()));
    }
    if k == 1 {
        return Ok(TestPlan::from_fsst(model, &design_fsst(model, alpha, beta)?));
    }
    let a_stage = stage_alpha(alpha, k)?;
    let betas = stage_betas(beta, k)?;
    let mut meta = meta(model, Family::ModSt, alpha, beta, k, a_stage);

    let first: FsstDesign = design_fsst(model, a_stage, betas[0])?;
    let mut checkpoints = vec![Checkpoint {
        n: first.n_star,
        rule: Rule::AcceptOnly(first.c_star),
    }];
    meta.budgets.push(Budget {
        n: first.n_star,
        kind: ErrorKind::TypeII,
        level: betas[0],
    });
    let mut engine = Recursion::new(model, model.truth_under(Hypothesis::Null), cfg)?;
    engine.stop(first.n_star, &Rule::AcceptOnly(first.c_star));

    for j in 2..=k {
        let a_j = (alpha.ln() * j as f64 / k as f64).exp();
        let b_j = betas[j - 1];
        let m_prev = engine.n();
        let horizon = design_fsst(model, a_j, b_j)?.n_star;
        let limit = 4 * horizon.max(m_prev) + 16;
        let mut chosen = None;
        for n in m_prev + 1..=limit {
            let Some(b_max) = max_accept_threshold(model, n, b_j)? else {
                continue;
            };
            if engine.joint_reject(n, b_max) <= a_j {
                chosen = Some((n, b_max));
                break;
            }
        }
        let (n, b_max) = chosen.ok_or_else(|| {
            Error::Infeasible(format!(
                "mod-ST stage {j} of {k}: no sample size up to {limit} meets type-I level {a_j:e} and type-II level {b_j:e}"
            ))
        })?;
        let c = smallest_threshold(&engine, model, n, b_max, a_j);
        let rule = if j == k { Rule::Final(c) } else { Rule::AcceptOnly(c) };
        checkpoints.push(Checkpoint { n, rule });
        meta.budgets.push(Budget {
            n,
            kind: ErrorKind::TypeII,
            level: b_j,
        });
        if j < k {
            engine.stop(n, &rule);
        }
    }
    meta.budgets.push(Budget {
        n: checkpoints.last().map_or(0, |c| c.n),
        kind: ErrorKind::TypeI,
        level: alpha,
    });
    TestPlan::new(checkpoints, StatisticMode::CumulativeAverage, meta)
}

/// Smallest `c <= hi` with `P0(survive, Λ̄_n > c) <= level`, given that `hi` qualifies.
fn smallest_threshold(engine: &Recursion, model: &HypothesisModel, n: usize, hi: f64, level: f64) -> f64 {
    let feasible = |c: f64| engine.joint_reject(n, c) <= level;
    let mut hi = hi;
    let mut step = 1.0;
    let mut lo = hi - step;
    while feasible(lo) {
        hi = lo;
        step *= 2.0;
        lo = hi - step;
        if step > 1e6 {
            return lo;
        }
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    match model {
        HypothesisModel::BernoulliOneSided(b) => {
            let k = b.reject_count(n, hi);
            if k >= 0 && (k as usize) <= n {
                b.atom(n, k as usize)
            } else {
                hi
            }
        }
        HypothesisModel::GaussianMean(_) => hi,
    }
}

/// Result of the stage-count search.
#[derive(Debug, Clone)]
pub struct KChoice {
    pub k: usize,
    pub plan: TestPlan,
    pub ess_mixture: f64,
}

/// `K <= k_max` minimising `(1 − π) ESS0 + π ESS1`; ties go to the smaller `K`.
pub fn choose_k_st(
    model: &HypothesisModel,
    alpha: f64,
    beta: f64,
    pi: f64,
    k_max: usize,
    kind: ThresholdingKind,
) -> Result<usize> {
    choose_k_st_with(model, alpha, beta, pi, k_max, kind, &ExactConfig::default()).map(|c| c.k)
}

pub fn choose_k_st_with(
    model: &HypothesisModel,
    alpha: f64,
    beta: f64,
    pi: f64,
    k_max: usize,
    kind: ThresholdingKind,
    cfg: &ExactConfig,
) -> Result<KChoice> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::Probability { name: "pi", value: pi });
    }
    if k_max == 0 {
        return Err(Error::Plan("k_max must be at least 1".into()));
    }
    let mut best: Option<KChoice> = None;
    for k in 1..=k_max {
        let plan = match kind {
            ThresholdingKind::St => design_st(model, alpha, beta, k)?,
            ThresholdingKind::ModSt => design_mod_st_with(model, alpha, beta, k, cfg)?,
        };
        let e0 = eval_exact_with(&plan, model, model.truth_under(Hypothesis::Null), cfg)?.ess;
        let e1 = eval_exact_with(&plan, model, model.truth_under(Hypothesis::Alternative), cfg)?.ess;
        let v = (1.0 - pi) * e0 + pi * e1;
        if best.as_ref().is_none_or(|b| v < b.ess_mixture * (1.0 - 1e-12)) {
            best = Some(KChoice {
                k,
                plan,
                ess_mixture: v,
            });
        }
    }
    Ok(best.expect("k_max >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss() -> HypothesisModel {
        HypothesisModel::gaussian(0.5).unwrap()
    }

    #[test]
    fn st_stage_sizes() {
        let plan = design_st(&gauss(), 1e-6, 1e-6, 3).unwrap();
        assert_eq!(plan.increments(), vec![51, 92, plan.increments()[2]]);
        assert_eq!(plan.mode, StatisticMode::PerStageAverage);
        let third = design_fsst(&gauss(), 1e-2, 5e-7f64.powi(3)).unwrap().n_star;
        assert_eq!(plan.increments()[2], third);
    }

    #[test]
    fn single_stage_is_fsst() {
        let f = TestPlan::from_fsst(&gauss(), &design_fsst(&gauss(), 1e-3, 1e-2).unwrap());
        assert_eq!(design_st(&gauss(), 1e-3, 1e-2, 1).unwrap(), f);
        assert_eq!(design_mod_st(&gauss(), 1e-3, 1e-2, 1).unwrap(), f);
    }

    #[test]
    fn zero_stages_rejected() {
        assert!(design_st(&gauss(), 0.1, 0.1, 0).is_err());
        assert!(matches!(design_st(&gauss(), 0.1, 0.1, 2000), Err(Error::Infeasible(_))));
    }

    #[test]
    fn mod_st_horizon_no_longer_than_st() {
        let st = design_st(&gauss(), 1e-6, 1e-6, 3).unwrap();
        let mst = design_mod_st(&gauss(), 1e-6, 1e-6, 3).unwrap();
        assert!(mst.max_n() <= st.max_n());
        for (j, cp) in mst.checkpoints.iter().enumerate() {
            let j = j + 1;
            let bound = design_fsst(&gauss(), 1e-6f64.powf(j as f64 / 3.0), 5e-7f64.powi(j as i32)).unwrap();
            assert!(cp.n <= bound.n_star, "stage {j}: {} > {}", cp.n, bound.n_star);
        }
    }

    #[test]
    fn full_weight_on_alternative_picks_one_stage() {
        assert_eq!(choose_k_st(&gauss(), 1e-4, 1e-4, 1.0, 4, ThresholdingKind::St).unwrap(), 1);
    }
}
