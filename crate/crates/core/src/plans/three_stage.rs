use super::gmt::{build, GmtOptions};
use super::{merge_checkpoints, Budget, ErrorKind, Family, PlanMeta, StatisticMode, TestPlan};
use crate::error::{check_level, Result};
use crate::fsst::design_fsst;
use crate::model::{Hypothesis, HypothesisModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThreeStageVariant {
    /// Final stage `FSST(α/2, β/2)`; early stages with thresholds
    /// `C00·N00 = -|log(β/2)|`, `C10·N10 = |log(α/2)|` and sizes minimising
    /// `N_i0 + N · P_i(no early decision)`.
    #[default]
    LordenMarkov,
    /// The general multistage test with no extra opportunities.
    GmtK0,
}

/// Three-stage test: one early accept opportunity, one early reject
/// opportunity and a final forced decision.
pub fn design_3st(model: &HypothesisModel, alpha: f64, beta: f64, variant: ThreeStageVariant) -> Result<TestPlan> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    match variant {
        ThreeStageVariant::GmtK0 => {
            let mut plan = build(model, alpha, beta, 0, 0, GmtOptions::default())?;
            plan.meta.family = Family::ThreeStage;
            plan.meta.params.push(("variant_gmt_k0".into(), 1.0));
            Ok(plan)
        }
        ThreeStageVariant::LordenMarkov => lorden_markov(model, alpha, beta),
    }
}

fn lorden_markov(model: &HypothesisModel, alpha: f64, beta: f64) -> Result<TestPlan> {
    let last = design_fsst(model, alpha / 2.0, beta / 2.0)?;
    let n = last.n_star;
    let log_a = (alpha / 2.0).ln().abs();
    let log_b = (beta / 2.0).ln().abs();
    let null = model.truth_under(Hypothesis::Null);
    let alt = model.truth_under(Hypothesis::Alternative);

    // Scan the early sample sizes; ties go to the smaller size.
    let mut accept = (f64::INFINITY, n, 0.0);
    let mut reject = (f64::INFINITY, n, 0.0);
    for k in 1..=n {
        let c0 = -log_b / k as f64;
        let v0 = k as f64 + n as f64 * model.prob_reject(null, k, c0);
        if v0 < accept.0 {
            accept = (v0, k, c0);
        }
        let c1 = log_a / k as f64;
        let v1 = k as f64 + n as f64 * model.prob_accept(alt, k, c1);
        if v1 < reject.0 {
            reject = (v1, k, c1);
        }
    }
    let checkpoints = merge_checkpoints(&[(accept.1, accept.2)], &[(reject.1, reject.2)], n, last.c_star)?;
    let meta = PlanMeta {
        family: Family::ThreeStage,
        model: *model,
        alpha,
        beta,
        params: vec![
            ("n00".into(), accept.1 as f64),
            ("n10".into(), reject.1 as f64),
            ("ess_bound0".into(), accept.0),
            ("ess_bound1".into(), reject.0),
        ],
        budgets: vec![
            Budget {
                n: accept.1,
                kind: ErrorKind::TypeII,
                level: beta / 2.0,
            },
            Budget {
                n: reject.1,
                kind: ErrorKind::TypeI,
                level: alpha / 2.0,
            },
            Budget {
                n,
                kind: ErrorKind::TypeI,
                level: alpha / 2.0,
            },
            Budget {
                n,
                kind: ErrorKind::TypeII,
                level: beta / 2.0,
            },
        ],
    };
    TestPlan::new(checkpoints, StatisticMode::CumulativeAverage, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plans::{design_gmt, GammaRule, Rule};

    #[test]
    fn lorden_markov_structure() {
        let m = HypothesisModel::gaussian(0.5).unwrap();
        let plan = design_3st(&m, 1e-6, 1e-6, ThreeStageVariant::LordenMarkov).unwrap();
        assert_eq!(plan.max_n(), 96);
        for cp in &plan.checkpoints {
            match cp.rule {
                Rule::Both { accept, reject } => {
                    assert!((accept * cp.n as f64 + 5e-7f64.ln().abs()).abs() < 1e-12);
                    assert!((reject * cp.n as f64 - 5e-7f64.ln().abs()).abs() < 1e-12);
                }
                Rule::RejectOnly(c) => assert!((c * cp.n as f64 - 5e-7f64.ln().abs()).abs() < 1e-12),
                Rule::AcceptOnly(c) => assert!((c * cp.n as f64 + 5e-7f64.ln().abs()).abs() < 1e-12),
                Rule::Final(_) => {}
            }
        }
    }

    #[test]
    fn gmt_k0_variant_matches_gmt_when_no_extras() {
        let m = HypothesisModel::gaussian(0.5).unwrap();
        let a = design_3st(&m, 1e-6, 1e-6, ThreeStageVariant::GmtK0).unwrap();
        let b = design_gmt(&m, 1e-6, 1e-6, GammaRule::OptimizeEssBound).unwrap();
        assert_eq!(a.checkpoints, b.checkpoints);
    }
}
