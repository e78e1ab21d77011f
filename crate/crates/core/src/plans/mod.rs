//! Multistage test plans and their designs.
//!
//! A [`TestPlan`] is an ordered list of [`Checkpoint`]s. At each checkpoint
//! the test looks at an average log-likelihood ratio (cumulative, or for
//! sequential thresholding the average over the current stage only) and
//! accepts when it is `<=` the accept threshold, rejects when it is `>` the
//! reject threshold, and otherwise continues. The last checkpoint always
//! decides.

mod format;
mod gmt;
mod three_stage;
mod thresholding;

use std::fmt;

pub use gmt::{design_gmt, design_gmt_with, k_hat, GammaRule, GmtOptions};
pub use three_stage::{design_3st, ThreeStageVariant};
pub use format::{HEADER as PLAN_HEADER, SPRT_HEADER};
pub use thresholding::{choose_k_st, choose_k_st_with, design_mod_st, design_mod_st_with, design_st, KChoice, ThresholdingKind};

use crate::error::{check_level, Error, Result};
use crate::fsst::{FsstDesign, FsstOptions};
use crate::model::HypothesisModel;

/// Decision rule applied at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    AcceptOnly(f64),
    RejectOnly(f64),
    Both { accept: f64, reject: f64 },
    Final(f64),
}

impl Rule {
    /// `(accept threshold, reject threshold)`, `None` where the rule cannot stop.
    pub fn thresholds(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            Rule::AcceptOnly(c) => (Some(c), None),
            Rule::RejectOnly(c) => (None, Some(c)),
            Rule::Both { accept, reject } => (Some(accept), Some(reject)),
            Rule::Final(c) => (Some(c), Some(c)),
        }
    }

    pub fn is_final(&self) -> bool {
        matches!(self, Rule::Final(_))
    }
}

/// A cumulative sample size together with the rule applied there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub rule: Rule,
}

/// Which statistic the thresholds apply to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticMode {
    /// `Λ̄_n` over all observations so far.
    CumulativeAverage,
    /// Average LLR of the current stage only; earlier stages are discarded.
    PerStageAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Fsst,
    ThreeStage,
    Gmt,
    St,
    ModSt,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Fsst => "fsst",
            Family::ThreeStage => "3st",
            Family::Gmt => "gmt",
            Family::St => "st",
            Family::ModSt => "modst",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "fsst" => Family::Fsst,
            "3st" => Family::ThreeStage,
            "gmt" => Family::Gmt,
            "st" => Family::St,
            "modst" => Family::ModSt,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Error probability a budget entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    TypeI,
    TypeII,
}

/// Level assigned by the design to one decision opportunity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub n: usize,
    pub kind: ErrorKind,
    pub level: f64,
}

/// Design record kept alongside the checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanMeta {
    pub family: Family,
    pub model: HypothesisModel,
    pub alpha: f64,
    pub beta: f64,
    /// Named design parameters such as `k0`, `gamma00` or `stages`.
    pub params: Vec<(String, f64)>,
    /// Levels spent per decision opportunity, in design order.
    pub budgets: Vec<Budget>,
}

impl PlanMeta {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    /// Sum of the recorded budgets of one kind.
    pub fn budget_total(&self, kind: ErrorKind) -> f64 {
        self.budgets.iter().filter(|b| b.kind == kind).map(|b| b.level).sum()
    }
}

/// A multistage test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPlan {
    pub checkpoints: Vec<Checkpoint>,
    pub mode: StatisticMode,
    pub meta: PlanMeta,
}

impl TestPlan {
    /// Builds a plan and checks its structural invariants.
    pub fn new(checkpoints: Vec<Checkpoint>, mode: StatisticMode, meta: PlanMeta) -> Result<Self> {
        let plan = Self {
            checkpoints,
            mode,
            meta,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let cps = &self.checkpoints;
        let last = cps.last().ok_or_else(|| Error::Plan("plan has no checkpoints".into()))?;
        if !last.rule.is_final() {
            return Err(Error::Plan("the last checkpoint must be final".into()));
        }
        if cps.iter().filter(|c| c.rule.is_final()).count() != 1 {
            return Err(Error::Plan("exactly one final checkpoint is allowed".into()));
        }
        if cps[0].n == 0 {
            return Err(Error::Plan("checkpoint sample sizes must be positive".into()));
        }
        if cps.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(Error::Plan("checkpoint sample sizes must strictly increase".into()));
        }
        for cp in cps {
            let (a, r) = cp.rule.thresholds();
            if a.into_iter().chain(r).any(f64::is_nan) {
                return Err(Error::Plan(format!("NaN threshold at n = {}", cp.n)));
            }
            if let Rule::Both { accept, reject } = cp.rule {
                if accept > reject {
                    return Err(Error::Plan(format!(
                        "accept threshold {accept} exceeds reject threshold {reject} at n = {}",
                        cp.n
                    )));
                }
            }
        }
        if self.mode == StatisticMode::PerStageAverage && self.meta.family != Family::St {
            return Err(Error::Plan("per-stage statistics are only used by sequential thresholding".into()));
        }
        if self.mode == StatisticMode::PerStageAverage
            && cps.iter().any(|c| !matches!(c.rule, Rule::AcceptOnly(_) | Rule::Final(_)))
        {
            return Err(Error::Plan("sequential thresholding stages can only accept early".into()));
        }
        Ok(())
    }

    /// Largest sample size the test can use.
    pub fn max_n(&self) -> usize {
        self.checkpoints.last().map_or(0, |c| c.n)
    }

    pub fn stages(&self) -> usize {
        self.checkpoints.len()
    }

    /// Decision opportunities: a checkpoint that may both accept and reject
    /// counts twice.
    pub fn opportunities(&self) -> usize {
        self.checkpoints
            .iter()
            .map(|c| if matches!(c.rule, Rule::Both { .. }) { 2 } else { 1 })
            .sum()
    }

    /// Sample sizes between consecutive checkpoints.
    pub fn increments(&self) -> Vec<usize> {
        let mut prev = 0;
        self.checkpoints
            .iter()
            .map(|c| {
                let d = c.n - prev;
                prev = c.n;
                d
            })
            .collect()
    }

    /// Single-stage plan for an FSST design.
    pub fn from_fsst(model: &HypothesisModel, d: &FsstDesign) -> Self {
        Self {
            checkpoints: vec![Checkpoint {
                n: d.n_star,
                rule: Rule::Final(d.c_star),
            }],
            mode: StatisticMode::CumulativeAverage,
            meta: PlanMeta {
                family: Family::Fsst,
                model: *model,
                alpha: d.alpha,
                beta: d.beta,
                params: Vec::new(),
                budgets: vec![
                    Budget {
                        n: d.n_star,
                        kind: ErrorKind::TypeI,
                        level: d.alpha,
                    },
                    Budget {
                        n: d.n_star,
                        kind: ErrorKind::TypeII,
                        level: d.beta,
                    },
                ],
            },
        }
    }
}

/// Designs the FSST as a one-checkpoint plan.
pub fn design_fsst_plan(
    model: &HypothesisModel,
    alpha: f64,
    beta: f64,
    opts: FsstOptions,
) -> Result<TestPlan> {
    let d = crate::fsst::design_fsst_with(model, alpha, beta, opts)?;
    Ok(TestPlan::from_fsst(model, &d))
}

/// Thresholds of the sequential probability ratio test: stop and reject as
/// soon as `Λ_n >= a`, stop and accept as soon as `Λ_n <= -b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprtDesign {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// `A = |log α|`, `B = |log β|`.
pub fn design_sprt(alpha: f64, beta: f64) -> Result<SprtDesign> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    Ok(SprtDesign {
        a: alpha.ln().abs(),
        b: beta.ln().abs(),
        alpha,
        beta,
    })
}

/// Collects accept and reject opportunities into checkpoints.
///
/// At equal sample sizes the largest accept threshold and the smallest reject
/// threshold are kept, an accept and a reject opportunity become [`Rule::Both`],
/// and anything at the final sample size is absorbed by the final rule.
pub(crate) fn merge_checkpoints(
    accepts: &[(usize, f64)],
    rejects: &[(usize, f64)],
    final_n: usize,
    final_c: f64,
) -> Result<Vec<Checkpoint>> {
    use std::collections::BTreeMap;
    let mut slots: BTreeMap<usize, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for &(n, c) in accepts {
        let slot = slots.entry(n).or_default();
        slot.0 = Some(slot.0.map_or(c, |old: f64| old.max(c)));
    }
    for &(n, c) in rejects {
        let slot = slots.entry(n).or_default();
        slot.1 = Some(slot.1.map_or(c, |old: f64| old.min(c)));
    }
    let mut out = Vec::with_capacity(slots.len() + 1);
    for (n, slot) in slots {
        if n > final_n {
            return Err(Error::Plan(format!(
                "interim checkpoint at n = {n} lies beyond the final sample size {final_n}"
            )));
        }
        if n == final_n {
            continue;
        }
        let rule = match slot {
            (Some(a), Some(r)) => Rule::Both { accept: a, reject: r },
            (Some(a), None) => Rule::AcceptOnly(a),
            (None, Some(r)) => Rule::RejectOnly(r),
            (None, None) => unreachable!("slots are created with a threshold"),
        };
        out.push(Checkpoint { n, rule });
    }
    out.push(Checkpoint {
        n: final_n,
        rule: Rule::Final(final_c),
    });
    Ok(out)
}
