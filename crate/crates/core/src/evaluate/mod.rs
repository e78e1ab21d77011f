//! Exact and Monte Carlo evaluation of plans: stopping distribution, error
//! probabilities and expected sample size (ESS).

pub(crate) mod monte_carlo;
pub(crate) mod recursion;

use std::io::Write;

use rayon::prelude::*;

pub use monte_carlo::McConfig;

use crate::error::{Error, Result};
use crate::fsst::design_fsst;
use crate::model::{HypothesisModel, TruthParam};
use crate::plans::{SprtDesign, StatisticMode, TestPlan};
use recursion::Recursion;

/// Resolution self-check run alongside the main grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridCheck {
    Off,
    /// Re-run with `(points − 1)/2 + 1` points.
    Half,
    /// Re-run with `2(points − 1) + 1` points.
    Double,
}

/// Parameters of the Gaussian grid recursion. The Bernoulli recursion is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactConfig {
    /// Odd number of Simpson nodes per checkpoint.
    pub points: usize,
    /// Half-width of each grid in standard deviations of the running sum.
    pub span_sd: f64,
    pub check: GridCheck,
    /// Largest accepted relative ESS change between the two resolutions.
    pub tolerance: f64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            points: 4001,
            span_sd: 8.0,
            check: GridCheck::Double,
            tolerance: 1e-6,
        }
    }
}

impl ExactConfig {
    fn validate(&self) -> Result<()> {
        if self.points < 3 || self.points % 2 == 0 {
            return Err(Error::Config(format!("grid points must be odd and >= 3, got {}", self.points)));
        }
        if !(self.span_sd > 0.0) {
            return Err(Error::Config(format!("grid span must be positive, got {}", self.span_sd)));
        }
        Ok(())
    }
}

/// How a report was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportMethod {
    /// Grid or lattice recursion; `resolution_gap` is the relative ESS change
    /// seen by the resolution check, when one ran.
    ExactRecursion { resolution_gap: Option<f64> },
    /// Product of independent stage probabilities.
    ExactProduct,
    MonteCarlo {
        reps: usize,
        seed: u64,
        se_ess: f64,
        se_type1: f64,
        se_type2: f64,
    },
}

impl ReportMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ReportMethod::ExactRecursion { .. } => "exact-recursion",
            ReportMethod::ExactProduct => "exact-product",
            ReportMethod::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// Evaluation of one test under one parameter value.
///
/// `type1` is the probability of rejecting the null and `type2` the
/// probability of accepting it; under the null (alternative) the first
/// (second) is the error probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub truth: TruthParam,
    /// Sample size of each checkpoint (empty for the SPRT).
    pub checkpoints: Vec<usize>,
    /// `(accept, reject)` probability at each checkpoint.
    pub stop_mass: Vec<(f64, f64)>,
    pub type1: f64,
    pub type2: f64,
    pub ess: f64,
    pub max_n: usize,
    pub method: ReportMethod,
}

impl EvalReport {
    pub fn total_stop_mass(&self) -> f64 {
        self.stop_mass.iter().map(|(a, r)| a + r).sum()
    }

    pub fn se_ess(&self) -> Option<f64> {
        match self.method {
            ReportMethod::MonteCarlo { se_ess, .. } => Some(se_ess),
            _ => None,
        }
    }

    fn from_masses(truth: TruthParam, checkpoints: Vec<usize>, stop_mass: Vec<(f64, f64)>, method: ReportMethod) -> Self {
        let type2 = stop_mass.iter().map(|m| m.0).sum();
        let type1 = stop_mass.iter().map(|m| m.1).sum();
        let ess = checkpoints
            .iter()
            .zip(&stop_mass)
            .map(|(&n, (a, r))| n as f64 * (a + r))
            .sum();
        let max_n = checkpoints.last().copied().unwrap_or(0);
        Self {
            truth,
            checkpoints,
            stop_mass,
            type1,
            type2,
            ess,
            max_n,
            method,
        }
    }
}

/// Something that can be evaluated: a [`TestPlan`] or an [`SprtDesign`].
pub trait Evaluable: Sync {
    /// Target levels `(α, β)` of the design.
    fn levels(&self) -> (f64, f64);
    fn label(&self) -> String;
    fn exact(&self, model: &HypothesisModel, truth: TruthParam, cfg: &ExactConfig) -> Result<EvalReport>;
    fn monte_carlo(&self, model: &HypothesisModel, truth: TruthParam, mc: &McConfig) -> Result<EvalReport>;
}

impl Evaluable for TestPlan {
    fn levels(&self) -> (f64, f64) {
        (self.meta.alpha, self.meta.beta)
    }

    fn label(&self) -> String {
        self.meta.family.to_string()
    }

    fn exact(&self, model: &HypothesisModel, truth: TruthParam, cfg: &ExactConfig) -> Result<EvalReport> {
        eval_exact_with(self, model, truth, cfg)
    }

    fn monte_carlo(&self, model: &HypothesisModel, truth: TruthParam, mc: &McConfig) -> Result<EvalReport> {
        monte_carlo::simulate_plan(self, model, truth, mc)
    }
}

impl Evaluable for SprtDesign {
    fn levels(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    fn label(&self) -> String {
        "sprt".into()
    }

    fn exact(&self, _: &HypothesisModel, _: TruthParam, _: &ExactConfig) -> Result<EvalReport> {
        Err(Error::Config("the SPRT has no exact evaluation; use Monte Carlo".into()))
    }

    fn monte_carlo(&self, model: &HypothesisModel, truth: TruthParam, mc: &McConfig) -> Result<EvalReport> {
        monte_carlo::simulate_sprt(self, model, truth, mc)
    }
}

/// Exact evaluation with the default grid configuration.
pub fn eval_exact(plan: &TestPlan, model: &HypothesisModel, truth: TruthParam) -> Result<EvalReport> {
    eval_exact_with(plan, model, truth, &ExactConfig::default())
}

/// Exact evaluation. Cumulative plans use the boundary-crossing recursion,
/// per-stage plans the product of independent stage probabilities.
pub fn eval_exact_with(
    plan: &TestPlan,
    model: &HypothesisModel,
    truth: TruthParam,
    cfg: &ExactConfig,
) -> Result<EvalReport> {
    cfg.validate()?;
    model.check_truth(truth)?;
    plan.validate()?;
    let ns: Vec<usize> = plan.checkpoints.iter().map(|c| c.n).collect();
    if plan.mode == StatisticMode::PerStageAverage {
        return Ok(EvalReport::from_masses(truth, ns, product_masses(plan, model, truth), ReportMethod::ExactProduct));
    }
    let (masses, used_grid) = recursion_masses(plan, model, truth, cfg)?;
    let mut report = EvalReport::from_masses(truth, ns.clone(), masses, ReportMethod::ExactRecursion { resolution_gap: None });
    if used_grid && cfg.check != GridCheck::Off {
        let points = match cfg.check {
            GridCheck::Half => (cfg.points - 1) / 2 + 1,
            _ => 2 * (cfg.points - 1) + 1,
        };
        let points = if points % 2 == 0 { points + 1 } else { points };
        let other_cfg = ExactConfig { points, ..*cfg };
        let (other, _) = recursion_masses(plan, model, truth, &other_cfg)?;
        let other = EvalReport::from_masses(truth, ns, other, report.method);
        let gap = (other.ess - report.ess).abs() / report.ess.abs().max(f64::MIN_POSITIVE);
        if gap >= cfg.tolerance {
            let (coarse, fine) = if points < cfg.points { (&other, &report) } else { (&report, &other) };
            return Err(Error::NonConvergent {
                coarse: coarse.ess,
                fine: fine.ess,
                coarse_points: points.min(cfg.points),
                fine_points: points.max(cfg.points),
            });
        }
        report.method = ReportMethod::ExactRecursion { resolution_gap: Some(gap) };
    }
    Ok(report)
}

fn recursion_masses(
    plan: &TestPlan,
    model: &HypothesisModel,
    truth: TruthParam,
    cfg: &ExactConfig,
) -> Result<(Vec<(f64, f64)>, bool)> {
    let mut engine = Recursion::new(model, truth, cfg)?;
    let masses = plan.checkpoints.iter().map(|cp| engine.stop(cp.n, &cp.rule)).collect();
    Ok((masses, engine.used_grid()))
}

/// Stage-wise probabilities for per-stage plans; each stage uses fresh data.
fn product_masses(plan: &TestPlan, model: &HypothesisModel, truth: TruthParam) -> Vec<(f64, f64)> {
    let mut alive = 1.0;
    plan.checkpoints
        .iter()
        .zip(plan.increments())
        .map(|(cp, m)| {
            let (acc, rej) = cp.rule.thresholds();
            let a = acc.map_or(0.0, |c| model.prob_accept(truth, m, c));
            let r = rej.map_or(0.0, |c| model.prob_reject(truth, m, c));
            let out = (alive * a, alive * r);
            if !cp.rule.is_final() {
                alive *= model.prob_reject(truth, m, acc.unwrap_or(f64::NEG_INFINITY));
            }
            out
        })
        .collect()
}

/// Monte Carlo evaluation of a plan or an SPRT.
pub fn eval_mc<E: Evaluable + ?Sized>(
    item: &E,
    model: &HypothesisModel,
    truth: TruthParam,
    mc: &McConfig,
) -> Result<EvalReport> {
    item.monte_carlo(model, truth, mc)
}

/// Evaluation method for sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMethod {
    Exact(ExactConfig),
    MonteCarlo(McConfig),
}

/// Evaluations over a grid of parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub label: String,
    /// FSST sample size for the design levels, used to normalise the ESS.
    pub n_star: usize,
    pub rows: Vec<EvalReport>,
}

impl SweepResult {
    pub const CSV_HEADER: [&'static str; 7] = ["mu", "ess", "ess_over_nstar", "type1", "type2", "se_ess", "method"];

    /// The row with the largest ESS.
    pub fn worst_case(&self) -> &EvalReport {
        self.rows
            .iter()
            .max_by(|a, b| a.ess.total_cmp(&b.ess))
            .expect("sweeps have at least one row")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                sig12(r.truth.0),
                sig12(r.ess),
                sig12(r.ess / self.n_star as f64),
                sig12(r.type1),
                sig12(r.type2),
                r.se_ess().map(sig12).unwrap_or_default(),
                r.method.name().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats a real with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

/// Evaluates `item` at every grid point (in parallel; results are
/// independent of the thread count).
pub fn sweep_mu<E: Evaluable + ?Sized>(
    item: &E,
    model: &HypothesisModel,
    grid: &[TruthParam],
    method: &EvalMethod,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Config("the parameter grid is empty".into()));
    }
    let (alpha, beta) = item.levels();
    let n_star = design_fsst(model, alpha, beta)?.n_star;
    let rows = grid
        .par_iter()
        .map(|&t| match method {
            EvalMethod::Exact(cfg) => item.exact(model, t, cfg),
            EvalMethod::MonteCarlo(mc) => item.monte_carlo(model, t, mc),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        label: item.label(),
        n_star,
        rows,
    })
}

/// `n` equally spaced points from `lo` to `hi`, both included.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<TruthParam> {
    match n {
        0 => Vec::new(),
        1 => vec![TruthParam(lo)],
        _ => (0..n)
            .map(|i| TruthParam(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// `(1 − π)·ESS0 + π·ESS1`.
pub fn ess_mixture(report_h0: &EvalReport, report_h1: &EvalReport, pi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::Probability { name: "pi", value: pi });
    }
    Ok((1.0 - pi) * report_h0.ess + pi * report_h1.ess)
}
