//! Design and evaluation of multistage sequential tests for a binary
//! hypothesis problem, and their use for signal recovery across many
//! independent data streams under (generalized) familywise error control.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: the binary testing problem (Gaussian mean, Bernoulli
//!   one-sided), KL numbers, large-deviation rate functions and exact
//!   single-stage error probabilities.
//! - [`fsst`]: the optimal fixed-sample-size test and its sample-size bounds.
//! - [`plans`]: multistage plans (3-Stage Test, General Multistage Test,
//!   Sequential Thresholding and its cumulative modification) and SPRT
//!   thresholds, plus a plain-text plan record.
//! - [`evaluate`]: exact boundary-crossing recursion and seeded Monte Carlo
//!   evaluation, sweeps over the true parameter.
//! - [`highdim`]: per-stream level calibration for m-stream signal recovery
//!   and the desk-scale sweeps over the number of signals.
//! - [`reproduce`]: the ratio table and figure data of the numerical studies.
//! - [`cli`]: the `seqtest` command-line front end.

pub mod cli;
pub mod error;
pub mod evaluate;
pub mod fsst;
pub mod highdim;
pub mod model;
pub mod plans;
pub mod reproduce;

pub use error::{Error, Result};
pub use evaluate::{
    ess_mixture, eval_exact, eval_exact_with, eval_mc, linear_grid, sig12, sweep_mu, EvalMethod, EvalReport,
    Evaluable, ExactConfig, GridCheck, McConfig, ReportMethod, SweepResult,
};
pub use fsst::{design_fsst, design_fsst_scan, design_fsst_with, n_star_bounds, FsstDesign, FsstOptions};
pub use highdim::{
    asymptotic_optimal_ess, binomial_tail, calibrate, calibrate_fwe, calibrate_gfwe, desk_u_grid, highdim_sweep,
    simulate_familywise, CalibratedLevels, FamilywiseReport, HighDimConfig, HighDimFamily, HighDimOptions,
    HighDimRow, HighDimSweep, Scenario,
};
pub use model::{
    normal_cdf, normal_quantile, normal_sf, normal_upper_quantile, Hypothesis, HypothesisModel, TruthParam,
};
pub use plans::{
    choose_k_st, choose_k_st_with, design_3st, design_fsst_plan, design_gmt, design_gmt_with, design_mod_st,
    design_mod_st_with, design_sprt, design_st, k_hat, Budget, Checkpoint, ErrorKind, Family, GammaRule,
    GmtOptions, KChoice, PlanMeta, Rule, SprtDesign, StatisticMode, TestPlan, ThreeStageVariant, ThresholdingKind,
};
