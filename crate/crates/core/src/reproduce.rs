//! Numerical studies: the Table I ratio table, the ESS-against-mean curves
//! and the signal-recovery sweeps, all written as CSV.

use std::io::Write;

use crate::error::Result;
use crate::evaluate::{
    linear_grid, sig12, sweep_mu, EvalMethod, EvalReport, Evaluable, ExactConfig, McConfig, SweepResult,
};
use crate::fsst::design_fsst;
use crate::highdim::{desk_u_grid, highdim_sweep, HighDimConfig, HighDimFamily, HighDimOptions, HighDimSweep, Scenario};
use crate::model::{HypothesisModel, TruthParam};
use crate::plans::{design_gmt, design_mod_st, design_sprt, design_st, GammaRule, ThresholdingKind};

/// Error levels and matching ST/mod-ST stage count of a binary-testing study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setup {
    pub name: &'static str,
    pub alpha: f64,
    pub beta: f64,
    /// Stage count giving ST and mod-ST as many stages as the GMT.
    pub k: usize,
}

pub const SYMMETRIC: Setup = Setup {
    name: "symmetric",
    alpha: 1e-6,
    beta: 1e-6,
    k: 3,
};

pub const ASYMMETRIC: Setup = Setup {
    name: "asymmetric",
    alpha: 1e-12,
    beta: 1e-2,
    k: 5,
};

pub const SETUPS: [Setup; 2] = [SYMMETRIC, ASYMMETRIC];

/// Gaussian mean model used throughout the studies.
pub fn study_model() -> HypothesisModel {
    HypothesisModel::gaussian(0.5).expect("0.5 is a valid mean")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub seed: u64,
    /// Monte Carlo replicates per parameter value (SPRT).
    pub reps: usize,
    /// Parameter values of the ESS curves and the worst-case search.
    pub grid: Vec<TruthParam>,
    pub exact: ExactConfig,
    pub highdim: HighDimOptions,
    /// Number of streams in the signal-recovery sweeps.
    pub streams: u64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            reps: 100_000,
            grid: linear_grid(-0.6, 0.6, 100),
            exact: ExactConfig::default(),
            highdim: HighDimOptions::default(),
            streams: 1_000_000,
        }
    }
}

impl StudyOptions {
    fn mc(&self) -> McConfig {
        McConfig {
            reps: self.reps,
            seed: self.seed,
            antithetic: false,
        }
    }
}

/// One entry of the ratio table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCell {
    pub mu: f64,
    /// ESS divided by the FSST sample size.
    pub ratio: f64,
    /// Standard error of `ratio` for simulated entries.
    pub se: Option<f64>,
}

impl RatioCell {
    fn new(r: &EvalReport, n_star: usize) -> Self {
        Self {
            mu: r.truth.0,
            ratio: r.ess / n_star as f64,
            se: r.se_ess().map(|s| s / n_star as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub setup: &'static str,
    pub family: &'static str,
    pub k: Option<usize>,
    pub n_star: usize,
    pub null: RatioCell,
    pub worst: RatioCell,
    pub alternative: RatioCell,
}

/// Expected sample size relative to the FSST for the GMT, ST, mod-ST
/// (exact) and the SPRT (simulated), at `μ = −η`, at the worst grid value
/// and at `μ = +η`, for both setups.
pub fn table1(opts: &StudyOptions) -> Result<Vec<Table1Row>> {
    let model = study_model();
    let eta = 0.5;
    let mut rows = Vec::new();
    for setup in SETUPS {
        let n_star = design_fsst(&model, setup.alpha, setup.beta)?.n_star;
        let exact = EvalMethod::Exact(opts.exact);
        let mc = EvalMethod::MonteCarlo(opts.mc());
        let items: Vec<(&'static str, Option<usize>, Box<dyn Evaluable>, EvalMethod)> = vec![
            ("gmt", None, Box::new(design_gmt(&model, setup.alpha, setup.beta, GammaRule::OptimizeEssBound)?), exact),
            ("st", Some(setup.k), Box::new(design_st(&model, setup.alpha, setup.beta, setup.k)?), exact),
            ("modst", Some(setup.k), Box::new(design_mod_st(&model, setup.alpha, setup.beta, setup.k)?), exact),
            ("sprt", None, Box::new(design_sprt(setup.alpha, setup.beta)?), mc),
        ];
        for (family, k, item, method) in items {
            let at = |mu: f64| -> Result<EvalReport> {
                match &method {
                    EvalMethod::Exact(cfg) => item.exact(&model, TruthParam(mu), cfg),
                    EvalMethod::MonteCarlo(mc) => item.monte_carlo(&model, TruthParam(mu), mc),
                }
            };
            let sweep = sweep_mu(item.as_ref(), &model, &opts.grid, &method)?;
            rows.push(Table1Row {
                setup: setup.name,
                family,
                k,
                n_star,
                null: RatioCell::new(&at(-eta)?, n_star),
                worst: RatioCell::new(sweep.worst_case(), n_star),
                alternative: RatioCell::new(&at(eta)?, n_star),
            });
        }
    }
    Ok(rows)
}

pub const TABLE1_HEADER: [&str; 13] = [
    "setup",
    "family",
    "K",
    "n_star",
    "ratio_null",
    "se_null",
    "worst_mu",
    "ratio_worst",
    "se_worst",
    "ratio_alt",
    "se_alt",
    "mu_null",
    "mu_alt",
];

pub fn write_table1_csv<W: Write>(rows: &[Table1Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE1_HEADER)?;
    let se = |c: &RatioCell| c.se.map(sig12).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.setup.to_string(),
            r.family.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.n_star.to_string(),
            sig12(r.null.ratio),
            se(&r.null),
            sig12(r.worst.mu),
            sig12(r.worst.ratio),
            se(&r.worst),
            sig12(r.alternative.ratio),
            se(&r.alternative),
            sig12(r.null.mu),
            sig12(r.alternative.mu),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plain-text rendering of the ratio table.
pub fn format_table1(rows: &[Table1Row]) -> String {
    let mut out = String::new();
    for setup in SETUPS {
        out.push_str(&format!(
            "{} (alpha = {:e}, beta = {:e})\n{:<11} {:>10} {:>10} {:>10}\n",
            setup.name, setup.alpha, setup.beta, "test", "mu=-eta", "worst", "mu=+eta"
        ));
        for r in rows.iter().filter(|r| r.setup == setup.name) {
            let name = match r.k {
                Some(k) => format!("{}(K={k})", r.family),
                None => r.family.to_string(),
            };
            out.push_str(&format!(
                "{:<11} {:>10.4} {:>10.4} {:>10.4}\n",
                name, r.null.ratio, r.worst.ratio, r.alternative.ratio
            ));
        }
    }
    out
}

/// A named curve of ESS against the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub family: &'static str,
    pub k: Option<usize>,
    pub sweep: SweepResult,
}

/// ESS curves of the FSST, GMT, ST, mod-ST and SPRT for one setup.
pub fn fig1(setup: &Setup, opts: &StudyOptions) -> Result<Vec<Series>> {
    let model = study_model();
    let (a, b) = (setup.alpha, setup.beta);
    let exact = EvalMethod::Exact(opts.exact);
    let fsst = crate::plans::design_fsst_plan(&model, a, b, Default::default())?;
    let gmt = design_gmt(&model, a, b, GammaRule::OptimizeEssBound)?;
    let st = design_st(&model, a, b, setup.k)?;
    let mod_st = design_mod_st(&model, a, b, setup.k)?;
    let sprt = design_sprt(a, b)?;
    Ok(vec![
        Series { family: "fsst", k: None, sweep: sweep_mu(&fsst, &model, &opts.grid, &exact)? },
        Series { family: "gmt", k: None, sweep: sweep_mu(&gmt, &model, &opts.grid, &exact)? },
        Series { family: "st", k: Some(setup.k), sweep: sweep_mu(&st, &model, &opts.grid, &exact)? },
        Series { family: "modst", k: Some(setup.k), sweep: sweep_mu(&mod_st, &model, &opts.grid, &exact)? },
        Series {
            family: "sprt",
            k: None,
            sweep: sweep_mu(&sprt, &model, &opts.grid, &EvalMethod::MonteCarlo(opts.mc()))?,
        },
    ])
}

/// ESS curves of ST or mod-ST for `K = 1..=k_max`.
pub fn fig2(setup: &Setup, kind: ThresholdingKind, k_max: usize, opts: &StudyOptions) -> Result<Vec<Series>> {
    let model = study_model();
    let exact = EvalMethod::Exact(opts.exact);
    (1..=k_max)
        .map(|k| {
            let (family, plan) = match kind {
                ThresholdingKind::St => ("st", design_st(&model, setup.alpha, setup.beta, k)?),
                ThresholdingKind::ModSt => ("modst", design_mod_st(&model, setup.alpha, setup.beta, k)?),
            };
            Ok(Series {
                family,
                k: Some(k),
                sweep: sweep_mu(&plan, &model, &opts.grid, &exact)?,
            })
        })
        .collect()
}

/// Largest stage count shown for each setup in the ST/mod-ST curves.
pub fn fig2_k_max(setup: &Setup) -> usize {
    if setup.name == SYMMETRIC.name {
        4
    } else {
        6
    }
}

pub const SERIES_HEADER: [&str; 9] = ["family", "K", "mu", "ess", "ess_over_nstar", "type1", "type2", "se_ess", "method"];

/// Long-format CSV: the sweep columns prefixed by the series name and stage count.
pub fn write_series_csv<W: Write>(series: &[Series], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SERIES_HEADER)?;
    for s in series {
        for r in &s.sweep.rows {
            w.write_record([
                s.family.to_string(),
                s.k.map(|k| k.to_string()).unwrap_or_default(),
                sig12(r.truth.0),
                sig12(r.ess),
                sig12(r.ess / s.sweep.n_star as f64),
                sig12(r.type1),
                sig12(r.type2),
                r.se_ess().map(sig12).unwrap_or_default(),
                r.method.name().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Global levels of the signal-recovery study.
pub fn study_highdim_base(streams: u64) -> Result<HighDimConfig> {
    HighDimConfig::fwe(streams, 0, 1, 0.05, 0.05)
}

/// Signal-recovery sweep over the desk-scale grid of signal counts.
pub fn highdim_study(scenario: Scenario, families: &[HighDimFamily], opts: &StudyOptions) -> Result<HighDimSweep> {
    let base = study_highdim_base(opts.streams)?;
    let mut highdim = opts.highdim;
    highdim.mc = opts.mc();
    let grid = desk_u_grid(opts.streams, scenario);
    highdim_sweep(&base, &study_model(), &grid, scenario, families, &highdim)
}

/// Families whose stage counts are plotted.
pub const MULTISTAGE_FAMILIES: [HighDimFamily; 3] = [HighDimFamily::Gmt, HighDimFamily::St, HighDimFamily::ModSt];
