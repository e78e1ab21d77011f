//! The `seqtest` command-line front end.
//!
//! Subcommands:
//!
//! - `design <family>` prints a plan record followed by `#` summary lines.
//! - `eval` evaluates a plan (from a record or designed on the fly) at a few parameter values.
//! - `sweep` evaluates over a parameter grid and writes CSV.
//! - `calibrate` prints per-stream levels for a signal-recovery problem.
//! - `highdim` runs a signal-recovery sweep and writes CSV.
//! - `reproduce <target>` regenerates the study tables and figure data as CSV files.
//!
//! Flags override keys of the TOML file given with `--config`, which
//! override built-in defaults. `SEQTEST_THREADS` caps the worker threads.
//! Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
//! 4 numerical non-convergence.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{parse_check, parse_grid, ExactSection, HighDimSection, RunConfig};

use crate::error::{Error, Result};
use crate::evaluate::{sig12, sweep_mu, EvalMethod, EvalReport, Evaluable, ExactConfig, McConfig};
use crate::fsst::{design_fsst_with, FsstOptions};
use crate::highdim::{
    calibrate, desk_u_grid, highdim_sweep, HighDimConfig, HighDimFamily, HighDimOptions, HighDimSweep, Scenario,
};
use crate::model::{Hypothesis, HypothesisModel, TruthParam};
use crate::plans::{
    design_3st, design_fsst_plan, design_gmt, design_mod_st, design_sprt, design_st, SprtDesign, TestPlan,
    ThreeStageVariant, ThresholdingKind, PLAN_HEADER, SPRT_HEADER,
};
use crate::reproduce::{self, StudyOptions, ASYMMETRIC, SYMMETRIC};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NONCONVERGENT: i32 = 4;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SEQTEST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "seqtest", version, about = "Design and evaluate multistage sequential tests")]
pub struct Cli {
    /// TOML file with default values for the flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a test and print its plan record.
    Design(DesignArgs),
    /// Evaluate a test at a few parameter values.
    Eval(EvalArgs),
    /// Evaluate a test over a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Per-stream levels for familywise or generalized familywise control.
    Calibrate(CalibrateArgs),
    /// Signal-recovery sweep over the number of signals.
    Highdim(HighDimArgs),
    /// Regenerate the ratio table or figure data as CSV.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Fsst,
    #[value(name = "3st")]
    ThreeStage,
    Gmt,
    St,
    Modst,
    Sprt,
}

impl FamilyArg {
    fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, false).map_err(|_| {
            Error::Config(format!("family must be one of fsst, 3st, gmt, st, modst, sprt, got '{s}'"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum GammaRuleArg {
    #[default]
    Optimize,
    ThetaSqrtLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum VariantArg {
    #[default]
    LordenMarkov,
    GmtK0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Known,
    Upper,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Known => Scenario::KnownCount,
            ScenarioArg::Upper => Scenario::UpperBoundOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Table1,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    All,
}

/// Flags shared by the commands that design a binary test.
#[derive(Debug, Clone, Default, Args)]
pub struct TestArgs {
    /// `gaussian:<eta>` or `bernoulli:<p0>,<p1>` [default: gaussian:0.5].
    #[arg(long)]
    pub model: Option<String>,
    /// Type-I error level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Type-II error level.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of stages (st, modst).
    #[arg(long = "K", id = "K")]
    pub k: Option<usize>,
    /// How the GMT chooses the levels of its first opportunities.
    #[arg(long, value_enum, default_value_t = GammaRuleArg::Optimize)]
    pub gamma_rule: GammaRuleArg,
    /// Construction of the 3-Stage Test.
    #[arg(long, value_enum, default_value_t = VariantArg::LordenMarkov)]
    pub variant: VariantArg,
    /// Use the smallest feasible Gaussian FSST threshold instead of the midpoint.
    #[arg(long)]
    pub strict_cstar: bool,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// One of fsst, 3st, gmt, st, modst, sprt.
    pub family: Option<String>,
    #[command(flatten)]
    pub test: TestArgs,
    /// Write the record here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Flags shared by `eval` and `sweep`.
#[derive(Debug, Args)]
pub struct EvalSource {
    /// Plan or SPRT record written by `design`.
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    pub plan: Option<PathBuf>,
    /// Family to design on the fly when no record is given.
    #[arg(long)]
    pub family: Option<String>,
    #[command(flatten)]
    pub test: TestArgs,
    /// Exact recursion (default) or Monte Carlo; the SPRT always uses Monte Carlo.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Monte Carlo replicates.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Seed of the Monte Carlo streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pair Monte Carlo replicates with mirrored noise.
    #[arg(long)]
    pub antithetic: bool,
    /// Simpson nodes of the Gaussian grid recursion (odd).
    #[arg(long)]
    pub points: Option<usize>,
    /// Resolution self-check: off, half or double.
    #[arg(long)]
    pub check: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: EvalSource,
    /// Comma-separated parameter values [default: the two hypotheses].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu: Vec<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: EvalSource,
    /// Parameter grid `lo:hi:n`, both ends included [default: -0.6:0.6:100].
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// CSV output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Number of streams.
    #[arg(long)]
    pub m: Option<u64>,
    /// Smallest possible number of signals [default: 0].
    #[arg(long)]
    pub l: Option<u64>,
    /// Largest possible number of signals.
    #[arg(long)]
    pub u: Option<u64>,
    /// False detections that count as a familywise type-I error [default: 1].
    #[arg(long)]
    pub kappa: Option<u64>,
    /// Missed signals that count as a familywise type-II error [default: 1].
    #[arg(long)]
    pub iota: Option<u64>,
    /// Familywise type-I level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Familywise type-II level.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HighDimArgs {
    /// `known`: exactly u signals; `upper`: between 0 and u signals.
    #[arg(long, value_enum, default_value_t = ScenarioArg::Known)]
    pub scenario: ScenarioArg,
    /// Number of streams [default: 1000000].
    #[arg(long)]
    pub m: Option<u64>,
    /// Comma-separated signal counts [default: the 30-point desk grid].
    #[arg(long = "u", value_delimiter = ',')]
    pub u: Vec<u64>,
    /// Familywise type-I level [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Familywise type-II level [default: 0.05].
    #[arg(long)]
    pub beta: Option<f64>,
    /// False detections that count as a familywise type-I error [default: 1].
    #[arg(long)]
    pub kappa: Option<u64>,
    /// Missed signals that count as a familywise type-II error [default: 1].
    #[arg(long)]
    pub iota: Option<u64>,
    /// Comma-separated families among fsst, gmt, st, modst, sprt [default: all].
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<String>,
    /// Largest stage count tried for st and modst [default: 10].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// `gaussian:<eta>` or `bernoulli:<p0>,<p1>` [default: gaussian:0.5].
    #[arg(long)]
    pub model: Option<String>,
    /// Seed of the SPRT Monte Carlo streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates for the SPRT.
    #[arg(long)]
    pub reps: Option<usize>,
    /// CSV output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Seed of the SPRT Monte Carlo streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates for the SPRT.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Parameter grid `lo:hi:n` of the ESS curves [default: -0.6:0.6:100].
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Number of streams of the signal-recovery sweeps [default: 1000000].
    #[arg(long)]
    pub streams: Option<u64>,
    /// Output directory [default: current directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut out = io::stdout();
    match execute_threaded(cli, &mut out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        Error::NonConvergent { .. } => EXIT_NONCONVERGENT,
        _ => EXIT_CONFIG,
    }
}

/// Runs `cli` inside a thread pool sized by [`THREADS_ENV`], if set.
pub fn execute_threaded(cli: Cli, out: &mut (dyn Write + Send)) -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| execute(cli, out))
        }
        Err(_) => execute(cli, out),
    }
}

/// Runs a parsed command, writing its standard output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Design(a) => cmd_design(&a, &cfg, out),
        Command::Eval(a) => cmd_eval(&a, &cfg, out),
        Command::Sweep(a) => cmd_sweep(&a, &cfg, out),
        Command::Calibrate(a) => cmd_calibrate(&a, &cfg, out),
        Command::Highdim(a) => cmd_highdim(&a, &cfg, out),
        Command::Reproduce(a) => cmd_reproduce(&a, &cfg, out),
    }
}

/// A designed plan or SPRT.
#[derive(Debug, Clone, PartialEq)]
pub enum Designed {
    Plan(TestPlan),
    Sprt(SprtDesign),
}

impl Designed {
    fn as_evaluable(&self) -> &dyn Evaluable {
        match self {
            Designed::Plan(p) => p,
            Designed::Sprt(s) => s,
        }
    }

    /// Reads a plan or SPRT record.
    pub fn parse(text: &str) -> Result<Self> {
        match text.lines().next().map(str::trim) {
            Some(PLAN_HEADER) => Ok(Designed::Plan(text.parse()?)),
            Some(SPRT_HEADER) => Ok(Designed::Sprt(text.parse()?)),
            _ => Err(Error::Parse {
                line: 1,
                msg: format!("expected '{PLAN_HEADER}' or '{SPRT_HEADER}'"),
            }),
        }
    }
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T> {
    flag.or(file)
        .ok_or_else(|| Error::Config(format!("--{name} is required (flag or config key)")))
}

fn resolve_model(flag: Option<&str>, cfg: &RunConfig) -> Result<HypothesisModel> {
    let spec = flag.or(cfg.model.as_deref()).unwrap_or("gaussian:0.5");
    spec.parse()
}

/// Designs a test from flags, falling back to config keys.
pub fn design_from(family: FamilyArg, t: &TestArgs, cfg: &RunConfig) -> Result<(HypothesisModel, Designed)> {
    let model = resolve_model(t.model.as_deref(), cfg)?;
    let alpha = required(t.alpha, cfg.alpha, "alpha")?;
    let beta = required(t.beta, cfg.beta, "beta")?;
    let k = t.k.or(cfg.k);
    let stages = || k.ok_or_else(|| Error::Config("--K is required for st and modst".into()));
    let designed = match family {
        FamilyArg::Fsst => Designed::Plan(design_fsst_plan(
            &model,
            alpha,
            beta,
            FsstOptions {
                strict_cstar: t.strict_cstar,
            },
        )?),
        FamilyArg::ThreeStage => {
            let variant = match t.variant {
                VariantArg::LordenMarkov => ThreeStageVariant::LordenMarkov,
                VariantArg::GmtK0 => ThreeStageVariant::GmtK0,
            };
            Designed::Plan(design_3st(&model, alpha, beta, variant)?)
        }
        FamilyArg::Gmt => {
            let rule = match t.gamma_rule {
                GammaRuleArg::Optimize => crate::plans::GammaRule::OptimizeEssBound,
                GammaRuleArg::ThetaSqrtLog => crate::plans::GammaRule::ThetaSqrtLog,
            };
            Designed::Plan(design_gmt(&model, alpha, beta, rule)?)
        }
        FamilyArg::St => Designed::Plan(design_st(&model, alpha, beta, stages()?)?),
        FamilyArg::Modst => Designed::Plan(design_mod_st(&model, alpha, beta, stages()?)?),
        FamilyArg::Sprt => Designed::Sprt(design_sprt(alpha, beta)?),
    };
    Ok((model, designed))
}

/// Opens `path` for writing, or falls back to `stdout`.
fn with_output(path: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn summary_lines(model: &HypothesisModel, d: &Designed, strict: bool) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    match d {
        Designed::Sprt(s) => lines.push(format!("# upper={:.6} lower={:.6}", s.a, s.b)),
        Designed::Plan(p) => {
            let fsst = design_fsst_with(model, p.meta.alpha, p.meta.beta, FsstOptions { strict_cstar: strict })?;
            if p.checkpoints.len() == 1 {
                if let crate::plans::Rule::Final(c) = p.checkpoints[0].rule {
                    lines.push(format!("# n={} c={c:.4}", p.checkpoints[0].n));
                }
            }
            if let (Some(k0), Some(k1)) = (p.meta.param("k0"), p.meta.param("k1")) {
                lines.push(format!("# K0={k0} K1={k1}"));
            }
            lines.push(format!(
                "# checkpoints={} opportunities={} max_n={} n_star={}",
                p.checkpoints.len(),
                p.opportunities(),
                p.max_n(),
                fsst.n_star
            ));
            if !p.meta.budgets.is_empty() {
                lines.push(format!(
                    "# budget type1={} type2={}",
                    sig12(p.meta.budget_total(crate::plans::ErrorKind::TypeI)),
                    sig12(p.meta.budget_total(crate::plans::ErrorKind::TypeII))
                ));
            }
        }
    }
    Ok(lines)
}

fn cmd_design(a: &DesignArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let name = required(a.family.clone(), cfg.family.clone(), "family")?;
    let (model, designed) = design_from(FamilyArg::parse(&name)?, &a.test, cfg)?;
    let record = match &designed {
        Designed::Plan(p) => p.to_string(),
        Designed::Sprt(s) => s.to_string(),
    };
    let summary = summary_lines(&model, &designed, a.test.strict_cstar)?;
    with_output(a.out.as_deref().or(cfg.out.as_deref()), stdout, |w| {
        w.write_all(record.as_bytes())?;
        for line in &summary {
            writeln!(w, "{line}")?;
        }
        Ok(())
    })
}

fn load_source(src: &EvalSource, cfg: &RunConfig) -> Result<(HypothesisModel, Designed)> {
    if let Some(path) = &src.plan {
        let designed = Designed::parse(&std::fs::read_to_string(path)?)?;
        let model = match &designed {
            Designed::Plan(p) => p.meta.model,
            Designed::Sprt(_) => resolve_model(src.test.model.as_deref(), cfg)?,
        };
        return Ok((model, designed));
    }
    let name = required(src.family.clone(), cfg.family.clone(), "family")?;
    design_from(FamilyArg::parse(&name)?, &src.test, cfg)
}

fn method_from(src: &EvalSource, cfg: &RunConfig, designed: &Designed) -> Result<EvalMethod> {
    let method = match (src.method, cfg.method.as_deref()) {
        (Some(m), _) => m,
        (None, Some("exact")) => MethodArg::Exact,
        (None, Some("mc")) => MethodArg::Mc,
        (None, Some(other)) => return Err(Error::Config(format!("method must be exact or mc, got '{other}'"))),
        (None, None) => match designed {
            Designed::Plan(_) => MethodArg::Exact,
            Designed::Sprt(_) => MethodArg::Mc,
        },
    };
    Ok(match method {
        MethodArg::Exact => {
            let mut exact = cfg.exact_config(ExactConfig::default())?;
            if let Some(p) = src.points {
                exact.points = p;
            }
            if let Some(c) = &src.check {
                exact.check = parse_check(c)?;
            }
            EvalMethod::Exact(exact)
        }
        MethodArg::Mc => EvalMethod::MonteCarlo(McConfig {
            reps: src.reps.or(cfg.reps).unwrap_or(McConfig::default().reps),
            seed: src.seed.or(cfg.seed).unwrap_or(0),
            antithetic: src.antithetic,
        }),
    })
}

fn evaluate_one(item: &dyn Evaluable, model: &HypothesisModel, truth: TruthParam, method: &EvalMethod) -> Result<EvalReport> {
    match method {
        EvalMethod::Exact(c) => item.exact(model, truth, c),
        EvalMethod::MonteCarlo(mc) => item.monte_carlo(model, truth, mc),
    }
}

fn cmd_eval(a: &EvalArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let (model, designed) = load_source(&a.source, cfg)?;
    let method = method_from(&a.source, cfg, &designed)?;
    let truths: Vec<TruthParam> = if a.mu.is_empty() {
        vec![model.truth_under(Hypothesis::Null), model.truth_under(Hypothesis::Alternative)]
    } else {
        a.mu.iter().map(|&m| TruthParam(m)).collect()
    };
    let item = designed.as_evaluable();
    let (alpha, beta) = item.levels();
    let n_star = crate::fsst::design_fsst(&model, alpha, beta)?.n_star;
    let reports = truths
        .iter()
        .map(|&t| evaluate_one(item, &model, t, &method))
        .collect::<Result<Vec<_>>>()?;
    with_output(a.out.as_deref(), stdout, |w| {
        writeln!(w, "# {} under {model}, alpha={alpha:e}, beta={beta:e}, n_star={n_star}", item.label())?;
        for r in &reports {
            write!(
                w,
                "mu={} ess={} ess_over_nstar={} type1={} type2={} method={}",
                sig12(r.truth.0),
                sig12(r.ess),
                sig12(r.ess / n_star as f64),
                sig12(r.type1),
                sig12(r.type2),
                r.method.name()
            )?;
            if let Some(se) = r.se_ess() {
                write!(w, " se_ess={}", sig12(se))?;
            }
            writeln!(w)?;
            for (n, (acc, rej)) in r.checkpoints.iter().zip(&r.stop_mass) {
                writeln!(w, "  n={n} accept={} reject={}", sig12(*acc), sig12(*rej))?;
            }
        }
        Ok(())
    })
}

fn cmd_sweep(a: &SweepArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let (model, designed) = load_source(&a.source, cfg)?;
    let method = method_from(&a.source, cfg, &designed)?;
    let grid = parse_grid(a.grid.as_deref().or(cfg.grid.as_deref()).unwrap_or("-0.6:0.6:100"))?;
    let sweep = sweep_mu(designed.as_evaluable(), &model, &grid, &method)?;
    with_output(a.out.as_deref().or(cfg.out.as_deref()), stdout, |w| sweep.write_csv(w))
}

fn cmd_calibrate(a: &CalibrateArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let h = cfg.highdim.clone().unwrap_or_default();
    let hd = HighDimConfig {
        m: required(a.m, h.m, "m")?,
        l: a.l.or(h.l).unwrap_or(0),
        u: required(a.u, h.u, "u")?,
        kappa: a.kappa.or(h.kappa).unwrap_or(1),
        iota: a.iota.or(h.iota).unwrap_or(1),
        alpha: required(a.alpha, h.alpha.or(cfg.alpha), "alpha")?,
        beta: required(a.beta, h.beta.or(cfg.beta), "beta")?,
    };
    let levels = calibrate(&hd)?;
    let kind = if hd.kappa == 1 && hd.iota == 1 { "fwe" } else { "gfwe" };
    writeln!(stdout, "control={kind}")?;
    writeln!(stdout, "alpha_stream={}", sig12(levels.alpha_stream))?;
    writeln!(stdout, "beta_stream={}", sig12(levels.beta_stream))?;
    Ok(())
}

fn parse_highdim_family(s: &str) -> Result<HighDimFamily> {
    HighDimFamily::ALL
        .into_iter()
        .find(|f| f.name() == s.trim())
        .ok_or_else(|| Error::Config(format!("high-dimensional family must be one of fsst, gmt, st, modst, sprt, got '{s}'")))
}

fn cmd_highdim(a: &HighDimArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let h = cfg.highdim.clone().unwrap_or_default();
    let model = resolve_model(a.model.as_deref(), cfg)?;
    let m = a.m.or(h.m).unwrap_or(1_000_000);
    let scenario = Scenario::from(a.scenario);
    let base = HighDimConfig {
        m,
        l: 0,
        u: 1,
        kappa: a.kappa.or(h.kappa).unwrap_or(1),
        iota: a.iota.or(h.iota).unwrap_or(1),
        alpha: a.alpha.or(h.alpha).unwrap_or(0.05),
        beta: a.beta.or(h.beta).unwrap_or(0.05),
    };
    let u_values = if !a.u.is_empty() {
        a.u.clone()
    } else if let Some(u) = h.u {
        vec![u]
    } else {
        desk_u_grid(m, scenario)
    };
    let families = if a.families.is_empty() {
        HighDimFamily::ALL.to_vec()
    } else {
        a.families.iter().map(|f| parse_highdim_family(f)).collect::<Result<Vec<_>>>()?
    };
    let mut opts = HighDimOptions::default();
    opts.k_max = a.k_max.or(h.k_max).unwrap_or(opts.k_max);
    opts.exact = cfg.exact_config(opts.exact)?;
    opts.mc.seed = a.seed.or(cfg.seed).unwrap_or(0);
    opts.mc.reps = a.reps.or(cfg.reps).unwrap_or(opts.mc.reps);
    let sweep = highdim_sweep(&base, &model, &u_values, scenario, &families, &opts)?;
    with_output(a.out.as_deref().or(cfg.out.as_deref()), stdout, |w| sweep.write_csv(w))
}

fn study_options(a: &ReproduceArgs, cfg: &RunConfig) -> Result<StudyOptions> {
    let mut opts = StudyOptions::default();
    opts.seed = a.seed.or(cfg.seed).unwrap_or(opts.seed);
    opts.reps = a.reps.or(cfg.reps).unwrap_or(opts.reps);
    if let Some(g) = a.grid.as_deref().or(cfg.grid.as_deref()) {
        opts.grid = parse_grid(g)?;
    }
    opts.exact = cfg.exact_config(opts.exact)?;
    let h = cfg.highdim.clone().unwrap_or_default();
    opts.streams = a.streams.or(h.m).unwrap_or(opts.streams);
    opts.highdim.k_max = h.k_max.unwrap_or(opts.highdim.k_max);
    Ok(opts)
}

fn write_file(dir: &Path, name: &str, log: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let path = dir.join(name);
    with_output(Some(&path), log, f)?;
    writeln!(log, "wrote {}", path.display())?;
    Ok(())
}

/// Restricts a sweep to the given families.
fn only(sweep: &HighDimSweep, families: &[HighDimFamily]) -> HighDimSweep {
    HighDimSweep {
        rows: sweep.rows.iter().filter(|r| families.contains(&r.family)).cloned().collect(),
        ..sweep.clone()
    }
}

fn cmd_reproduce(a: &ReproduceArgs, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let opts = study_options(a, cfg)?;
    let dir = a.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let wants = |t: Target| a.target == t || a.target == Target::All;

    if wants(Target::Table1) {
        let rows = reproduce::table1(&opts)?;
        write_file(&dir, "table1.csv", stdout, |w| reproduce::write_table1_csv(&rows, w))?;
        stdout.write_all(reproduce::format_table1(&rows).as_bytes())?;
    }
    if wants(Target::Fig1) {
        for (setup, name) in [(SYMMETRIC, "fig1a.csv"), (ASYMMETRIC, "fig1b.csv")] {
            let series = reproduce::fig1(&setup, &opts)?;
            write_file(&dir, name, stdout, |w| reproduce::write_series_csv(&series, w))?;
        }
    }
    if wants(Target::Fig2) {
        let panels = [
            (SYMMETRIC, ThresholdingKind::St, "fig2a.csv"),
            (SYMMETRIC, ThresholdingKind::ModSt, "fig2b.csv"),
            (ASYMMETRIC, ThresholdingKind::St, "fig2c.csv"),
            (ASYMMETRIC, ThresholdingKind::ModSt, "fig2d.csv"),
        ];
        for (setup, kind, name) in panels {
            let series = reproduce::fig2(&setup, kind, reproduce::fig2_k_max(&setup), &opts)?;
            write_file(&dir, name, stdout, |w| reproduce::write_series_csv(&series, w))?;
        }
    }
    let stage_only = a.target == Target::Fig3;
    for (scenario, fig3_name, ess_name, ess_target) in [
        (Scenario::KnownCount, "fig3a.csv", "fig4.csv", Target::Fig4),
        (Scenario::UpperBoundOnly, "fig3b.csv", "fig5.csv", Target::Fig5),
    ] {
        if !(wants(Target::Fig3) || wants(ess_target)) {
            continue;
        }
        let families: &[HighDimFamily] = if stage_only {
            &reproduce::MULTISTAGE_FAMILIES
        } else {
            &HighDimFamily::ALL
        };
        let sweep = reproduce::highdim_study(scenario, families, &opts)?;
        if wants(Target::Fig3) {
            let stages = only(&sweep, &reproduce::MULTISTAGE_FAMILIES);
            write_file(&dir, fig3_name, stdout, |w| stages.write_csv(w))?;
        }
        if wants(ess_target) {
            write_file(&dir, ess_name, stdout, |w| sweep.write_csv(w))?;
        }
    }
    Ok(())
}
