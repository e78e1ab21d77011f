//! Signal recovery across many independent streams.
//!
//! Each of `m` streams carries either noise (the null) or a signal (the
//! alternative). With between `l` and `u` signals, running the same binary
//! test on every stream at the per-stream levels computed here keeps the
//! probability of `κ` or more false detections below `α` and the probability
//! of `ι` or more missed signals below `β`. `κ = ι = 1` is classical
//! familywise error control.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::beta::beta_reg;
use statrs::function::factorial::ln_binomial;

use crate::error::{check_level, Error, Result};
use crate::evaluate::monte_carlo::{Noise, PlanSampler};
use crate::evaluate::{eval_exact_with, eval_mc, sig12, ExactConfig, GridCheck, McConfig};
use crate::model::{Hypothesis, HypothesisModel};
use crate::plans::{
    choose_k_st_with, design_fsst_plan, design_gmt, design_sprt, GammaRule, TestPlan, ThresholdingKind,
};
use crate::fsst::FsstOptions;

/// Largest `n` for which [`binomial_tail`] sums probabilities directly.
const DIRECT_TAIL_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighDimConfig {
    /// Number of streams.
    pub m: u64,
    /// Smallest possible number of signals.
    pub l: u64,
    /// Largest possible number of signals.
    pub u: u64,
    /// Number of false detections that counts as a familywise type-I error.
    pub kappa: u64,
    /// Number of missed signals that counts as a familywise type-II error.
    pub iota: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl HighDimConfig {
    /// Classical familywise control (`κ = ι = 1`).
    pub fn fwe(m: u64, l: u64, u: u64, alpha: f64, beta: f64) -> Result<Self> {
        let cfg = Self {
            m,
            l,
            u,
            kappa: 1,
            iota: 1,
            alpha,
            beta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_level("alpha", self.alpha)?;
        check_level("beta", self.beta)?;
        let Self { m, l, u, kappa, iota, .. } = *self;
        if !(l <= u && u <= m && u > 0 && l < m) {
            return Err(Error::Config(format!(
                "signal bounds need 0 <= l <= u <= m, u > 0 and l < m (got m = {m}, l = {l}, u = {u})"
            )));
        }
        if kappa == 0 || kappa > m - l {
            return Err(Error::Config(format!("kappa must lie in 1..={} (got {kappa})", m - l)));
        }
        if iota == 0 || iota > u {
            return Err(Error::Config(format!("iota must lie in 1..={u} (got {iota})")));
        }
        Ok(())
    }

    /// Largest possible number of noise streams, `m − l`.
    pub fn max_noise(&self) -> u64 {
        self.m - self.l
    }
}

/// Per-stream error levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedLevels {
    pub alpha_stream: f64,
    pub beta_stream: f64,
}

/// `1 − (1 − level)^(1/count)` without cancellation.
fn per_stream_fwe(level: f64, count: u64) -> f64 {
    -(f64::ln_1p(-level) / count as f64).exp_m1()
}

/// Per-stream levels for classical familywise control; `κ` and `ι` are ignored.
pub fn calibrate_fwe(cfg: &HighDimConfig) -> Result<CalibratedLevels> {
    cfg.validate()?;
    Ok(CalibratedLevels {
        alpha_stream: per_stream_fwe(cfg.alpha, cfg.max_noise()),
        beta_stream: per_stream_fwe(cfg.beta, cfg.u),
    })
}

/// `P(Bin(n, p) >= k)`.
///
/// Small `n` sums the shorter tail term by term; larger `n` uses the
/// regularized incomplete beta function.
///
/// ```
/// use seqtest::binomial_tail;
/// assert!((binomial_tail(2, 0.5, 2) - 0.25).abs() < 1e-15);
/// assert_eq!(binomial_tail(7, 0.2, 0), 1.0);
/// ```
pub fn binomial_tail(n: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if k == 1 {
        return -(n as f64 * (-p).ln_1p()).exp_m1();
    }
    if n > DIRECT_TAIL_LIMIT {
        return beta_reg(k as f64, (n - k + 1) as f64, p);
    }
    if k as f64 > n as f64 * p {
        upper_sum(n, p, k)
    } else {
        // P(X >= k) = 1 − P(n − X >= n − k + 1)
        1.0 - upper_sum(n, 1.0 - p, n - k + 1)
    }
}

/// `Σ_{j >= k} P(Bin(n, p) = j)` for `k` at or above the mean, where the
/// terms decrease.
fn upper_sum(n: u64, p: f64, k: u64) -> f64 {
    let ratio = p / (1.0 - p);
    let mut term = (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp();
    let mut sum = 0.0;
    let mut j = k;
    loop {
        sum += term;
        if j == n || term <= sum * 1e-17 {
            return sum;
        }
        term *= (n - j) as f64 / (j + 1) as f64 * ratio;
        j += 1;
    }
}

/// Largest `p` with `P(Bin(n, p) >= k) <= level`, by bisection.
fn largest_p(n: u64, k: u64, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if binomial_tail(n, mid, k) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Per-stream levels for generalized familywise control.
pub fn calibrate_gfwe(cfg: &HighDimConfig) -> Result<CalibratedLevels> {
    cfg.validate()?;
    Ok(CalibratedLevels {
        alpha_stream: largest_p(cfg.max_noise(), cfg.kappa, cfg.alpha),
        beta_stream: largest_p(cfg.u, cfg.iota, cfg.beta),
    })
}

/// Closed-form calibration when `κ = ι = 1`, bisection otherwise.
pub fn calibrate(cfg: &HighDimConfig) -> Result<CalibratedLevels> {
    if cfg.kappa == 1 && cfg.iota == 1 {
        calibrate_fwe(cfg)
    } else {
        calibrate_gfwe(cfg)
    }
}

/// First-order optimal expected average sample size with `s` signals:
/// `(1 − s/m) log(u/ι)/I0 + (s/m) log((m − l)/κ)/I1`.
pub fn asymptotic_optimal_ess(cfg: &HighDimConfig, s: u64, i0: f64, i1: f64) -> Result<f64> {
    cfg.validate()?;
    if s < cfg.l || s > cfg.u {
        return Err(Error::Config(format!("s = {s} lies outside [{}, {}]", cfg.l, cfg.u)));
    }
    if !(i0 > 0.0 && i1 > 0.0) {
        return Err(Error::Model("information numbers must be positive".into()));
    }
    let frac = s as f64 / cfg.m as f64;
    let noise_term = (cfg.u as f64 / cfg.iota as f64).ln() / i0;
    let signal_term = (cfg.max_noise() as f64 / cfg.kappa as f64).ln() / i1;
    Ok((1.0 - frac) * noise_term + frac * signal_term)
}

/// Prior knowledge about the number of signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Exactly `u` signals (`l = u`); streams are weighted by `π = u/m`.
    KnownCount,
    /// At most `u` signals (`l = 0`); `π = u/(2m)` averages over `0..=u` signals.
    UpperBoundOnly,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::KnownCount => "known-count",
            Scenario::UpperBoundOnly => "upper-bound",
        }
    }

    /// Configuration for `u` signals on top of `base` (whose `l` and `u` are replaced).
    pub fn config(self, base: &HighDimConfig, u: u64) -> Result<HighDimConfig> {
        let l = match self {
            Scenario::KnownCount => u,
            Scenario::UpperBoundOnly => 0,
        };
        let cfg = HighDimConfig { l, u, ..*base };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Weight of the alternative in the mixture criterion.
    pub fn pi(self, m: u64, u: u64) -> f64 {
        match self {
            Scenario::KnownCount => u as f64 / m as f64,
            Scenario::UpperBoundOnly => u as f64 / (2.0 * m as f64),
        }
    }
}

/// Tests compared in the signal-recovery sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HighDimFamily {
    Fsst,
    Gmt,
    St,
    ModSt,
    Sprt,
}

impl HighDimFamily {
    pub const ALL: [HighDimFamily; 5] = [
        HighDimFamily::Fsst,
        HighDimFamily::Gmt,
        HighDimFamily::St,
        HighDimFamily::ModSt,
        HighDimFamily::Sprt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HighDimFamily::Fsst => "fsst",
            HighDimFamily::Gmt => "gmt",
            HighDimFamily::St => "st",
            HighDimFamily::ModSt => "modst",
            HighDimFamily::Sprt => "sprt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighDimOptions {
    /// Largest number of stages tried for ST and mod-ST.
    pub k_max: usize,
    /// Grid for the exact evaluations. The default is coarser than
    /// [`ExactConfig::default`]: sweeps design and evaluate hundreds of plans,
    /// and the ESS changes by less than `1e-10` relative between 1001 and
    /// 8001 points at these levels.
    pub exact: ExactConfig,
    /// Used for the SPRT only.
    pub mc: McConfig,
}

impl Default for HighDimOptions {
    fn default() -> Self {
        Self {
            k_max: 10,
            exact: ExactConfig {
                points: 1001,
                check: GridCheck::Half,
                ..ExactConfig::default()
            },
            mc: McConfig::default(),
        }
    }
}

/// One `(u, family)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct HighDimRow {
    pub u: u64,
    pub u_over_m: f64,
    pub family: HighDimFamily,
    /// Selected number of stages (ST and mod-ST).
    pub k: Option<usize>,
    pub levels: CalibratedLevels,
    pub ess_mixture: f64,
    /// Standard error of `ess_mixture` when it is simulated.
    pub se_ess_mixture: Option<f64>,
    /// Largest number of decision stages; `None` for the SPRT.
    pub max_stages: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighDimSweep {
    pub scenario: Scenario,
    pub m: u64,
    pub rows: Vec<HighDimRow>,
}

impl HighDimSweep {
    pub const CSV_HEADER: [&'static str; 9] = [
        "u",
        "u_over_m",
        "family",
        "K",
        "alpha_stream",
        "beta_stream",
        "ess_mixture",
        "max_stages",
        "se_ess_mixture",
    ];

    pub fn rows_for(&self, family: HighDimFamily) -> impl Iterator<Item = &HighDimRow> {
        self.rows.iter().filter(move |r| r.family == family)
    }

    /// Smallest swept `u/m` from which on every larger swept value selects
    /// `K = 1`, or `None` if the largest value does not.
    pub fn collapse_point(&self, family: HighDimFamily) -> Option<f64> {
        let mut rows: Vec<&HighDimRow> = self.rows_for(family).collect();
        rows.sort_by_key(|r| r.u);
        let mut point = None;
        for r in rows.iter().rev() {
            if r.k == Some(1) {
                point = Some(r.u_over_m);
            } else {
                break;
            }
        }
        point
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.u.to_string(),
                sig12(r.u_over_m),
                r.family.name().to_string(),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                sig12(r.levels.alpha_stream),
                sig12(r.levels.beta_stream),
                sig12(r.ess_mixture),
                r.max_stages.map(|k| k.to_string()).unwrap_or_default(),
                r.se_ess_mixture.map(sig12).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Desk-scale grid of signal counts: ten log-spaced values up to `m/100`
/// followed by the multiples of `m/20` (and `0.99 m` when the count is known).
pub fn desk_u_grid(m: u64, scenario: Scenario) -> Vec<u64> {
    let upper = match scenario {
        Scenario::KnownCount => m.saturating_sub(1),
        Scenario::UpperBoundOnly => m,
    };
    let top_log = (m as f64 / 100.0).max(1.0);
    let fractions: Vec<f64> = match scenario {
        Scenario::KnownCount => (1..=19).map(|i| i as f64 * 0.05).chain([0.99]).collect(),
        Scenario::UpperBoundOnly => (1..=20).map(|i| i as f64 * 0.05).collect(),
    };
    let mut grid: Vec<u64> = (0..10)
        .map(|i| (top_log.ln() * i as f64 / 9.0).exp().round() as u64)
        .chain(fractions.iter().map(|f| (f * m as f64).round() as u64))
        .map(|u| u.clamp(1, upper.max(1)))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Designs and evaluates every family for every `u`, with per-stream levels
/// from [`calibrate`] and ST/mod-ST stage counts chosen up to `opts.k_max`.
pub fn highdim_sweep(
    base: &HighDimConfig,
    model: &HypothesisModel,
    u_values: &[u64],
    scenario: Scenario,
    families: &[HighDimFamily],
    opts: &HighDimOptions,
) -> Result<HighDimSweep> {
    if u_values.is_empty() {
        return Err(Error::Config("the list of signal counts is empty".into()));
    }
    let cells: Vec<(u64, HighDimFamily)> = u_values
        .iter()
        .flat_map(|&u| families.iter().map(move |&f| (u, f)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(u, family)| sweep_cell(base, model, u, scenario, family, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(HighDimSweep {
        scenario,
        m: base.m,
        rows,
    })
}

fn sweep_cell(
    base: &HighDimConfig,
    model: &HypothesisModel,
    u: u64,
    scenario: Scenario,
    family: HighDimFamily,
    opts: &HighDimOptions,
) -> Result<HighDimRow> {
    let cfg = scenario.config(base, u)?;
    let levels = calibrate(&cfg)?;
    let pi = scenario.pi(cfg.m, u);
    let (a, b) = (levels.alpha_stream, levels.beta_stream);
    let t0 = model.truth_under(Hypothesis::Null);
    let t1 = model.truth_under(Hypothesis::Alternative);
    let exact_mix = |plan: &TestPlan| -> Result<f64> {
        let e0 = eval_exact_with(plan, model, t0, &opts.exact)?.ess;
        let e1 = eval_exact_with(plan, model, t1, &opts.exact)?.ess;
        Ok((1.0 - pi) * e0 + pi * e1)
    };
    let (k, ess, se, max_stages) = match family {
        HighDimFamily::Fsst => {
            let plan = design_fsst_plan(model, a, b, FsstOptions::default())?;
            (None, exact_mix(&plan)?, None, Some(1))
        }
        HighDimFamily::Gmt => {
            let plan = design_gmt(model, a, b, GammaRule::OptimizeEssBound)?;
            (None, exact_mix(&plan)?, None, Some(plan.opportunities()))
        }
        HighDimFamily::St | HighDimFamily::ModSt => {
            let kind = if family == HighDimFamily::St {
                ThresholdingKind::St
            } else {
                ThresholdingKind::ModSt
            };
            let choice = choose_k_st_with(model, a, b, pi, opts.k_max, kind, &opts.exact)?;
            (Some(choice.k), choice.ess_mixture, None, Some(choice.k))
        }
        HighDimFamily::Sprt => {
            let sprt = design_sprt(a, b)?;
            let r0 = eval_mc(&sprt, model, t0, &opts.mc)?;
            let r1 = eval_mc(&sprt, model, t1, &opts.mc)?;
            let se = match (r0.se_ess(), r1.se_ess()) {
                (Some(s0), Some(s1)) => Some(((1.0 - pi).powi(2) * s0 * s0 + pi * pi * s1 * s1).sqrt()),
                _ => None,
            };
            (None, (1.0 - pi) * r0.ess + pi * r1.ess, se, None)
        }
    };
    Ok(HighDimRow {
        u,
        u_over_m: u as f64 / cfg.m as f64,
        family,
        k,
        levels,
        ess_mixture: ess,
        se_ess_mixture: se,
        max_stages,
    })
}

/// Simulated familywise error rates of a plan applied to every stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilywiseReport {
    pub trials: usize,
    /// Frequency of `κ` or more false detections.
    pub type1: f64,
    /// Frequency of `ι` or more missed signals.
    pub type2: f64,
    pub se_type1: f64,
    pub se_type2: f64,
}

/// Runs `plan` on `cfg.m` independent streams of which `signals` carry the
/// alternative, `trials` times. Trial `t` draws from ChaCha8 stream `t` of `seed`.
pub fn simulate_familywise(
    cfg: &HighDimConfig,
    signals: u64,
    plan: &TestPlan,
    model: &HypothesisModel,
    trials: usize,
    seed: u64,
) -> Result<FamilywiseReport> {
    cfg.validate()?;
    if signals < cfg.l || signals > cfg.u {
        return Err(Error::Config(format!(
            "{signals} signals lie outside [{}, {}]",
            cfg.l, cfg.u
        )));
    }
    if trials < 2 {
        return Err(Error::Config("at least two trials are required".into()));
    }
    let sampler = PlanSampler::new(plan, model)?;
    let t0 = model.truth_under(Hypothesis::Null).0;
    let t1 = model.truth_under(Hypothesis::Alternative).0;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let (e1, e2) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = base.clone();
            rng.set_stream(t as u64);
            let mut noise = Noise::new(rng);
            let mut false_detections = 0;
            let mut misses = 0;
            for stream in 0..cfg.m {
                let is_signal = stream < signals;
                let (_, _, rejected) = sampler.draw(if is_signal { t1 } else { t0 }, &mut noise);
                match (is_signal, rejected) {
                    (false, true) => false_detections += 1,
                    (true, false) => misses += 1,
                    _ => {}
                }
            }
            (
                u64::from(false_detections >= cfg.kappa),
                u64::from(misses >= cfg.iota),
            )
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let n = trials as f64;
    let (p1, p2) = (e1 as f64 / n, e2 as f64 / n);
    let se = |p: f64| (p * (1.0 - p) / (n - 1.0)).sqrt();
    Ok(FamilywiseReport {
        trials,
        type1: p1,
        type2: p2,
        se_type1: se(p1),
        se_type2: se(p2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn direct_tail(n: u64, p: f64, k: u64) -> f64 {
        (k..=n)
            .map(|j| (ln_binomial(n, j) + j as f64 * p.ln() + (n - j) as f64 * (1.0 - p).ln()).exp())
            .sum()
    }

    #[test]
    fn tail_reference_values() {
        assert_relative_eq!(binomial_tail(10, 0.3, 3), 0.6172172136, max_relative = 1e-9);
        assert_relative_eq!(binomial_tail(10, 0.3, 7), 0.0105920784, max_relative = 1e-8);
        assert_eq!(binomial_tail(5, 0.4, 6), 0.0);
        assert_relative_eq!(binomial_tail(2, 0.5, 2), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn tail_branches_agree() {
        for &(n, p, k) in &[(40_u64, 0.2, 5_u64), (40, 0.2, 15), (300, 0.01, 2)] {
            assert_relative_eq!(binomial_tail(n, p, k), direct_tail(n, p, k), max_relative = 1e-12);
        }
        // 50-digit reference; long log-gamma sums lose too many digits here
        assert_relative_eq!(binomial_tail(9000, 0.5, 4400), 0.982_946_080_660_808_31, max_relative = 1e-12);
        // across the switch to the incomplete beta function
        let below = binomial_tail(10_000, 3e-4, 4);
        let above = binomial_tail(10_001, 3e-4, 4);
        assert!(above > below && (above - below) / below < 1e-3);
    }

    #[test]
    fn fwe_reference_values() {
        let cfg = HighDimConfig::fwe(1_000_000, 0, 1_000_000, 0.05, 0.05).unwrap();
        let lv = calibrate_fwe(&cfg).unwrap();
        assert_relative_eq!(lv.alpha_stream, 5.129_329_307_204_953_1e-8, max_relative = 1e-12);
        assert_relative_eq!(lv.beta_stream, lv.alpha_stream, max_relative = 1e-15);
        let cfg = HighDimConfig::fwe(1_000_000, 10_000, 10_000, 0.05, 0.05).unwrap();
        assert_relative_eq!(calibrate_fwe(&cfg).unwrap().beta_stream, 5.129_316_283_767_299_8e-6, max_relative = 1e-12);
        let one = HighDimConfig::fwe(5, 4, 4, 0.07, 0.05).unwrap();
        assert_relative_eq!(calibrate_fwe(&one).unwrap().alpha_stream, 0.07, max_relative = 1e-15);
    }

    #[test]
    fn gfwe_reference_value() {
        let cfg = HighDimConfig {
            m: 10,
            l: 0,
            u: 5,
            kappa: 3,
            iota: 1,
            alpha: 0.1,
            beta: 0.1,
        };
        let lv = calibrate_gfwe(&cfg).unwrap();
        assert_relative_eq!(lv.alpha_stream, 0.115_825_278_029_762_92, max_relative = 1e-12);
    }

    #[test]
    fn invalid_configs() {
        assert!(HighDimConfig::fwe(10, 10, 10, 0.05, 0.05).is_err());
        assert!(HighDimConfig::fwe(10, 3, 2, 0.05, 0.05).is_err());
        assert!(HighDimConfig::fwe(10, 0, 0, 0.05, 0.05).is_err());
        assert!(Scenario::UpperBoundOnly.config(&HighDimConfig::fwe(10, 0, 1, 0.05, 0.05).unwrap(), 10).is_ok());
        assert!(Scenario::KnownCount.config(&HighDimConfig::fwe(10, 0, 1, 0.05, 0.05).unwrap(), 10).is_err());
    }

    #[test]
    fn asymptotic_ess_reference() {
        let cfg = HighDimConfig::fwe(1_000_000, 0, 10_000, 0.05, 0.05).unwrap();
        assert_relative_eq!(asymptotic_optimal_ess(&cfg, 10_000, 0.5, 0.5).unwrap(), 18.512_784_147_672_127, max_relative = 1e-13);
        assert_relative_eq!(asymptotic_optimal_ess(&cfg, 0, 0.5, 0.5).unwrap(), (1e4f64).ln() / 0.5, max_relative = 1e-15);
        assert!(asymptotic_optimal_ess(&cfg, 10_001, 0.5, 0.5).is_err());
    }

    #[test]
    fn desk_grid_shape() {
        let g = desk_u_grid(1_000_000, Scenario::KnownCount);
        assert_eq!(g.len(), 30);
        assert_eq!((g[0], *g.last().unwrap()), (1, 990_000));
        let g = desk_u_grid(1_000_000, Scenario::UpperBoundOnly);
        assert_eq!(g.len(), 30);
        assert_eq!(*g.last().unwrap(), 1_000_000);
        assert!(desk_u_grid(20, Scenario::KnownCount).iter().all(|&u| (1..20).contains(&u)));
    }
}
