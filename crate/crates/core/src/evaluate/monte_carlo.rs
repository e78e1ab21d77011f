//! Seeded Monte Carlo simulation of plans and of the SPRT.
//!
//! Replicate (or antithetic pair) `u` draws from ChaCha8 stream `u` of the
//! configured seed, so results do not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{EvalReport, ReportMethod};
use crate::error::{Error, Result};
use crate::model::{HypothesisModel, TruthParam};
use crate::plans::{SprtDesign, StatisticMode, TestPlan};

const CHUNK: usize = 1024;
const SPRT_STEP_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
    /// Pair replicates with mirrored noise (negated normals, complemented uniforms).
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            reps: 100_000,
            seed: 0,
            antithetic: false,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.reps < 100 {
            return Err(Error::Config(format!("at least 100 replicates are required, got {}", self.reps)));
        }
        if self.antithetic && self.reps % 2 == 1 {
            return Err(Error::Config("antithetic sampling needs an even number of replicates".into()));
        }
        Ok(())
    }

    fn unit_size(&self) -> usize {
        if self.antithetic {
            2
        } else {
            1
        }
    }
}

/// Source of observations for one replicate; `mirror` flips the noise.
pub(crate) struct Noise {
    rng: ChaCha8Rng,
    mirror: bool,
}

impl Noise {
    pub(crate) fn new(rng: ChaCha8Rng) -> Self {
        Self { rng, mirror: false }
    }

    fn normal(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        if self.mirror {
            -z
        } else {
            z
        }
    }

    fn success(&mut self, theta: f64) -> bool {
        let u: f64 = self.rng.random();
        let u = if self.mirror { 1.0 - u } else { u };
        u < theta
    }
}

/// Per-unit statistics accumulated exactly in integers.
#[derive(Default, Clone)]
struct Tally {
    accept: Vec<u64>,
    reject: Vec<u64>,
    units: u64,
    sum_n: u128,
    sum_n2: u128,
    sum_rej: u64,
    sum_rej2: u64,
    sum_acc2: u64,
    max_n: usize,
}

impl Tally {
    fn new(slots: usize) -> Self {
        Self {
            accept: vec![0; slots],
            reject: vec![0; slots],
            ..Self::default()
        }
    }

    fn add_unit(&mut self, outcomes: &[(usize, usize, bool)]) {
        let mut n_u = 0u128;
        let mut rej_u = 0u64;
        for &(slot, n, rejected) in outcomes {
            n_u += n as u128;
            if rejected {
                rej_u += 1;
                self.reject[slot] += 1;
            } else {
                self.accept[slot] += 1;
            }
            self.max_n = self.max_n.max(n);
        }
        let acc_u = outcomes.len() as u64 - rej_u;
        self.units += 1;
        self.sum_n += n_u;
        self.sum_n2 += n_u * n_u;
        self.sum_rej += rej_u;
        self.sum_rej2 += rej_u * rej_u;
        self.sum_acc2 += acc_u * acc_u;
    }

    fn merge(mut self, other: &Tally) -> Self {
        for (a, b) in self.accept.iter_mut().zip(&other.accept) {
            *a += b;
        }
        for (a, b) in self.reject.iter_mut().zip(&other.reject) {
            *a += b;
        }
        self.units += other.units;
        self.sum_n += other.sum_n;
        self.sum_n2 += other.sum_n2;
        self.sum_rej += other.sum_rej;
        self.sum_rej2 += other.sum_rej2;
        self.sum_acc2 += other.sum_acc2;
        self.max_n = self.max_n.max(other.max_n);
        self
    }
}

/// Standard error of the per-replicate mean from unit sums of size `size`.
fn unit_se(sum: f64, sum2: f64, units: f64, size: f64) -> f64 {
    if units < 2.0 {
        return 0.0;
    }
    let var = ((sum2 - sum * sum / units) / (units - 1.0)).max(0.0);
    (var / units).sqrt() / size
}

fn run<F>(mc: &McConfig, slots: usize, one: F) -> Result<Tally>
where
    F: Fn(&mut Noise) -> Result<(usize, usize, bool)> + Sync,
{
    mc.validate()?;
    let size = mc.unit_size();
    let units = mc.reps / size;
    let base = ChaCha8Rng::seed_from_u64(mc.seed);
    let chunks = units.div_ceil(CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Tally> {
            let mut t = Tally::new(slots);
            let mut outcomes = Vec::with_capacity(size);
            for u in chunk * CHUNK..((chunk + 1) * CHUNK).min(units) {
                outcomes.clear();
                for member in 0..size {
                    let mut rng = base.clone();
                    rng.set_stream(u as u64);
                    let mut noise = Noise {
                        rng,
                        mirror: member == 1,
                    };
                    outcomes.push(one(&mut noise)?);
                }
                t.add_unit(&outcomes);
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tallies
        .iter()
        .fold(Tally::new(slots), |acc, t| acc.merge(t)))
}

fn report(t: &Tally, truth: TruthParam, checkpoints: Vec<usize>, mc: &McConfig) -> EvalReport {
    let reps = (t.units as usize * mc.unit_size()) as f64;
    let units = t.units as f64;
    let size = mc.unit_size() as f64;
    let stop_mass: Vec<(f64, f64)> = t
        .accept
        .iter()
        .zip(&t.reject)
        .map(|(&a, &r)| (a as f64 / reps, r as f64 / reps))
        .collect();
    let rejects = t.sum_rej as f64;
    let accepts = reps - rejects;
    EvalReport {
        truth,
        checkpoints,
        stop_mass,
        type1: rejects / reps,
        type2: accepts / reps,
        ess: t.sum_n as f64 / reps,
        max_n: t.max_n,
        method: ReportMethod::MonteCarlo {
            reps: reps as usize,
            seed: mc.seed,
            se_ess: unit_se(t.sum_n as f64, t.sum_n2 as f64, units, size),
            se_type1: unit_se(rejects, t.sum_rej2 as f64, units, size),
            se_type2: unit_se(accepts, t.sum_acc2 as f64, units, size),
        },
    }
}

/// Thresholds of one checkpoint in terms of the simulated statistic.
#[derive(Clone, Copy)]
struct Step {
    n: usize,
    /// Observations drawn before this checkpoint.
    draws: usize,
    accept: Option<f64>,
    reject: Option<f64>,
}

/// A plan compiled into thresholds on the running sum (Gaussian) or success
/// count (Bernoulli) of the observations that enter the statistic.
pub(crate) struct PlanSampler {
    steps: Vec<Step>,
    per_stage: bool,
    gaussian: bool,
}

impl PlanSampler {
    pub(crate) fn new(plan: &TestPlan, model: &HypothesisModel) -> Result<Self> {
        plan.validate()?;
        let per_stage = plan.mode == StatisticMode::PerStageAverage;
        let steps = plan
            .checkpoints
            .iter()
            .zip(plan.increments())
            .map(|(cp, d)| {
                let stat_n = if per_stage { d } else { cp.n };
                let (a, r) = cp.rule.thresholds();
                let map = |c: f64| match model {
                    HypothesisModel::GaussianMean(g) => stat_n as f64 * g.mean_threshold(c),
                    HypothesisModel::BernoulliOneSided(b) => b.reject_count(stat_n, c) as f64,
                };
                Step {
                    n: cp.n,
                    draws: d,
                    accept: a.map(map),
                    reject: r.map(map),
                }
            })
            .collect();
        Ok(Self {
            steps,
            per_stage,
            gaussian: matches!(model, HypothesisModel::GaussianMean(_)),
        })
    }

    fn checkpoints(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.n).collect()
    }

    /// Runs one replicate and returns `(checkpoint index, sample size, rejected)`.
    pub(crate) fn draw(&self, truth: f64, noise: &mut Noise) -> (usize, usize, bool) {
        let mut s = 0.0;
        for (k, st) in self.steps.iter().enumerate() {
            if self.per_stage {
                s = 0.0;
            }
            if self.gaussian {
                let d = st.draws as f64;
                s += d * truth + d.sqrt() * noise.normal();
            } else {
                s += (0..st.draws).filter(|_| noise.success(truth)).count() as f64;
            }
            if st.accept.is_some_and(|a| s <= a) {
                return (k, st.n, false);
            }
            if st.reject.is_some_and(|r| s > r) {
                return (k, st.n, true);
            }
        }
        unreachable!("the final checkpoint always decides")
    }
}

pub(super) fn simulate_plan(plan: &TestPlan, model: &HypothesisModel, truth: TruthParam, mc: &McConfig) -> Result<EvalReport> {
    model.check_truth(truth)?;
    let sampler = PlanSampler::new(plan, model)?;
    let tally = run(mc, sampler.steps.len(), |noise| Ok(sampler.draw(truth.0, noise)))?;
    Ok(report(&tally, truth, sampler.checkpoints(), mc))
}

pub(super) fn simulate_sprt(s: &SprtDesign, model: &HypothesisModel, truth: TruthParam, mc: &McConfig) -> Result<EvalReport> {
    model.check_truth(truth)?;
    let (up, down) = match model {
        HypothesisModel::GaussianMean(_) => (0.0, 0.0),
        HypothesisModel::BernoulliOneSided(b) => (b.llr_success(), b.llr_failure()),
    };
    let (a, b) = (s.a, -s.b);
    let theta = truth.0;
    let one = |noise: &mut Noise| -> Result<(usize, usize, bool)> {
        let mut llr = 0.0;
        let mut n: u64 = 0;
        loop {
            n += 1;
            llr += match model {
                HypothesisModel::GaussianMean(g) => 2.0 * g.eta() * (theta + noise.normal()),
                HypothesisModel::BernoulliOneSided(_) => {
                    if noise.success(theta) {
                        up
                    } else {
                        down
                    }
                }
            };
            if llr >= a {
                return Ok((0, n as usize, true));
            }
            if llr <= b {
                return Ok((0, n as usize, false));
            }
            if n >= SPRT_STEP_LIMIT {
                return Err(Error::Config(format!("SPRT replicate exceeded {SPRT_STEP_LIMIT} observations")));
            }
        }
    };
    let tally = run(mc, 1, one)?;
    let mut r = report(&tally, truth, Vec::new(), mc);
    r.checkpoints.clear();
    r.stop_mass.clear();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsst::design_fsst;
    use crate::model::Hypothesis;

    #[test]
    fn deterministic_given_seed() {
        let m = HypothesisModel::gaussian(0.5).unwrap();
        let plan = TestPlan::from_fsst(&m, &design_fsst(&m, 0.05, 0.05).unwrap());
        let mc = McConfig {
            reps: 5000,
            seed: 11,
            antithetic: false,
        };
        let a = simulate_plan(&plan, &m, TruthParam(0.1), &mc).unwrap();
        let b = simulate_plan(&plan, &m, TruthParam(0.1), &mc).unwrap();
        assert_eq!(a, b);
        let c = simulate_plan(&plan, &m, TruthParam(0.1), &McConfig { seed: 12, ..mc }).unwrap();
        assert_ne!(a.type1, c.type1);
    }

    #[test]
    fn antithetic_pairs_mirror_noise() {
        let m = HypothesisModel::gaussian(0.5).unwrap();
        let plan = TestPlan::from_fsst(&m, &design_fsst(&m, 0.05, 0.05).unwrap());
        let mc = McConfig {
            reps: 2000,
            seed: 3,
            antithetic: true,
        };
        // at mu = 0 with a zero threshold mirrored replicates always disagree
        let r = simulate_plan(&plan, &m, TruthParam(0.0), &mc).unwrap();
        assert_eq!(r.type1, 0.5);
        assert!(McConfig { reps: 2001, ..mc }.validate().is_err());
        assert!(McConfig { reps: 10, ..mc }.validate().is_err());
    }

    #[test]
    fn sprt_error_rates_are_small() {
        let m = HypothesisModel::bernoulli(0.3, 0.7).unwrap();
        let s = crate::plans::design_sprt(0.01, 0.01).unwrap();
        let r = simulate_sprt(&s, &m, m.truth_under(Hypothesis::Null), &McConfig { reps: 20_000, seed: 1, antithetic: false }).unwrap();
        assert!(r.type1 < 0.01);
        assert_eq!(r.type1 + r.type2, 1.0);
    }
}
