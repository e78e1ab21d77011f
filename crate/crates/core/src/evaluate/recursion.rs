//! Boundary-crossing recursion for cumulative-statistic plans.
//!
//! The engine tracks the sub-distribution of the running sufficient
//! statistic (the sum of the observations for the Gaussian model, the
//! success count for the Bernoulli model) restricted to paths that have not
//! stopped yet. Gaussian sub-densities live on a uniform Simpson grid; the
//! Bernoulli count distribution is carried exactly.

use statrs::function::factorial::ln_binomial;

use super::ExactConfig;
use crate::error::Result;
use crate::model::{normal_cdf, normal_sf, BernoulliOneSided, HypothesisModel, TruthParam};
use crate::plans::Rule;

/// Kernel terms with `|z|` above this are dropped (`exp(-z²/2) ≈ 1e-87`).
const KERNEL_CUT: f64 = 20.0;
/// Steps of the multiplicative kernel recurrence between exact re-evaluations.
const REANCHOR: usize = 64;

pub(crate) struct Recursion {
    n: usize,
    state: State,
}

enum State {
    Gaussian(Gaussian),
    Lattice(Lattice),
}

impl Recursion {
    pub(crate) fn new(model: &HypothesisModel, truth: TruthParam, cfg: &ExactConfig) -> Result<Self> {
        model.check_truth(truth)?;
        let state = match model {
            HypothesisModel::GaussianMean(g) => State::Gaussian(Gaussian {
                eta: g.eta(),
                mu: truth.0,
                points: cfg.points,
                span_sd: cfg.span_sd,
                grid: None,
            }),
            HypothesisModel::BernoulliOneSided(b) => State::Lattice(Lattice {
                model: *b,
                theta: truth.0,
                pmf: vec![1.0],
            }),
        };
        Ok(Self { n: 0, state })
    }

    /// Sample size of the last checkpoint passed.
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    /// Applies `rule` at cumulative size `n > self.n()` and returns the
    /// probabilities of accepting and rejecting there. Surviving paths are
    /// carried forward unless the rule is final.
    pub(crate) fn stop(&mut self, n: usize, rule: &Rule) -> (f64, f64) {
        assert!(n > self.n, "checkpoints must increase");
        let (acc_c, rej_c) = rule.thresholds();
        let prev = self.n;
        let out = match &mut self.state {
            State::Gaussian(g) => {
                let acc_s = acc_c.map(|c| g.sum_threshold(n, c));
                let rej_s = rej_c.map(|c| g.sum_threshold(n, c));
                let a = acc_s.map_or(0.0, |s| g.mass_at_most(prev, n, s));
                let r = rej_s.map_or(0.0, |s| g.mass_above(prev, n, s));
                if !rule.is_final() {
                    g.propagate(prev, n, acc_s, rej_s);
                }
                (a, r)
            }
            State::Lattice(l) => {
                let mut pmf = l.convolved(n - prev);
                let ka = acc_c.map(|c| l.model.reject_count(n, c));
                let kr = rej_c.map(|c| l.model.reject_count(n, c));
                let mut a = 0.0;
                let mut r = 0.0;
                for (s, p) in pmf.iter_mut().enumerate() {
                    let s = s as i64;
                    if ka.is_some_and(|k| s <= k) {
                        a += *p;
                        *p = 0.0;
                    } else if kr.is_some_and(|k| s > k) {
                        r += *p;
                        *p = 0.0;
                    }
                }
                l.pmf = pmf;
                (a, r)
            }
        };
        self.n = n;
        out
    }

    /// `P(no stop so far, Λ̄_n > c)` for `n > self.n()`.
    pub(crate) fn joint_reject(&self, n: usize, c: f64) -> f64 {
        match &self.state {
            State::Gaussian(g) => g.mass_above(self.n, n, g.sum_threshold(n, c)),
            State::Lattice(l) => {
                let k = l.model.reject_count(n, c);
                l.convolved(n - self.n)
                    .iter()
                    .enumerate()
                    .filter(|&(s, _)| s as i64 > k)
                    .map(|(_, p)| p)
                    .sum()
            }
        }
    }

    /// Whether the Gaussian grid was used (so the result depends on the resolution).
    pub(crate) fn used_grid(&self) -> bool {
        matches!(&self.state, State::Gaussian(g) if g.grid.is_some())
    }
}

/// Sub-density of the running sum on a uniform grid, stored pre-multiplied
/// by the Simpson weights.
struct Grid {
    x0: f64,
    h: f64,
    wf: Vec<f64>,
}

struct Gaussian {
    eta: f64,
    mu: f64,
    points: usize,
    span_sd: f64,
    /// `None` until the first checkpoint: the sum starts as a point mass at 0.
    grid: Option<Grid>,
}

fn simpson_weight(j: usize, m: usize, h: f64) -> f64 {
    if j == 0 || j + 1 == m {
        h / 3.0
    } else if j % 2 == 1 {
        4.0 * h / 3.0
    } else {
        2.0 * h / 3.0
    }
}

impl Gaussian {
    /// `Λ̄_n > c` iff the sum exceeds this value.
    fn sum_threshold(&self, n: usize, c: f64) -> f64 {
        n as f64 * c / (2.0 * self.eta)
    }

    fn mass_at_most(&self, prev: usize, n: usize, s: f64) -> f64 {
        let d = (n - prev) as f64;
        let sd = d.sqrt();
        match &self.grid {
            None => normal_cdf((s - d * self.mu) / sd),
            Some(g) => {
                let shift = s - d * self.mu;
                g.wf.iter()
                    .enumerate()
                    .map(|(i, &w)| w * normal_cdf((shift - (g.x0 + i as f64 * g.h)) / sd))
                    .sum()
            }
        }
    }

    fn mass_above(&self, prev: usize, n: usize, s: f64) -> f64 {
        let d = (n - prev) as f64;
        let sd = d.sqrt();
        match &self.grid {
            None => normal_sf((s - d * self.mu) / sd),
            Some(g) => {
                let shift = s - d * self.mu;
                g.wf.iter()
                    .enumerate()
                    .map(|(i, &w)| w * normal_sf((shift - (g.x0 + i as f64 * g.h)) / sd))
                    .sum()
            }
        }
    }

    /// Replaces the grid by the sub-density at `n` restricted to `(lo, hi]`.
    fn propagate(&mut self, prev: usize, n: usize, lo: Option<f64>, hi: Option<f64>) {
        let nf = n as f64;
        let centre = nf * self.mu;
        let half = self.span_sd * nf.sqrt();
        let a = lo.map_or(centre - half, |l| l.max(centre - half));
        let b = hi.map_or(centre + half, |u| u.min(centre + half));
        if !(a < b) || self.grid.as_ref().is_some_and(|g| g.wf.is_empty()) {
            self.grid = Some(Grid {
                x0: 0.0,
                h: 1.0,
                wf: Vec::new(),
            });
            return;
        }
        let m = self.points;
        let h = (b - a) / (m - 1) as f64;
        let d = (n - prev) as f64;
        let shift = d * self.mu;
        let mut wf = vec![0.0; m];
        match &self.grid {
            None => {
                let sd = nf.sqrt();
                let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
                for (j, w) in wf.iter_mut().enumerate() {
                    let z = (a + j as f64 * h - centre) / sd;
                    *w = simpson_weight(j, m, h) * norm * (-0.5 * z * z).exp();
                }
            }
            Some(src) => {
                for (j, w) in wf.iter_mut().enumerate() {
                    let y = a + j as f64 * h;
                    *w = simpson_weight(j, m, h) * convolve_at(src, y - shift, d);
                }
            }
        }
        self.grid = Some(Grid { x0: a, h, wf });
    }
}

/// `Σ_i wf_i φ_d(y − x_i)` with the Gaussian kernel evaluated by a
/// multiplicative recurrence outward from its peak.
fn convolve_at(src: &Grid, y: f64, d: f64) -> f64 {
    let len = src.wf.len();
    if len == 0 {
        return 0.0;
    }
    let sd = d.sqrt();
    let delta = src.h / sd;
    // z_i = (y − x_i)/sd = z0 − i·δ
    let z0 = (y - src.x0) / sd;
    let last = (len - 1) as f64;
    let i_min = ((z0 - KERNEL_CUT) / delta).ceil().max(0.0);
    let i_max = ((z0 + KERNEL_CUT) / delta).floor().min(last);
    if i_min > i_max {
        return 0.0;
    }
    let (i_min, i_max) = (i_min as usize, i_max as usize);
    let peak = (z0 / delta).round().clamp(i_min as f64, i_max as f64) as usize;
    let up = kernel_sum(&src.wf, peak, i_max + 1 - peak, 1, z0 - peak as f64 * delta, delta);
    let down = kernel_sum(&src.wf, peak.wrapping_sub(1), peak - i_min, -1, z0 - (peak as f64 - 1.0) * delta, delta);
    (up + down) / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// `Σ_{j < count} w[first + dir·j] exp(−(z − dir·jδ)²/2)`, with four
/// interleaved recurrences so the multiplications do not form one long
/// dependency chain.
fn kernel_sum(w: &[f64], first: usize, count: usize, dir: isize, z: f64, delta: f64) -> f64 {
    const LANES: usize = 4;
    let s = LANES as f64;
    let step = dir as f64 * delta;
    let decay = (-s * s * delta * delta).exp();
    let at = |j: usize| w[(first as isize + dir * j as isize) as usize];
    let mut total = 0.0;
    let mut start = 0;
    while start < count {
        let end = (start + REANCHOR).min(count);
        let mut k = [0.0; LANES];
        let mut r = [0.0; LANES];
        for l in 0..LANES {
            let zl = z - (start + l) as f64 * step;
            k[l] = (-0.5 * zl * zl).exp();
            r[l] = (s * step * zl - 0.5 * s * s * delta * delta).exp();
        }
        let mut acc = [0.0; LANES];
        let mut j = start;
        while j + LANES <= end {
            for l in 0..LANES {
                acc[l] += at(j + l) * k[l];
                k[l] *= r[l];
                r[l] *= decay;
            }
            j += LANES;
        }
        for (l, jj) in (j..end).enumerate() {
            acc[l] += at(jj) * k[l];
        }
        total += acc.iter().sum::<f64>();
        start = end;
    }
    total
}

struct Lattice {
    model: BernoulliOneSided,
    theta: f64,
    /// Sub-probabilities of the success count `0..=n` on surviving paths.
    pmf: Vec<f64>,
}

/// `Bin(d, theta)` probabilities.
pub(crate) fn binomial_pmf(d: usize, theta: f64) -> Vec<f64> {
    let (lp, lq) = (theta.ln(), (-theta).ln_1p());
    (0..=d)
        .map(|j| (ln_binomial(d as u64, j as u64) + j as f64 * lp + (d - j) as f64 * lq).exp())
        .collect()
}

impl Lattice {
    fn convolved(&self, d: usize) -> Vec<f64> {
        let step = binomial_pmf(d, self.theta);
        let mut out = vec![0.0; self.pmf.len() + d];
        for (s, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &q) in step.iter().enumerate() {
                out[s + j] += p * q;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_recurrence_matches_direct_sum() {
        let m = 801;
        let h = 0.05;
        let src = Grid {
            x0: -20.0,
            h,
            wf: (0..m).map(|i| simpson_weight(i, m, h) * (-0.01 * (i as f64 - 400.0).powi(2)).exp()).collect(),
        };
        for (y, d) in [(0.0, 3.0), (-18.0, 1.0), (25.0, 7.0), (-24.0, 2.0), (3.3, 0.5)] {
            let direct: f64 = src
                .wf
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let z = (y - (src.x0 + i as f64 * h)) / f64::sqrt(d);
                    w * (-0.5 * z * z).exp() / (f64::sqrt(d) * (2.0 * std::f64::consts::PI).sqrt())
                })
                .sum();
            let fast = convolve_at(&src, y, d);
            assert!((fast - direct).abs() <= 1e-13 * direct.abs().max(1e-300), "y={y}: {fast} vs {direct}");
        }
    }

    #[test]
    fn binomial_pmf_sums_to_one() {
        let p = binomial_pmf(40, 0.37);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, max_relative = 1e-13);
    }
}
