use crate::error::{Error, Result};
use crate::highdim::binomial_tail;

/// Relative distance under which a lattice coordinate is snapped to the nearest integer.
const SNAP: f64 = 1e-9;
const GOLDEN_ITERS: usize = 60;
const NEWTON_ITERS: usize = 50;

/// Bernoulli observations, `H0: p = p0` against `H1: p = p1` with `p0 < p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliOneSided {
    p0: f64,
    p1: f64,
    /// LLR of a success, `ln(p1 / p0) > 0`.
    a: f64,
    /// LLR of a failure, `ln(q1 / q0) < 0`.
    b: f64,
}

impl BernoulliOneSided {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        let ok = |p: f64| p > 0.0 && p < 1.0;
        if !(ok(p0) && ok(p1) && p0 < p1) {
            return Err(Error::Model(format!(
                "bernoulli requires 0 < p0 < p1 < 1, got p0 = {p0}, p1 = {p1}"
            )));
        }
        Ok(Self {
            p0,
            p1,
            a: (p1 / p0).ln(),
            b: ((1.0 - p1) / (1.0 - p0)).ln(),
        })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn llr_success(&self) -> f64 {
        self.a
    }

    pub fn llr_failure(&self) -> f64 {
        self.b
    }

    pub fn kl_divergences(&self) -> (f64, f64) {
        let i0 = -(self.p0 * self.a + (1.0 - self.p0) * self.b);
        let i1 = self.p1 * self.a + (1.0 - self.p1) * self.b;
        (i0, i1)
    }

    /// Average LLR after `n` observations containing `k` successes.
    pub fn atom(&self, n: usize, k: usize) -> f64 {
        (k as f64 * self.a + (n - k) as f64 * self.b) / n as f64
    }

    /// Largest success count `k` with `atom(n, k) <= c`; the test rejects iff `S > k`.
    ///
    /// Returns `-1` when every count rejects and `n` or more when none does.
    pub fn reject_count(&self, n: usize, c: f64) -> i64 {
        if c.is_nan() {
            return n as i64;
        }
        let x = n as f64 * (c - self.b) / (self.a - self.b);
        if !x.is_finite() {
            return if x > 0.0 { n as i64 } else { -1 };
        }
        let r = x.round();
        let x = if (x - r).abs() <= SNAP * x.abs().max(1.0) { r } else { x };
        (x.floor() as i64).clamp(-1, n as i64)
    }

    /// `P_theta(S > k)` for `S ~ Bin(n, theta)`.
    pub(crate) fn count_above(n: usize, theta: f64, k: i64) -> f64 {
        if k < 0 {
            1.0
        } else if k >= n as i64 {
            0.0
        } else {
            binomial_tail(n as u64, theta, k as u64 + 1)
        }
    }

    /// `P_theta(S <= k)` for `S ~ Bin(n, theta)`, computed from the other tail.
    pub(crate) fn count_at_most(n: usize, theta: f64, k: i64) -> f64 {
        if k < 0 {
            0.0
        } else if k >= n as i64 {
            1.0
        } else {
            binomial_tail(n as u64, 1.0 - theta, (n as i64 - k) as u64)
        }
    }

    pub fn prob_reject(&self, theta: f64, n: usize, c: f64) -> f64 {
        Self::count_above(n, theta, self.reject_count(n, c))
    }

    pub fn prob_accept(&self, theta: f64, n: usize, c: f64) -> f64 {
        Self::count_at_most(n, theta, self.reject_count(n, c))
    }

    /// Smallest `r` such that rejecting on `S >= r` has type-I error at most `alpha`.
    pub fn min_reject_count(&self, n: usize, alpha: f64) -> usize {
        // P0(S >= r) is non-increasing in r and vanishes at r = n + 1
        let (mut lo, mut hi) = (0usize, n + 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if Self::count_above(n, self.p0, mid as i64 - 1) <= alpha {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Largest `r` such that rejecting on `S >= r` has type-II error at most `beta`.
    pub fn max_reject_count(&self, n: usize, beta: f64) -> usize {
        // P1(S < r) is non-decreasing in r and vanishes at r = 0
        let (mut lo, mut hi) = (0usize, n + 1);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if Self::count_at_most(n, self.p1, mid as i64 - 1) <= beta {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// `ln E0[exp(t * llr)]`.
    pub fn log_mgf(&self, t: f64) -> f64 {
        let u = self.p0.ln() + t * self.a;
        let v = (1.0 - self.p0).ln() + t * self.b;
        let m = u.max(v);
        m + ((u - m).exp() + (v - m).exp()).ln()
    }

    /// Weight of the success atom under the tilted law with parameter `t`.
    fn tilt_weight(&self, t: f64) -> f64 {
        let z = (self.p0 / (1.0 - self.p0)).ln() + t * (self.a - self.b);
        1.0 / (1.0 + (-z).exp())
    }

    pub fn dlog_mgf(&self, t: f64) -> f64 {
        let w = self.tilt_weight(t);
        w * self.a + (1.0 - w) * self.b
    }

    fn d2log_mgf(&self, t: f64) -> f64 {
        let w = self.tilt_weight(t);
        w * (1.0 - w) * (self.a - self.b).powi(2)
    }

    /// Maximiser of the concave map `t -> t c - log_mgf(t)` over `[lo, hi]`,
    /// where `c` lies strictly inside the range of `dlog_mgf` on that interval.
    fn tilt(&self, c: f64, mut lo: f64, mut hi: f64) -> f64 {
        let objective = |t: f64| t * c - self.log_mgf(t);
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = objective(x1);
        let mut f2 = objective(x2);
        for _ in 0..GOLDEN_ITERS {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = objective(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = objective(x1);
            }
        }
        // Newton polish on the first-order condition, kept inside the bracket.
        let (mut lo, mut hi) = (lo - 1e-3 * (1.0 + lo.abs()), hi + 1e-3 * (1.0 + hi.abs()));
        let mut t = 0.5 * (x1 + x2);
        for _ in 0..NEWTON_ITERS {
            let d = self.dlog_mgf(t) - c;
            if d > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            let curv = self.d2log_mgf(t);
            let mut next = t - d / curv;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - t).abs();
            t = next;
            if step <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t
    }

    /// Doubles `edge` away from `anchor` until `dlog_mgf` passes `c`.
    fn bracket(&self, c: f64, anchor: f64, direction: f64) -> f64 {
        let mut span = 1.0;
        for _ in 0..2000 {
            let edge = anchor + direction * span;
            let d = self.dlog_mgf(edge);
            if (direction > 0.0 && d >= c) || (direction < 0.0 && d <= c) {
                return edge;
            }
            span *= 2.0;
        }
        anchor + direction * span
    }

    /// `sup_{t >= 0} { t c - log_mgf(t) }`; infinite above the largest atom.
    pub fn psi0(&self, c: f64) -> f64 {
        if c <= self.dlog_mgf(0.0) {
            return 0.0;
        }
        if c > self.a {
            return f64::INFINITY;
        }
        if c == self.a {
            return -self.p0.ln();
        }
        let hi = self.bracket(c, 0.0, 1.0);
        let t = self.tilt(c, 0.0, hi);
        (t * c - self.log_mgf(t)).max(0.0)
    }

    /// `sup_{t <= 1} { t c - log_mgf(t) } - c`; infinite below the smallest atom.
    pub fn psi1(&self, c: f64) -> f64 {
        if c >= self.dlog_mgf(1.0) {
            return 0.0;
        }
        if c < self.b {
            return f64::INFINITY;
        }
        if c == self.b {
            return -(1.0 - self.p1).ln();
        }
        let lo = self.bracket(c, 1.0, -1.0);
        let t = self.tilt(c, lo, 1.0);
        (t * c - self.log_mgf(t) - c).max(0.0)
    }
}
