//! Order-statistic probabilities for N i.i.d. Uniform[0,1] gains.
//!
//! Everything here is expressed in terms of the top two order statistics
//! `Y_{N-1} <= Y_N`. A [`Region`] `(a, b]` is the knowledge the base station
//! holds during resolution:
//!
//! * `a == 0`: only `Y_N <= b` is known (reached by idle feedback from the
//!   initial state),
//! * `a > 0`: `Y_{N-1} > a` and `Y_N <= b` (at least two gains in `(a, b]`).
//!
//! Probabilities are unconditional. The optimal split of a region is the same
//! whether or not it is normalized by the region mass, since the mass is a
//! positive constant for a fixed region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knowledge state `(a, b]` about the top two order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    a: f64,
    b: f64,
    n_users: u32,
}

impl Region {
    pub fn new(a: f64, b: f64, n_users: u32) -> Result<Self> {
        let valid = a.is_finite() && b.is_finite() && 0.0 <= a && a <= b && b <= 1.0;
        if !valid || n_users < 2 {
            return Err(Error::InvalidRegion { a, b, n_users });
        }
        Ok(Self { a, b, n_users })
    }

    /// The initial region: nothing is known beyond `Y_N <= 1`.
    pub fn full(n_users: u32) -> Result<Self> {
        Self::new(0.0, 1.0, n_users)
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    pub fn is_empty(&self) -> bool {
        self.a >= self.b
    }

    /// Region left after a collision on the probe `(y, b]`.
    pub fn collision_child(&self, y: f64) -> Self {
        Self {
            a: y,
            b: self.b,
            n_users: self.n_users,
        }
    }

    /// Region left after an idle probe `(y, b]`. Keeps `a == 0` semantics.
    pub fn idle_child(&self, y: f64) -> Self {
        Self {
            a: self.a,
            b: y,
            n_users: self.n_users,
        }
    }

    /// Whether the pair `(y_second, y_max)` is consistent with this region.
    pub fn contains(&self, y_second: f64, y_max: f64) -> bool {
        let lower_ok = if self.a == 0.0 {
            y_second >= 0.0
        } else {
            y_second > self.a
        };
        lower_ok && y_second <= y_max && y_max <= self.b
    }

    fn check_threshold(&self, y: f64) -> Result<()> {
        if !(self.a <= y && y <= self.b) {
            return Err(Error::ThresholdOutOfRange {
                y,
                a: self.a,
                b: self.b,
            });
        }
        Ok(())
    }
}

/// `(y^{n-1} - a^{n-1}) / (y - a) = sum_{j=0}^{n-2} y^j a^{n-2-j}`.
fn power_gap_quotient(y: f64, a: f64, n: u32) -> f64 {
    let mut sum = 1.0;
    let mut y_pow = 1.0;
    for _ in 0..n - 2 {
        y_pow *= y;
        sum = a * sum + y_pow;
    }
    sum
}

/// `y^{n-1} - a^{n-1}` without cancellation when `y` is close to `a`.
fn power_gap(y: f64, a: f64, n: u32) -> f64 {
    (y - a) * power_gap_quotient(y, a, n)
}

/// `Pr(Y_{N-1} <= y < Y_N)` jointly with the region event.
///
/// Equals `N (b - y) (y^{N-1} - a^{N-1})`: one gain in `(y, b]`, the rest in
/// `[0, y]` with at least one of them above `a`.
pub fn success_prob(region: &Region, y: f64) -> Result<f64> {
    region.check_threshold(y)?;
    Ok(success_prob_unchecked(region, y))
}

pub(crate) fn success_prob_unchecked(region: &Region, y: f64) -> f64 {
    let n = region.n_users;
    if region.is_empty() {
        return 0.0;
    }
    (n as f64 * (region.b - y) * power_gap(y, region.a, n)).max(0.0)
}

/// Probability of the region event itself.
///
/// `b^N` when `a == 0`, otherwise the probability that at least two of the N
/// gains exceed `a` while all stay below `b`, summed as
/// `sum_{k>=2} C(N,k) (b-a)^k a^{N-k}` to stay accurate for narrow regions.
pub fn region_mass(region: &Region) -> f64 {
    let (a, b, n) = (region.a, region.b, region.n_users);
    if region.is_empty() {
        return 0.0;
    }
    if a == 0.0 {
        return b.powi(n as i32);
    }
    let w = b - a;
    let mut binom = 1.0; // C(n, k)
    let mut total = 0.0;
    for k in 1..=n {
        binom = binom * (n - k + 1) as f64 / k as f64;
        if k >= 2 {
            total += binom * w.powi(k as i32) * a.powi((n - k) as i32);
        }
    }
    total.min(1.0)
}

/// Derivative of `(b - y)(y^{N-1} - a^{N-1})` with respect to `y`.
pub(crate) fn objective_slope(region: &Region, y: f64) -> f64 {
    let n = region.n_users;
    let rise = (region.b - y) * (n - 1) as f64 * y.powi(n as i32 - 2);
    rise - power_gap(y, region.a, n)
}

/// Bisection on the slope of the success objective over `(a, b)`.
///
/// The objective has a single stationary point inside the region, with
/// positive slope to its left and negative slope to its right.
pub fn stationary_point(region: &Region) -> f64 {
    let (mut lo, mut hi) = (region.a, region.b);
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if objective_slope(region, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The threshold maximizing the success probability within `region`.
///
/// Uses `b (N-1) / N` when `a == 0` and bisection otherwise. Empty regions
/// return their single point.
pub fn optimal_threshold(region: &Region) -> f64 {
    if region.is_empty() {
        return region.a;
    }
    if region.a == 0.0 {
        let n = region.n_users as f64;
        return region.b * (n - 1.0) / n;
    }
    stationary_point(region)
}
