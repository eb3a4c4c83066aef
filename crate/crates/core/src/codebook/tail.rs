//! Closed-loop evaluation of the unexpanded part of a splitting tree.
//!
//! A region `(a, b]` with `a > 0` is the region `(a/b, 1]` scaled by `b`: its
//! subtree has the same shape, thresholds scale by `b` and probabilities by
//! `b^N`. The `a == 0` class is the root scaled the same way. So the
//! conditional expected delay `phi(r)` and conditional entropy `h(r)` of a
//! subtree depend only on the ratio `r = a / b`, and satisfy
//!
//! ```text
//! phi(r) = 1 + q_c phi(y) + q_i phi(r / y)
//! h(r)   = H(q_s, q_c, q_i) + q_c h(y) + q_i h(r / y)
//! ```
//!
//! where `y` is the rule's split of `(r, 1]` and `q_s, q_c, q_i` are the
//! conditional success, collision and idle masses. The ratio `r = 0` stands for
//! the `a == 0` class (its idle child keeps ratio 0). The system is solved by
//! value iteration on a grid clustered towards `r = 1`, with linear
//! interpolation between grid points.

use crate::prob::{region_mass, success_prob_unchecked, Region};

use super::rule::SplitRule;

const GRID_POINTS: usize = 2048;
const MAX_SWEEPS: usize = 20_000;
const SWEEP_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
struct Link {
    index: usize,
    weight: f64,
}

#[derive(Debug, Clone)]
pub struct TailModel {
    n_users: u32,
    ratios: Vec<f64>,
    delay: Vec<f64>,
    entropy: Vec<f64>,
    min_success_ratio: f64,
}

fn entropy3(p: [f64; 3]) -> f64 {
    p.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

impl TailModel {
    /// Solve the subtree recursion for `rule` applied below the root.
    pub fn solve(n_users: u32, rule: &dyn SplitRule) -> Self {
        let ratios: Vec<f64> = (0..GRID_POINTS)
            .map(|i| {
                let t = 1.0 - i as f64 / GRID_POINTS as f64;
                1.0 - t * t
            })
            .collect();

        let mut weights = Vec::with_capacity(GRID_POINTS);
        let mut links = Vec::with_capacity(GRID_POINTS);
        let mut local_entropy = Vec::with_capacity(GRID_POINTS);
        let mut min_success_ratio = 1.0f64;

        for &r in &ratios {
            let region = Region::new(r, 1.0, n_users).expect("grid ratio in [0,1)");
            let y = rule.split(&region, 1);
            let mass = region_mass(&region);
            let q_s = success_prob_unchecked(&region, y) / mass;
            let q_c = region_mass(&region.collision_child(y)) / mass;
            let q_i = region_mass(&region.idle_child(y)) / mass;
            min_success_ratio = min_success_ratio.min(q_s);
            let idle_ratio = if r == 0.0 { 0.0 } else { r / y };
            links.push([locate(&ratios, y), locate(&ratios, idle_ratio)]);
            weights.push([q_c, q_i]);
            local_entropy.push(entropy3([q_s, q_c, q_i]));
        }

        let mut delay = vec![0.0; GRID_POINTS];
        let mut entropy = vec![0.0; GRID_POINTS];
        for _ in 0..MAX_SWEEPS {
            let mut change = 0.0f64;
            for i in 0..GRID_POINTS {
                let [c, d] = links[i];
                let [q_c, q_i] = weights[i];
                let next_delay = 1.0 + q_c * sample(&delay, c) + q_i * sample(&delay, d);
                let next_entropy =
                    local_entropy[i] + q_c * sample(&entropy, c) + q_i * sample(&entropy, d);
                change = change
                    .max((next_delay - delay[i]).abs())
                    .max((next_entropy - entropy[i]).abs());
                delay[i] = next_delay;
                entropy[i] = next_entropy;
            }
            if change < SWEEP_TOLERANCE {
                break;
            }
        }

        Self {
            n_users,
            ratios,
            delay,
            entropy,
            min_success_ratio,
        }
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    /// Expected probes to resolve a subtree whose region has ratio `r`.
    pub fn conditional_delay(&self, r: f64) -> f64 {
        sample(&self.delay, locate(&self.ratios, r))
    }

    /// Entropy (bits) of the threshold distribution within such a subtree.
    pub fn conditional_entropy(&self, r: f64) -> f64 {
        sample(&self.entropy, locate(&self.ratios, r))
    }

    /// Smallest conditional success probability of a single split over the
    /// grid. Every subtree is resolved within `1 / min_success_ratio`
    /// expected probes.
    pub fn min_success_ratio(&self) -> f64 {
        self.min_success_ratio
    }
}

fn locate(grid: &[f64], x: f64) -> Link {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return Link {
            index: 0,
            weight: 0.0,
        };
    }
    if x >= grid[last] {
        return Link {
            index: last,
            weight: 0.0,
        };
    }
    let hi = grid.partition_point(|&g| g <= x);
    let lo = hi - 1;
    Link {
        index: lo,
        weight: (x - grid[lo]) / (grid[hi] - grid[lo]),
    }
}

fn sample(values: &[f64], link: Link) -> f64 {
    if link.weight == 0.0 {
        values[link.index]
    } else {
        values[link.index] * (1.0 - link.weight) + values[link.index + 1] * link.weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::rule::{FixedFraction, Mpa};

    #[test]
    fn two_users_are_self_similar() {
        let model = TailModel::solve(2, &Mpa);
        for r in [0.0, 0.1, 0.5, 0.9, 0.999] {
            assert!((model.conditional_delay(r) - 2.0).abs() < 1e-12, "r={r}");
            assert!((model.conditional_entropy(r) - 3.0).abs() < 1e-12, "r={r}");
        }
        assert!((model.min_success_ratio() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_fraction_two_users_matches_recursion() {
        let x: f64 = 0.45;
        let q = 2.0 * x * (1.0 - x);
        let model = TailModel::solve(2, &FixedFraction(x));
        assert!((model.conditional_delay(0.0) - 1.0 / q).abs() < 1e-10);
        assert!((model.conditional_delay(0.7) - 1.0 / q).abs() < 1e-10);
    }

    #[test]
    fn many_users_approach_pairwise_limit_near_one() {
        let model = TailModel::solve(8, &Mpa);
        // Near r = 1 a collision almost surely involves exactly two users.
        assert!((model.conditional_delay(0.999_999) - 2.0).abs() < 1e-3);
        assert!(model.min_success_ratio() > (-1.0f64).exp());
    }
}
