use crate::prob::{optimal_threshold, Region};

/// Chooses the probe threshold for a region of the splitting tree.
///
/// `depth` is the number of probes already spent (0 at the root). Rules are
/// assumed scale-invariant below the root, i.e. splitting `(s a, s b]` gives
/// `s` times the split of `(a, b]`; the tail closure in [`super::TailModel`]
/// relies on it.
pub trait SplitRule: Send + Sync {
    fn split(&self, region: &Region, depth: usize) -> f64;
}

/// Maximal-probability allocation: the success-maximizing threshold everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct Mpa;

impl SplitRule for Mpa {
    fn split(&self, region: &Region, _depth: usize) -> f64 {
        optimal_threshold(region)
    }
}

/// A fixed first threshold with MPA splits everywhere below it.
#[derive(Debug, Clone, Copy)]
pub struct RootOverride(pub f64);

impl SplitRule for RootOverride {
    fn split(&self, region: &Region, depth: usize) -> f64 {
        if depth == 0 {
            self.0
        } else {
            optimal_threshold(region)
        }
    }
}

/// Split every region `(a, b]` at `a + x (b - a)`.
///
/// For two users `x = 1/2` coincides with MPA; other fractions give the
/// recursively perturbed codes used to probe local optimality.
#[derive(Debug, Clone, Copy)]
pub struct FixedFraction(pub f64);

impl SplitRule for FixedFraction {
    fn split(&self, region: &Region, _depth: usize) -> f64 {
        let (a, b) = (region.lower(), region.upper());
        a + self.0 * (b - a)
    }
}

impl<R: SplitRule + ?Sized> SplitRule for &R {
    fn split(&self, region: &Region, depth: usize) -> f64 {
        (**self).split(region, depth)
    }
}
