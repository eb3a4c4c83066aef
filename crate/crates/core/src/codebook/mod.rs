//! The maximal-probability-allocation threshold code.
//!
//! The code is a binary tree of [`Region`]s. Each node probes `(y, b]` at the
//! rule's threshold `y`: success resolves every pair with
//! `Y_{N-1} <= y < Y_N` in the node, a collision continues in `(y, b]` and an
//! idle minislot in `(a, y]`. A node's codeword is its root path (`e` for
//! collision, `0` for idle) closed by `1`.
//!
//! Nodes are expanded in order of the mass they resolve, which is the global
//! greedy over all still-unresolved pairs: a threshold only separates pairs of
//! the region it sits in. Expansion stops once the unresolved mass drops below
//! `epsilon`, or at `max_entries` entries. Whatever is left is kept as a
//! frontier and evaluated through [`TailModel`] so that entropy and delay
//! estimates do not depend on where enumeration stopped.

mod rule;
mod tail;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::{Codeword, Feedback};
use crate::prob::{region_mass, success_prob_unchecked, Region};

pub use rule::{FixedFraction, Mpa, RootOverride, SplitRule};
pub use tail::TailModel;

pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Upper bound on explicitly enumerated entries. The number of entries needed
/// for residual `eps` grows like `1/eps`, so tight cutoffs stop here and lean
/// on the tail closure.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 17;

/// One resolving threshold of the code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub threshold: f64,
    pub codeword: Codeword,
    pub probability: f64,
    pub depth: usize,
    pub region: Region,
    /// Position in expansion order (0 for the root).
    pub construction_index: usize,
}

/// An unexpanded subtree left behind by the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierNode {
    pub region: Region,
    pub depth: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `-sum p log2 p` over enumerated entries.
    pub enumerated_bits: f64,
    pub residual_mass: f64,
    /// Enumerated part plus the tail-closed contribution of the frontier.
    pub estimate_bits: f64,
}

/// Expected resolution delay in minislots.
///
/// `lower` charges nothing for the residual mass. `upper` charges each
/// frontier subtree its depth plus `1 / q_min` probes, where `q_min` is the
/// smallest conditional success probability of a split under the rule: every
/// probe resolves at least that fraction of the mass still in play.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    n_users: u32,
    epsilon: f64,
    max_entries: usize,
    entries: Vec<CodeEntry>,
    frontier: Vec<FrontierNode>,
    residual_mass: f64,
    index: HashMap<Codeword, usize>,
    tail: Option<TailSums>,
}

#[derive(Debug, Clone, Copy)]
struct TailSums {
    delay: f64,
    delay_bound: f64,
    entropy: f64,
}

struct Pending {
    prefix: Codeword,
    region: Region,
    threshold: f64,
    probability: f64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Max-heap: larger probability first, then the smaller codeword.
    fn cmp(&self, other: &Self) -> Ordering {
        self.probability
            .total_cmp(&other.probability)
            .then_with(|| other.prefix.cmp(&self.prefix))
    }
}

pub struct CodebookBuilder<'r> {
    n_users: u32,
    epsilon: f64,
    max_entries: usize,
    rule: &'r dyn SplitRule,
}

impl<'r> CodebookBuilder<'r> {
    pub fn new(n_users: u32) -> Self {
        Self {
            n_users,
            epsilon: DEFAULT_EPSILON,
            max_entries: DEFAULT_MAX_ENTRIES,
            rule: &Mpa,
        }
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn max_entries(mut self, max_entries: usize) -> Self {
        self.max_entries = max_entries;
        self
    }

    pub fn rule(mut self, rule: &'r dyn SplitRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn build(self) -> Result<Codebook> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain {
                what: "epsilon",
                range: "(0, 1)",
                value: self.epsilon,
            });
        }
        if self.max_entries == 0 {
            return Err(Error::Domain {
                what: "max_entries",
                range: ">= 1",
                value: 0.0,
            });
        }
        let root = Region::full(self.n_users)?;
        let rule = self.rule;
        let pending = |prefix: Codeword, region: Region| {
            let threshold = rule.split(&region, prefix.len());
            Pending {
                probability: success_prob_unchecked(&region, threshold),
                prefix,
                region,
                threshold,
            }
        };

        let mut heap = BinaryHeap::new();
        heap.push(pending(Codeword::new(), root));
        let mut residual = 1.0;
        let mut entries = Vec::new();

        while residual >= self.epsilon && entries.len() < self.max_entries {
            let Some(node) = heap.pop() else { break };
            residual -= node.probability;
            for (fb, child) in [
                (
                    Feedback::Collision,
                    node.region.collision_child(node.threshold),
                ),
                (Feedback::Idle, node.region.idle_child(node.threshold)),
            ] {
                if region_mass(&child) > 0.0 {
                    heap.push(pending(node.prefix.with(fb), child));
                }
            }
            entries.push(CodeEntry {
                threshold: node.threshold,
                depth: node.prefix.len() + 1,
                codeword: node.prefix.with(Feedback::Success),
                probability: node.probability,
                region: node.region,
                construction_index: entries.len(),
            });
        }

        let mut frontier: Vec<FrontierNode> = heap
            .into_iter()
            .map(|p| FrontierNode {
                region: p.region,
                depth: p.prefix.len(),
                mass: region_mass(&p.region),
            })
            .collect();
        frontier.sort_by(|x, y| x.mass.total_cmp(&y.mass));
        let residual_mass = frontier.iter().map(|f| f.mass).sum();

        let tail = (!frontier.is_empty()).then(|| {
            let model = TailModel::solve(self.n_users, rule);
            let mut sums = TailSums {
                delay: 0.0,
                delay_bound: 0.0,
                entropy: 0.0,
            };
            let per_subtree_bound = 1.0 / model.min_success_ratio();
            for node in &frontier {
                let ratio = node.region.lower() / node.region.upper();
                let m = node.mass;
                sums.delay += m * (node.depth as f64 + model.conditional_delay(ratio));
                sums.delay_bound += m * (node.depth as f64 + per_subtree_bound);
                sums.entropy += m * model.conditional_entropy(ratio) - m * m.log2();
            }
            sums
        });

        entries.sort_by(|x, y| {
            y.probability
                .total_cmp(&x.probability)
                .then_with(|| x.codeword.cmp(&y.codeword))
        });
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.codeword.clone(), i))
            .collect();

        Ok(Codebook {
            n_users: self.n_users,
            epsilon: self.epsilon,
            max_entries: self.max_entries,
            entries,
            frontier,
            residual_mass,
            index,
            tail,
        })
    }
}

/// MPA codebook for `n_users` with the default entry budget.
pub fn build_codebook(n_users: u32, epsilon: f64) -> Result<Codebook> {
    CodebookBuilder::new(n_users).epsilon(epsilon).build()
}

impl Codebook {
    /// A codebook holding exactly the given entries, with no frontier.
    pub fn from_entries(n_users: u32, mut entries: Vec<CodeEntry>) -> Self {
        let residual_mass = (1.0 - entries.iter().map(|e| e.probability).sum::<f64>()).max(0.0);
        entries.sort_by(|x, y| {
            y.probability
                .total_cmp(&x.probability)
                .then_with(|| x.codeword.cmp(&y.codeword))
        });
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.codeword.clone(), i))
            .collect();
        Self {
            n_users,
            epsilon: f64::MIN_POSITIVE,
            max_entries: usize::MAX,
            entries,
            frontier: Vec::new(),
            residual_mass,
            index,
            tail: None,
        }
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_entries(&self) -> usize {
        self.max_entries
    }

    /// Entries by decreasing probability, ties by codeword (`e < 0 < 1`).
    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn frontier(&self) -> &[FrontierNode] {
        &self.frontier
    }

    pub fn residual_mass(&self) -> f64 {
        self.residual_mass
    }

    /// Whether the entry budget ran out before the residual reached epsilon.
    pub fn truncated(&self) -> bool {
        self.residual_mass >= self.epsilon
    }

    pub fn get(&self, codeword: &Codeword) -> Option<&CodeEntry> {
        self.index.get(codeword).map(|&i| &self.entries[i])
    }

    pub fn entropy(&self) -> EntropyReport {
        let enumerated_bits: f64 = self
            .entries
            .iter()
            .filter(|e| e.probability > 0.0)
            .map(|e| -e.probability * e.probability.log2())
            .sum();
        let tail = self.tail.map_or(0.0, |t| t.entropy);
        EntropyReport {
            enumerated_bits,
            residual_mass: self.residual_mass,
            estimate_bits: enumerated_bits + tail,
        }
    }

    pub fn expected_delay(&self) -> DelayReport {
        let lower: f64 = self
            .entries
            .iter()
            .map(|e| e.depth as f64 * e.probability)
            .sum();
        let (tail, bound) = self.tail.map_or((0.0, 0.0), |t| (t.delay, t.delay_bound));
        DelayReport {
            lower,
            upper: lower + bound,
            estimate: lower + tail,
        }
    }

    /// The entry whose threshold separates `y_second` from `y_max`.
    pub fn resolve(&self, y_second: f64, y_max: f64) -> Result<&CodeEntry> {
        if !(0.0 <= y_second && y_second < y_max && y_max <= 1.0) {
            return Err(Error::Domain {
                what: "pair (y_second, y_max)",
                range: "0 <= y_second < y_max <= 1",
                value: y_second,
            });
        }
        let mut prefix = Codeword::new();
        loop {
            let key = prefix.with(Feedback::Success);
            let Some(entry) = self.get(&key) else {
                return Err(Error::UnresolvedAtCutoff {
                    y_second,
                    y_max,
                    prefix: prefix.to_string(),
                });
            };
            let y = entry.threshold;
            if y_second <= y && y < y_max {
                return Ok(entry);
            }
            prefix.push(if y_second > y {
                Feedback::Collision
            } else {
                Feedback::Idle
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_one() -> Vec<(f64, &'static str, f64)> {
        vec![
            (0.5, "1", 0.5),
            (0.75, "e1", 0.125),
            (0.25, "01", 0.125),
            (0.875, "ee1", 1.0 / 32.0),
            (0.625, "e01", 1.0 / 32.0),
            (0.375, "0e1", 1.0 / 32.0),
            (0.125, "001", 1.0 / 32.0),
        ]
    }

    #[test]
    fn two_user_head_matches_table() {
        let cb = CodebookBuilder::new(2).epsilon(1e-3).build().unwrap();
        for (entry, (y, word, p)) in cb.entries().iter().zip(table_one()) {
            assert!((entry.threshold - y).abs() <= 1e-12);
            assert_eq!(entry.codeword.to_string(), word);
            assert_eq!(entry.probability, p);
            assert_eq!(entry.depth, word.len());
        }
    }

    #[test]
    fn greedy_order_of_thresholds() {
        let cb = CodebookBuilder::new(2).epsilon(1e-3).build().unwrap();
        let mut by_construction: Vec<&CodeEntry> = cb.entries().iter().collect();
        by_construction.sort_by_key(|e| e.construction_index);
        let first: Vec<f64> = by_construction[..4].iter().map(|e| e.threshold).collect();
        assert_eq!(first, [0.5, 0.75, 0.25, 0.875]);
    }

    #[test]
    fn first_threshold_is_one_minus_inverse_n() {
        for n in [2, 3, 5, 17, 64] {
            let cb = CodebookBuilder::new(n).max_entries(1).build().unwrap();
            let root = cb.get(&"1".parse().unwrap()).unwrap();
            assert!((root.threshold - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_accounts_for_everything() {
        for n in [2, 3, 7] {
            let cb = CodebookBuilder::new(n)
                .epsilon(1e-5)
                .max_entries(1 << 20)
                .build()
                .unwrap();
            let total: f64 = cb.entries().iter().map(|e| e.probability).sum();
            assert!((total + cb.residual_mass() - 1.0).abs() < 1e-10);
            assert!(cb.residual_mass() < 1e-5);
            assert!(!cb.truncated());
        }
    }

    #[test]
    fn budget_stops_enumeration() {
        let cb = CodebookBuilder::new(2)
            .epsilon(1e-10)
            .max_entries(1000)
            .build()
            .unwrap();
        assert_eq!(cb.entries().len(), 1000);
        assert!(cb.truncated());
        let d = cb.expected_delay();
        // every two-user node succeeds with probability 1/2, so the
        // geometric bound on a frontier subtree is tight
        assert!(d.lower < d.estimate && d.estimate <= d.upper, "{d:?}");
        assert!((d.estimate - 2.0).abs() < 1e-12);
        assert!((cb.entropy().estimate_bits - 3.0).abs() < 1e-12);
    }

    #[test]
    fn resolve_table_rows() {
        let cb = CodebookBuilder::new(2).epsilon(1e-4).build().unwrap();
        assert_eq!(cb.resolve(0.3, 0.8).unwrap().threshold, 0.5);
        assert_eq!(cb.resolve(0.55, 0.9).unwrap().threshold, 0.75);
        let e = cb.resolve(0.26, 0.49).unwrap();
        assert_eq!(e.threshold, 0.375);
        assert_eq!(e.codeword.to_string(), "0e1");
    }

    #[test]
    fn resolve_reports_cutoff_and_domain() {
        let cb = CodebookBuilder::new(2).max_entries(3).build().unwrap();
        assert!(matches!(
            cb.resolve(0.9, 0.95),
            Err(Error::UnresolvedAtCutoff { .. })
        ));
        assert!(matches!(cb.resolve(0.5, 0.5), Err(Error::Domain { .. })));
        assert!(cb.resolve(-0.1, 0.5).is_err());
    }

    #[test]
    fn single_entry_codebook() {
        let region = Region::full(2).unwrap();
        let cb = Codebook::from_entries(
            2,
            vec![CodeEntry {
                threshold: 0.5,
                codeword: "1".parse().unwrap(),
                probability: 1.0,
                depth: 1,
                region,
                construction_index: 0,
            }],
        );
        assert_eq!(cb.entropy().enumerated_bits, 0.0);
        assert_eq!(cb.expected_delay().estimate, 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_codebook(2, 0.0).is_err());
        assert!(build_codebook(2, 1.0).is_err());
        assert!(build_codebook(1, 1e-3).is_err());
    }
}
