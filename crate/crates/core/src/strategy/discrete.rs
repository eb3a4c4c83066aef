//! Strategies for finite joint-gain tables. Probes are upper rays `(t, inf)`
//! with `t` taken from the table's threshold ladder, and the base station
//! tracks which table states are still consistent with the feedback.

use std::sync::Arc;

use crate::channel::{unique_maximizer, DiscreteTable};
use crate::feedback::Feedback;
use crate::sim::{Interval, ProbeSet};

use super::{Action, Strategy};

fn ray(t: f64) -> ProbeSet {
    ProbeSet::single(Interval::left_open(t, f64::INFINITY))
}

/// States of a discrete table consistent with the feedback so far.
#[derive(Debug, Clone)]
pub struct Posterior {
    table: Arc<DiscreteTable>,
    alive: Vec<bool>,
}

impl Posterior {
    pub fn new(table: Arc<DiscreteTable>) -> Self {
        let alive = table.probs().iter().map(|&p| p > 0.0).collect();
        Self { table, alive }
    }

    pub fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
    }

    pub fn mass(&self) -> f64 {
        self.alive().map(|i| self.table.probs()[i]).sum()
    }

    /// Feedback state `i` would produce for the ray `(t, inf)`.
    pub fn outcome(&self, state: usize, t: f64) -> Feedback {
        let above = self.table.states()[state]
            .iter()
            .filter(|&&g| g > t)
            .count();
        Feedback::from_count(above)
    }

    /// Probability mass of states in which `(t, inf)` isolates one user.
    pub fn success_mass(&self, t: f64) -> f64 {
        self.alive()
            .filter(|&i| self.outcome(i, t) == Feedback::Success)
            .map(|i| self.table.probs()[i])
            .sum()
    }

    pub fn update(&mut self, t: f64, feedback: Feedback) {
        for i in 0..self.alive.len() {
            if self.alive[i] && self.outcome(i, t) != feedback {
                self.alive[i] = false;
            }
        }
    }

    /// The strongest user, if every remaining state agrees on a unique one.
    pub fn common_winner(&self) -> Option<usize> {
        let mut winners = self
            .alive()
            .map(|i| unique_maximizer(&self.table.states()[i]));
        let first = winners.next()??;
        winners.all(|w| w == Some(first)).then_some(first)
    }

    pub fn single_state(&self) -> Option<usize> {
        let mut alive = self.alive();
        let first = alive.next()?;
        alive.next().is_none().then_some(first)
    }
}

/// Greedy: probe the ladder threshold with the most posterior success mass,
/// preferring the larger threshold on ties. Once a single state remains its
/// strongest user is named without a further probe.
#[derive(Debug, Clone)]
pub struct DiscreteMpa {
    posterior: Posterior,
    ladder: Vec<f64>,
    last: f64,
}

impl DiscreteMpa {
    pub fn new(table: Arc<DiscreteTable>) -> Self {
        let ladder = table.threshold_ladder();
        Self {
            posterior: Posterior::new(table),
            ladder,
            last: f64::NAN,
        }
    }

    pub fn posterior(&self) -> &Posterior {
        &self.posterior
    }

    fn next(&mut self) -> Action {
        if self.posterior.single_state().is_some() {
            return self
                .posterior
                .common_winner()
                .map_or(Action::Abandon, Action::Declare);
        }
        let mut best: Option<(f64, f64)> = None;
        for &t in &self.ladder {
            let m = self.posterior.success_mass(t);
            if m > 0.0 && best.is_none_or(|(_, bm)| m >= bm) {
                best = Some((t, m));
            }
        }
        match best {
            Some((t, _)) => {
                self.last = t;
                Action::Probe(ray(t))
            }
            None => self
                .posterior
                .common_winner()
                .map_or(Action::Abandon, Action::Declare),
        }
    }
}

impl Strategy for DiscreteMpa {
    fn start(&mut self) -> Action {
        self.next()
    }

    fn observe(&mut self, feedback: Feedback) -> Action {
        self.posterior.update(self.last, feedback);
        self.next()
    }
}

/// Binary search over the threshold ladder. A collision moves the search
/// above the probed threshold and an idle below it. When the ladder is used
/// up the winner is named only if all remaining states agree on it.
#[derive(Debug, Clone)]
pub struct DiscreteBisect {
    posterior: Posterior,
    ladder: Arc<Vec<f64>>,
    lo: usize,
    /// One past the top of the remaining search range.
    hi: usize,
    mid: usize,
}

impl DiscreteBisect {
    pub fn new(table: Arc<DiscreteTable>) -> Self {
        let ladder = Arc::new(table.threshold_ladder());
        Self::with_ladder(table, ladder)
    }

    pub fn with_ladder(table: Arc<DiscreteTable>, ladder: Arc<Vec<f64>>) -> Self {
        let hi = ladder.len();
        Self {
            posterior: Posterior::new(table),
            ladder,
            lo: 0,
            hi,
            mid: 0,
        }
    }

    fn next(&mut self) -> Action {
        if self.lo >= self.hi {
            return self
                .posterior
                .common_winner()
                .map_or(Action::Abandon, Action::Declare);
        }
        self.mid = (self.lo + self.hi - 1) / 2;
        Action::Probe(ray(self.ladder[self.mid]))
    }
}

impl Strategy for DiscreteBisect {
    fn start(&mut self) -> Action {
        self.next()
    }

    fn observe(&mut self, feedback: Feedback) -> Action {
        self.posterior.update(self.ladder[self.mid], feedback);
        match feedback {
            Feedback::Collision => self.lo = self.mid + 1,
            Feedback::Idle => self.hi = self.mid,
            Feedback::Success => {}
        }
        self.next()
    }
}
