use crate::feedback::Feedback;
use crate::sim::{Interval, ProbeSet};

use super::{Action, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Upper,
    Lower,
}

/// Two-sided splitting for the constant channel, where any isolated user may
/// win. After a collision on the upper interval `(y_min, y_max]`, the lower
/// interval `[y_low, y_min)` is probed too: with three users a collision above
/// most likely leaves the third user alone below.
///
/// Every restart places the split at `y_low + (y_max - y_low)(1 - 1/N)` within
/// the interval that still holds all contenders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSidedState {
    pub y_low: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub phase: Phase,
    pub n_users: u32,
}

impl TwoSidedState {
    pub fn initial(n_users: u32) -> Self {
        Self {
            y_low: 0.0,
            y_min: 1.0 - 1.0 / n_users as f64,
            y_max: 1.0,
            phase: Phase::Upper,
            n_users,
        }
    }

    fn restart(&mut self) {
        let keep = 1.0 - 1.0 / self.n_users as f64;
        self.y_min = self.y_low + (self.y_max - self.y_low) * keep;
        self.phase = Phase::Upper;
    }

    pub fn probe(&self) -> Interval {
        match self.phase {
            Phase::Upper => Interval::left_open(self.y_min, self.y_max),
            Phase::Lower => Interval::right_open(self.y_low, self.y_min),
        }
    }

    pub fn step(self, feedback: Feedback) -> Self {
        let mut s = self;
        match (s.phase, feedback) {
            (_, Feedback::Success) => {}
            (Phase::Upper, Feedback::Collision) => s.phase = Phase::Lower,
            (Phase::Upper, Feedback::Idle) => {
                s.y_max = s.y_min;
                s.restart();
            }
            // Everyone sits above y_min.
            (Phase::Lower, Feedback::Idle) => {
                s.y_low = s.y_min;
                s.restart();
            }
            // Needs two users on each side. Impossible for three users; with
            // more, the upper group carries on alone.
            (Phase::Lower, Feedback::Collision) => {
                debug_assert!(s.n_users > 3, "lower collision with three users");
                s.y_low = s.y_min;
                s.restart();
            }
        }
        s
    }
}

pub fn two_sided_step(state: TwoSidedState, feedback: Feedback) -> (Interval, TwoSidedState) {
    let next = state.step(feedback);
    (next.probe(), next)
}

#[derive(Debug, Clone)]
pub struct TwoSidedStrategy {
    state: TwoSidedState,
}

impl TwoSidedStrategy {
    pub fn new(n_users: u32) -> Self {
        Self {
            state: TwoSidedState::initial(n_users),
        }
    }

    pub fn state(&self) -> TwoSidedState {
        self.state
    }
}

impl Strategy for TwoSidedStrategy {
    fn start(&mut self) -> Action {
        Action::Probe(ProbeSet::single(self.state.probe()))
    }

    fn observe(&mut self, feedback: Feedback) -> Action {
        let (probe, next) = two_sided_step(self.state, feedback);
        self.state = next;
        Action::Probe(ProbeSet::single(probe))
    }
}
