use crate::feedback::Feedback;
use crate::sim::{Interval, ProbeSet};

use super::{Action, Strategy};

/// Opportunistic splitting: probe `(y_min, y_max]`, halve towards the top on
/// collisions, and fall back below `y_min` on idle minislots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsaState {
    pub y_low: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub n_users: u32,
}

impl OsaState {
    pub fn initial(n_users: u32) -> Self {
        Self {
            y_low: 0.0,
            y_min: 1.0 - 1.0 / n_users as f64,
            y_max: 1.0,
            n_users,
        }
    }

    pub fn probe(&self) -> Interval {
        Interval::left_open(self.y_min, self.y_max)
    }

    /// Update after feedback on the current probe. Success is terminal and
    /// leaves the state unchanged.
    pub fn step(self, feedback: Feedback) -> Self {
        let mut s = self;
        match feedback {
            Feedback::Collision => {
                s.y_low = s.y_min;
                s.y_min = 0.5 * (s.y_min + s.y_max);
            }
            Feedback::Idle => {
                s.y_max = s.y_min;
                s.y_min = if s.y_low != 0.0 {
                    0.5 * (s.y_low + s.y_max)
                } else {
                    s.y_max * (1.0 - 1.0 / s.n_users as f64)
                };
            }
            Feedback::Success => {}
        }
        s
    }
}

/// One OSA update returning the next probe with the new state.
pub fn osa_step(state: OsaState, feedback: Feedback) -> (Interval, OsaState) {
    let next = state.step(feedback);
    (next.probe(), next)
}

#[derive(Debug, Clone)]
pub struct OsaStrategy {
    state: OsaState,
}

impl OsaStrategy {
    pub fn new(n_users: u32) -> Self {
        Self {
            state: OsaState::initial(n_users),
        }
    }

    pub fn state(&self) -> OsaState {
        self.state
    }
}

impl Strategy for OsaStrategy {
    fn start(&mut self) -> Action {
        Action::Probe(ProbeSet::single(self.state.probe()))
    }

    fn observe(&mut self, feedback: Feedback) -> Action {
        let (probe, next) = osa_step(self.state, feedback);
        self.state = next;
        Action::Probe(ProbeSet::single(probe))
    }
}
