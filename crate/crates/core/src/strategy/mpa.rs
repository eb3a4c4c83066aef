use crate::error::Result;
use crate::feedback::Feedback;
use crate::prob::{optimal_threshold, Region};
use crate::sim::{Interval, ProbeSet};

use super::{Action, Strategy};

/// Walks the MPA region tree, computing each node's threshold on arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpaState {
    pub region: Region,
    pub threshold: f64,
}

impl MpaState {
    pub fn initial(n_users: u32) -> Result<Self> {
        Ok(Self::at(Region::full(n_users)?))
    }

    pub fn at(region: Region) -> Self {
        Self {
            threshold: optimal_threshold(&region),
            region,
        }
    }

    pub fn probe(&self) -> Interval {
        Interval::left_open(self.threshold, self.region.upper())
    }

    pub fn step(self, feedback: Feedback) -> Self {
        match feedback {
            Feedback::Collision => Self::at(self.region.collision_child(self.threshold)),
            Feedback::Idle => Self::at(self.region.idle_child(self.threshold)),
            Feedback::Success => self,
        }
    }
}

pub fn mpa_step(state: MpaState, feedback: Feedback) -> (Interval, MpaState) {
    let next = state.step(feedback);
    (next.probe(), next)
}

#[derive(Debug, Clone)]
pub struct MpaStrategy {
    state: MpaState,
}

impl MpaStrategy {
    pub fn new(n_users: u32) -> Result<Self> {
        Ok(Self {
            state: MpaState::initial(n_users)?,
        })
    }

    pub fn state(&self) -> MpaState {
        self.state
    }
}

impl Strategy for MpaStrategy {
    fn start(&mut self) -> Action {
        Action::Probe(ProbeSet::single(self.state.probe()))
    }

    fn observe(&mut self, feedback: Feedback) -> Action {
        let (probe, next) = mpa_step(self.state, feedback);
        self.state = next;
        Action::Probe(ProbeSet::single(probe))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::success_prob;

    #[test]
    fn three_users_start_at_two_thirds() {
        let s = MpaState::initial(3).unwrap();
        assert!((s.probe().lo - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.probe().hi, 1.0);
    }

    #[test]
    fn three_users_after_collision() {
        let (probe, _) = mpa_step(MpaState::initial(3).unwrap(), Feedback::Collision);
        // grid-search argmax of (1-y)(y^2 - (2/3)^2) over (2/3, 1)
        let region = Region::new(2.0 / 3.0, 1.0, 3).unwrap();
        let (mut best_y, mut best_p) = (0.0, -1.0);
        let steps = 1_000_000;
        for i in 0..=steps {
            let y = 2.0 / 3.0 + (1.0 / 3.0) * i as f64 / steps as f64;
            let p = success_prob(&region, y.min(1.0)).unwrap();
            if p > best_p {
                (best_y, best_p) = (y, p);
            }
        }
        assert!((probe.lo - best_y).abs() < 1e-5);
        assert_eq!(probe.hi, 1.0);
    }
}
