//! Resolution policies.
//!
//! A strategy is a per-slot state machine: it proposes a probe set, learns the
//! feedback, and proposes the next one. It sees feedback only, never gains.
//! The engine stops on success, so [`Strategy::observe`] only receives idle
//! and collision feedback.

mod discrete;
mod mpa;
mod osa;
mod two_sided;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::channel::{ChannelModel, DiscreteTable};
use crate::error::{Error, Result};
use crate::feedback::Feedback;
use crate::sim::ProbeSet;

pub use discrete::{DiscreteBisect, DiscreteMpa, Posterior};
pub use mpa::{MpaState, MpaStrategy};
pub use osa::{OsaState, OsaStrategy};
pub use two_sided::{Phase, TwoSidedState, TwoSidedStrategy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Probe(ProbeSet),
    /// Name the winner without a probe.
    Declare(usize),
    /// Nothing left to try.
    Abandon,
}

pub trait Strategy: Send {
    fn start(&mut self) -> Action;
    fn observe(&mut self, feedback: Feedback) -> Action;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Osa,
    Mpa,
    TwoSided,
    DiscreteMpa,
    DiscreteBisect,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Osa,
        StrategyKind::Mpa,
        StrategyKind::TwoSided,
        StrategyKind::DiscreteMpa,
        StrategyKind::DiscreteBisect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Osa => "osa",
            StrategyKind::Mpa => "mpa",
            StrategyKind::TwoSided => "two-sided",
            StrategyKind::DiscreteMpa => "discrete-mpa",
            StrategyKind::DiscreteBisect => "discrete-bisect",
        }
    }

    /// Check the channel and capture what each slot's instance needs.
    pub fn prepare(self, channel: &ChannelModel) -> Result<StrategyFactory> {
        let incompatible = || Error::Incompatible {
            strategy: self.name().into(),
            channel: channel.to_string(),
        };
        let n = channel.n_users();
        match (self, channel) {
            (StrategyKind::Osa, c) if c.is_continuous() => Ok(StrategyFactory::Osa(n as u32)),
            (StrategyKind::Mpa, c) if c.is_continuous() => Ok(StrategyFactory::Mpa(n as u32)),
            (StrategyKind::TwoSided, ChannelModel::Constant { .. }) => {
                Ok(StrategyFactory::TwoSided(n as u32))
            }
            (StrategyKind::DiscreteMpa, ChannelModel::DiscreteJoint(t)) => {
                Ok(StrategyFactory::DiscreteMpa(t.clone()))
            }
            (StrategyKind::DiscreteBisect, ChannelModel::DiscreteJoint(t)) => Ok(
                StrategyFactory::DiscreteBisect(t.clone(), Arc::new(t.threshold_ladder())),
            ),
            _ => Err(incompatible()),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.into()))
    }
}

/// Builds a fresh strategy instance per slot.
#[derive(Debug, Clone)]
pub enum StrategyFactory {
    Osa(u32),
    Mpa(u32),
    TwoSided(u32),
    DiscreteMpa(Arc<DiscreteTable>),
    DiscreteBisect(Arc<DiscreteTable>, Arc<Vec<f64>>),
}

impl StrategyFactory {
    pub fn instantiate(&self) -> Box<dyn Strategy> {
        match self {
            StrategyFactory::Osa(n) => Box::new(OsaStrategy::new(*n)),
            StrategyFactory::Mpa(n) => {
                Box::new(MpaStrategy::new(*n).expect("channel guarantees n >= 2"))
            }
            StrategyFactory::TwoSided(n) => Box::new(TwoSidedStrategy::new(*n)),
            StrategyFactory::DiscreteMpa(t) => Box::new(DiscreteMpa::new(t.clone())),
            StrategyFactory::DiscreteBisect(t, ladder) => {
                Box::new(DiscreteBisect::with_ladder(t.clone(), ladder.clone()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("greedy".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn compatibility() {
        let iid = ChannelModel::iid(3).unwrap();
        let constant = ChannelModel::constant(3).unwrap();
        let discrete = ChannelModel::correlated(0.0).unwrap();
        assert!(StrategyKind::Osa.prepare(&iid).is_ok());
        assert!(StrategyKind::Mpa.prepare(&constant).is_ok());
        assert!(StrategyKind::TwoSided.prepare(&constant).is_ok());
        assert!(StrategyKind::TwoSided.prepare(&iid).is_err());
        assert!(StrategyKind::Osa.prepare(&discrete).is_err());
        assert!(StrategyKind::DiscreteMpa.prepare(&iid).is_err());
        assert!(StrategyKind::DiscreteBisect.prepare(&discrete).is_ok());
    }
}
