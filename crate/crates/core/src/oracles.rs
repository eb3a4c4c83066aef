//! Independent reference values: two-user closed forms, a Monte-Carlo event
//! counter and exhaustive replay over discrete channel states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, SlotSample};
use crate::error::{Error, Result};
use crate::sim::{run_on_sample, slot_rng};
use crate::strategy::StrategyKind;

fn check_fraction(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "first threshold",
            range: "(0, 1)",
            value: x,
        })
    }
}

/// Mean delay of the two-user code that splits every region at fraction `x`.
///
/// Each node succeeds with probability `q = 2x(1-x)` and otherwise hands a
/// self-similar region to its child, so `D = q + (1 + D)(1 - q)`.
pub fn n2_delay(x: f64) -> Result<f64> {
    check_fraction(x)?;
    Ok(1.0 / (2.0 * x * (1.0 - x)))
}

/// Threshold entropy (bits) of the same two-user code.
pub fn n2_entropy(x: f64) -> Result<f64> {
    check_fraction(x)?;
    let q = 2.0 * x * (1.0 - x);
    let (a, b) = (x * x, (1.0 - x) * (1.0 - x));
    Ok((-q * q.log2() - a * a.log2() - b * b.log2()) / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub frequency: f64,
    /// Binomial standard error.
    pub std_error: f64,
    pub trials: u64,
}

/// Frequency of `event` over `trials` slots of `channel`. Trial `i` uses the
/// same stream as slot `i` of a batch with this seed.
pub fn mc_event_frequency<F>(event: F, channel: &ChannelModel, trials: u64, seed: u64) -> McEstimate
where
    F: Fn(&SlotSample) -> bool + Sync,
{
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|i| u64::from(event(&channel.sample(&mut slot_rng(seed, i)))))
        .sum();
    let p = hits as f64 / trials.max(1) as f64;
    McEstimate {
        frequency: p,
        std_error: (p * (1.0 - p) / trials.max(1) as f64).sqrt(),
        trials,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOutcome {
    pub state: usize,
    pub gains: Vec<f64>,
    pub probability: f64,
    /// Minislots used, whether the slot ended on a probe or a declaration.
    pub depth: usize,
    pub winner: Option<usize>,
    pub declared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDelayReport {
    pub strategy: String,
    pub states: Vec<StateOutcome>,
    pub expected_delay: f64,
}

impl DiscreteDelayReport {
    pub fn per_state_depth(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.depth).collect()
    }
}

/// Probes allowed per state before a replay counts as non-terminating.
pub const REPLAY_DEPTH_BOUND: usize = 1024;

/// Replay `strategy` once against every state of a discrete channel. Feedback
/// is a function of the state, so this is the exact mean delay.
pub fn discrete_exact_delay(
    channel: &ChannelModel,
    strategy: StrategyKind,
) -> Result<DiscreteDelayReport> {
    let table = channel
        .table()
        .ok_or_else(|| Error::InvalidChannel(format!("{channel} is not a discrete table")))?;
    let factory = strategy.prepare(channel)?;
    let mut states = Vec::with_capacity(table.states().len());
    let mut expected = 0.0;
    for (i, (gains, &p)) in table.states().iter().zip(table.probs()).enumerate() {
        let mut s = factory.instantiate();
        let trace = run_on_sample(
            &SlotSample::new(gains.clone()),
            s.as_mut(),
            REPLAY_DEPTH_BOUND,
        );
        if !trace.resolved() && trace.minislots_used >= REPLAY_DEPTH_BOUND {
            return Err(Error::Divergence {
                state: i,
                bound: REPLAY_DEPTH_BOUND,
            });
        }
        expected += p * trace.minislots_used as f64;
        states.push(StateOutcome {
            state: i,
            gains: gains.clone(),
            probability: p,
            depth: trace.minislots_used,
            winner: trace.winner,
            declared: trace.declared_without_probe,
        });
    }
    Ok(DiscreteDelayReport {
        strategy: strategy.name().into(),
        states,
        expected_delay: expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_half() {
        assert_eq!(n2_delay(0.5).unwrap(), 2.0);
        assert_eq!(n2_entropy(0.5).unwrap(), 3.0);
        assert!((n2_delay(0.25).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!(n2_delay(0.0).is_err() && n2_entropy(1.0).is_err());
    }

    #[test]
    fn grid_minimum_at_half() {
        let grid: Vec<f64> = (1..1000).map(|i| i as f64 * 1e-3).collect();
        for f in [n2_delay, n2_entropy] {
            let best = grid
                .iter()
                .copied()
                .min_by(|a, b| f(*a).unwrap().total_cmp(&f(*b).unwrap()))
                .unwrap();
            assert!((best - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn first_minislot_success_frequency() {
        let ch = ChannelModel::iid(2).unwrap();
        let est = mc_event_frequency(
            |s| {
                let (y1, y2) = s.top_two();
                y1 <= 0.5 && 0.5 < y2
            },
            &ch,
            200_000,
            3,
        );
        assert!((est.frequency - 0.5).abs() < 3.0 * est.std_error);
        assert_eq!(mc_event_frequency(|_| true, &ch, 100, 3).frequency, 1.0);
    }

    #[test]
    fn single_state_declares_at_depth_zero() {
        let ch = ChannelModel::discrete(vec![vec![3.0, 1.0]], vec![1.0]).unwrap();
        let r = discrete_exact_delay(&ch, StrategyKind::DiscreteMpa).unwrap();
        assert_eq!(r.per_state_depth(), [0]);
        assert_eq!(r.states[0].winner, Some(0));
        assert_eq!(r.expected_delay, 0.0);
    }

    #[test]
    fn continuous_channels_are_rejected() {
        let ch = ChannelModel::iid(2).unwrap();
        assert!(discrete_exact_delay(&ch, StrategyKind::DiscreteMpa).is_err());
    }
}
