//! Slotted ternary-feedback contention engine.
//!
//! Each slot draws a [`SlotSample`], then the base station repeatedly asks the
//! [`Strategy`] for a probe set, counts the users whose contention value lies
//! in it and feeds back `0`, `1` or `e`. The strategy never sees the sample.
//!
//! Slot `i` of a batch with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream `i`, so a batch splits across workers without changing
//! any slot's randomness.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, SlotSample};
use crate::error::Result;
use crate::feedback::{Codeword, Feedback};
use crate::strategy::{Action, Strategy, StrategyKind};

pub const DEFAULT_MAX_MINISLOTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closure {
    /// `(lo, hi]`
    LeftOpen,
    /// `[lo, hi)`
    RightOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closure: Closure,
}

impl Interval {
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            closure: Closure::LeftOpen,
        }
    }

    pub fn right_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            closure: Closure::RightOpen,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.closure {
            Closure::LeftOpen => self.lo < x && x <= self.hi,
            Closure::RightOpen => self.lo <= x && x < self.hi,
        }
    }
}

/// Users whose value falls in any part transmit. At most two disjoint parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub first: Interval,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub second: Option<Interval>,
}

impl ProbeSet {
    pub fn single(interval: Interval) -> Self {
        Self {
            first: interval,
            second: None,
        }
    }

    pub fn pair(first: Interval, second: Interval) -> Self {
        Self {
            first,
            second: Some(second),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.first.contains(x) || self.second.is_some_and(|s| s.contains(x))
    }

    /// Transmitters among `values`, as (count, lowest index).
    pub fn transmitters(&self, values: &[f64]) -> (usize, Option<usize>) {
        let mut count = 0;
        let mut first = None;
        for (i, &v) in values.iter().enumerate() {
            if self.contains(v) {
                count += 1;
                first.get_or_insert(i);
            }
        }
        (count, first)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub set: ProbeSet,
    pub feedback: Feedback,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SlotTrace {
    pub probes: Vec<ProbeRecord>,
    pub winner: Option<usize>,
    pub minislots_used: usize,
    pub declared_without_probe: bool,
}

impl SlotTrace {
    pub fn codeword(&self) -> Codeword {
        self.probes
            .iter()
            .map(|p| p.feedback)
            .collect::<Vec<_>>()
            .into()
    }

    pub fn resolved(&self) -> bool {
        self.winner.is_some()
    }
}

/// Run one slot on a given sample.
pub fn run_on_sample(
    sample: &SlotSample,
    strategy: &mut dyn Strategy,
    max_minislots: usize,
) -> SlotTrace {
    let values = sample.contention_values();
    let mut trace = SlotTrace::default();
    let mut action = strategy.start();
    loop {
        match action {
            Action::Probe(set) => {
                if trace.minislots_used >= max_minislots {
                    break;
                }
                let (count, first) = set.transmitters(values);
                let feedback = Feedback::from_count(count);
                trace.probes.push(ProbeRecord { set, feedback });
                trace.minislots_used += 1;
                if feedback == Feedback::Success {
                    trace.winner = first;
                    break;
                }
                action = strategy.observe(feedback);
            }
            Action::Declare(user) => {
                trace.winner = Some(user);
                trace.declared_without_probe = true;
                break;
            }
            Action::Abandon => break,
        }
    }
    trace
}

/// Draw a slot from `channel` and run it.
pub fn run_slot(
    channel: &ChannelModel,
    strategy: &mut dyn Strategy,
    max_minislots: usize,
    rng: &mut ChaCha8Rng,
) -> (SlotSample, SlotTrace) {
    let sample = channel.sample(rng);
    let trace = run_on_sample(&sample, strategy, max_minislots);
    (sample, trace)
}

/// The random stream of slot `index` in a batch seeded with `seed`.
pub fn slot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub slots: u64,
    pub max_minislots: usize,
    pub seed: u64,
}

impl BatchConfig {
    pub fn new(slots: u64, max_minislots: usize, seed: u64) -> Self {
        Self {
            slots,
            max_minislots,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub slots: u64,
    pub resolved: u64,
    pub max_minislots: usize,
    pub seed: u64,
    /// Mean minislots over resolved slots.
    pub mean_delay_conditional: f64,
    /// Mean minislots over all slots; unresolved slots cost all K minislots.
    pub mean_delay_charged: f64,
    /// Standard error of `mean_delay_charged`.
    pub delay_std_error: f64,
    pub success_rate: f64,
    /// Entropy (bits) of the empirical transcript distribution.
    pub empirical_codeword_entropy: f64,
}

#[derive(Debug, Default)]
struct Tally {
    slots: u64,
    resolved: u64,
    minislots: u64,
    minislots_sq: u64,
    resolved_minislots: u64,
    transcripts: HashMap<Codeword, u64>,
}

impl Tally {
    fn add(&mut self, trace: &SlotTrace, max_minislots: usize) {
        self.slots += 1;
        let used = if trace.resolved() {
            self.resolved += 1;
            self.resolved_minislots += trace.minislots_used as u64;
            trace.minislots_used as u64
        } else {
            max_minislots as u64
        };
        self.minislots += used;
        self.minislots_sq += used * used;
        *self.transcripts.entry(trace.codeword()).or_default() += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.slots += other.slots;
        self.resolved += other.resolved;
        self.minislots += other.minislots;
        self.minislots_sq += other.minislots_sq;
        self.resolved_minislots += other.resolved_minislots;
        for (word, count) in other.transcripts {
            *self.transcripts.entry(word).or_default() += count;
        }
        self
    }

    fn finish(self, config: BatchConfig) -> BatchStats {
        let n = self.slots as f64;
        let mean = self.minislots as f64 / n;
        let var = (self.minislots_sq as f64 / n - mean * mean).max(0.0);
        let mut counts: Vec<(Codeword, u64)> = self.transcripts.into_iter().collect();
        counts.sort();
        let entropy = counts
            .iter()
            .map(|&(_, c)| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum();
        BatchStats {
            slots: self.slots,
            resolved: self.resolved,
            max_minislots: config.max_minislots,
            seed: config.seed,
            mean_delay_conditional: if self.resolved > 0 {
                self.resolved_minislots as f64 / self.resolved as f64
            } else {
                f64::NAN
            },
            mean_delay_charged: mean,
            delay_std_error: (var / n).sqrt(),
            success_rate: self.resolved as f64 / n,
            empirical_codeword_entropy: entropy,
        }
    }
}

const CHUNK: u64 = 4096;

/// Run `config.slots` independent slots in parallel.
///
/// Every accumulator is an integer count, so the result does not depend on
/// how slots are distributed over threads.
pub fn run_batch(
    channel: &ChannelModel,
    strategy: StrategyKind,
    config: BatchConfig,
) -> Result<BatchStats> {
    let factory = strategy.prepare(channel)?;
    let chunks = config.slots.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::default();
            let end = ((c + 1) * CHUNK).min(config.slots);
            for i in c * CHUNK..end {
                let mut rng = slot_rng(config.seed, i);
                let mut s = factory.instantiate();
                let (_, trace) = run_slot(channel, s.as_mut(), config.max_minislots, &mut rng);
                tally.add(&trace, config.max_minislots);
            }
            tally
        })
        .reduce(Tally::default, Tally::merge);
    Ok(tally.finish(config))
}

/// Serial slot-by-slot replay of a batch, exposing every sample and trace.
pub fn for_each_slot<F>(
    channel: &ChannelModel,
    strategy: StrategyKind,
    config: BatchConfig,
    mut visit: F,
) -> Result<BatchStats>
where
    F: FnMut(u64, &SlotSample, &SlotTrace),
{
    let factory = strategy.prepare(channel)?;
    let mut tally = Tally::default();
    for i in 0..config.slots {
        let mut rng = slot_rng(config.seed, i);
        let mut s = factory.instantiate();
        let (sample, trace) = run_slot(channel, s.as_mut(), config.max_minislots, &mut rng);
        visit(i, &sample, &trace);
        tally.add(&trace, config.max_minislots);
    }
    Ok(tally.finish(config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{MpaStrategy, OsaStrategy};

    #[test]
    fn interval_closure() {
        let up = Interval::left_open(0.5, 1.0);
        assert!(!up.contains(0.5) && up.contains(1.0));
        let low = Interval::right_open(0.0, 0.5);
        assert!(low.contains(0.0) && !low.contains(0.5));
        let both = ProbeSet::pair(up, low);
        assert_eq!(both.transmitters(&[0.1, 0.5, 0.7]), (2, Some(0)));
    }

    #[test]
    fn table_rows_as_slots() {
        let sample = SlotSample::new(vec![0.3, 0.8]);
        let trace = run_on_sample(&sample, &mut MpaStrategy::new(2).unwrap(), 64);
        assert_eq!(trace.winner, Some(1));
        assert_eq!(trace.minislots_used, 1);
        assert_eq!(trace.codeword().to_string(), "1");

        let sample = SlotSample::new(vec![0.9, 0.55]);
        let trace = run_on_sample(&sample, &mut MpaStrategy::new(2).unwrap(), 64);
        assert_eq!(trace.codeword().to_string(), "e1");
        assert_eq!(trace.winner, Some(0));
    }

    #[test]
    fn budget_exhaustion_is_an_outcome() {
        let sample = SlotSample::new(vec![0.6, 0.9]);
        let trace = run_on_sample(&sample, &mut OsaStrategy::new(2), 1);
        assert_eq!(trace.minislots_used, 1);
        assert_eq!(trace.winner, None);
        assert_eq!(trace.codeword().to_string(), "e");
    }

    #[test]
    fn batches_are_reproducible() {
        let ch = ChannelModel::iid(4).unwrap();
        let cfg = BatchConfig::new(20_000, 64, 5);
        let a = run_batch(&ch, StrategyKind::Osa, cfg).unwrap();
        let b = run_batch(&ch, StrategyKind::Osa, cfg).unwrap();
        assert_eq!(a, b);
        let serial = for_each_slot(&ch, StrategyKind::Osa, cfg, |_, _, _| {}).unwrap();
        assert_eq!(a, serial);
        let other = run_batch(&ch, StrategyKind::Osa, BatchConfig::new(20_000, 64, 6)).unwrap();
        assert_ne!(a.mean_delay_charged, other.mean_delay_charged);
    }

    #[test]
    fn charged_and_conditional_delays() {
        let ch = ChannelModel::iid(8).unwrap();
        let stats = run_batch(&ch, StrategyKind::Osa, BatchConfig::new(10_000, 2, 1)).unwrap();
        assert!(stats.success_rate < 1.0);
        assert!(stats.mean_delay_conditional <= 2.0);
        assert!(stats.mean_delay_charged > stats.mean_delay_conditional);
    }
}
