//! Per-slot gain generators.
//!
//! Continuous channels are expressed after the CDF transform, so gains are
//! i.i.d. Uniform[0,1] whatever the fading law. Discrete channels keep their
//! native gain units.

use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum ChannelModel {
    /// N independent Uniform[0,1] gains per slot.
    IidUniform { n_users: usize },
    /// All gains equal; users contend on private Uniform[0,1] draws.
    Constant { n_users: usize },
    /// One joint gain tuple drawn per slot from a finite table.
    DiscreteJoint(Arc<DiscreteTable>),
}

#[derive(Debug, Clone)]
pub struct DiscreteTable {
    states: Vec<Vec<f64>>,
    probs: Vec<f64>,
    picker: Option<WeightedIndex<f64>>,
}

impl DiscreteTable {
    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_users(&self) -> usize {
        self.states[0].len()
    }

    /// Midpoints between adjacent distinct gain values, ascending.
    pub fn threshold_ladder(&self) -> Vec<f64> {
        let mut gains: Vec<f64> = self.states.iter().flatten().copied().collect();
        gains.sort_by(f64::total_cmp);
        gains.dedup();
        gains.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// The unique user holding the largest gain, if there is one.
pub fn unique_maximizer(gains: &[f64]) -> Option<usize> {
    let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut hits = gains.iter().enumerate().filter(|(_, &g)| g == max);
    let first = hits.next()?.0;
    hits.next().is_none().then_some(first)
}

impl ChannelModel {
    pub fn iid(n_users: usize) -> Result<Self> {
        check_users(n_users)?;
        Ok(Self::IidUniform { n_users })
    }

    pub fn constant(n_users: usize) -> Result<Self> {
        check_users(n_users)?;
        Ok(Self::Constant { n_users })
    }

    pub fn discrete(states: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != probs.len() {
            return Err(Error::InvalidChannel(format!(
                "{} states but {} probabilities",
                states.len(),
                probs.len()
            )));
        }
        let width = states[0].len();
        check_users(width)?;
        if states.iter().any(|s| s.len() != width) {
            return Err(Error::InvalidChannel("gain tuples differ in length".into()));
        }
        if states.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::InvalidChannel("non-finite gain".into()));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidChannel("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let picker = if states.len() > 1 {
            Some(WeightedIndex::new(&probs).map_err(|e| Error::InvalidChannel(e.to_string()))?)
        } else {
            None
        };
        Ok(Self::DiscreteJoint(Arc::new(DiscreteTable {
            states,
            probs,
            picker,
        })))
    }

    /// Two users on a chain of `k` states: state `j` holds gains
    /// `{2j+2, 2j+4}`, with the larger gain alternating between the users.
    /// State `j < k-1` has probability `1/k - (k-1-j) eps` and the top state
    /// takes the remainder `1/k + k(k-1)/2 eps`.
    pub fn chain(k: usize, eps: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidChannel(
                "chain needs at least one state".into(),
            ));
        }
        let states = (0..k)
            .map(|j| {
                let low = 2.0 * j as f64 + 2.0;
                let high = low + 2.0;
                if j % 2 == 0 {
                    vec![high, low]
                } else {
                    vec![low, high]
                }
            })
            .collect();
        let kf = k as f64;
        let probs = (0..k)
            .map(|j| {
                if j + 1 == k {
                    1.0 / kf + kf * (kf - 1.0) / 2.0 * eps
                } else {
                    1.0 / kf - (k - 1 - j) as f64 * eps
                }
            })
            .collect();
        Self::discrete(states, probs)
    }

    /// The seven-state correlated two-user channel
    /// `{(4,2), (4,6), (8,6), (8,10), (12,10), (12,14), (16,14)}`.
    pub fn correlated(eps: f64) -> Result<Self> {
        Self::chain(7, eps)
    }

    /// Parse `iid`, `constant`, `correlated[:eps]` or `chain:<k>[:eps]`.
    pub fn parse(spec: &str, n_users: usize) -> Result<Self> {
        let mut parts = spec.split(':');
        let kind = parts.next().unwrap_or_default();
        let number = |s: Option<&str>, what: &str| -> Result<Option<f64>> {
            s.map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::InvalidChannel(format!("bad {what} {v:?} in {spec:?}")))
            })
            .transpose()
        };
        let channel = match kind {
            "iid" => Self::iid(n_users)?,
            "constant" => Self::constant(n_users)?,
            "correlated" => Self::correlated(number(parts.next(), "epsilon")?.unwrap_or(0.0))?,
            "chain" => {
                let k = number(parts.next(), "state count")?
                    .ok_or_else(|| Error::InvalidChannel("chain needs a state count".into()))?;
                let eps = number(parts.next(), "epsilon")?.unwrap_or(0.0);
                Self::chain(k as usize, eps)?
            }
            other => return Err(Error::InvalidChannel(format!("unknown channel {other:?}"))),
        };
        if parts.next().is_some() {
            return Err(Error::InvalidChannel(format!(
                "trailing fields in {spec:?}"
            )));
        }
        Ok(channel)
    }

    pub fn n_users(&self) -> usize {
        match self {
            Self::IidUniform { n_users } | Self::Constant { n_users } => *n_users,
            Self::DiscreteJoint(t) => t.n_users(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Self::DiscreteJoint(_))
    }

    pub fn table(&self) -> Option<&Arc<DiscreteTable>> {
        match self {
            Self::DiscreteJoint(t) => Some(t),
            _ => None,
        }
    }

    /// Draw one slot.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SlotSample {
        match self {
            Self::IidUniform { n_users } => {
                SlotSample::new((0..*n_users).map(|_| rng.random::<f64>()).collect())
            }
            Self::Constant { n_users } => {
                let aux = (0..*n_users).map(|_| rng.random::<f64>()).collect();
                SlotSample::new(vec![1.0; *n_users]).with_aux(aux)
            }
            Self::DiscreteJoint(t) => {
                let state = t.picker.as_ref().map_or(0, |p| p.sample(rng));
                let mut s = SlotSample::new(t.states[state].clone());
                s.state = Some(state);
                s
            }
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IidUniform { .. } => write!(f, "iid"),
            Self::Constant { .. } => write!(f, "constant"),
            Self::DiscreteJoint(t) => write!(f, "discrete({} states)", t.states.len()),
        }
    }
}

fn check_users(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidChannel(format!(
            "need at least 2 users, got {n}"
        )));
    }
    Ok(())
}

/// Gains of one slot with their order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSample {
    pub gains: Vec<f64>,
    pub order_stats: Vec<f64>,
    /// Private contention draws, present on the constant channel.
    pub aux: Option<Vec<f64>>,
    /// Index of the drawn state on discrete channels.
    pub state: Option<usize>,
}

impl SlotSample {
    pub fn new(gains: Vec<f64>) -> Self {
        let mut order_stats = gains.clone();
        order_stats.sort_by(f64::total_cmp);
        Self {
            gains,
            order_stats,
            aux: None,
            state: None,
        }
    }

    pub fn with_aux(mut self, aux: Vec<f64>) -> Self {
        self.aux = Some(aux);
        self
    }

    /// The values users compare against probe sets.
    pub fn contention_values(&self) -> &[f64] {
        self.aux.as_deref().unwrap_or(&self.gains)
    }

    /// `(Y_{N-1}, Y_N)`.
    pub fn top_two(&self) -> (f64, f64) {
        let n = self.order_stats.len();
        (self.order_stats[n - 2], self.order_stats[n - 1])
    }
}
