use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Ternary minislot feedback broadcast by the base station.
///
/// The declaration order fixes the codeword ordering: `e < 0 < 1`, so among
/// equally likely N=2 codewords the larger threshold sorts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feedback {
    Collision,
    Idle,
    Success,
}

impl Feedback {
    /// Classify a transmitter count.
    pub fn from_count(count: usize) -> Self {
        match count {
            0 => Feedback::Idle,
            1 => Feedback::Success,
            _ => Feedback::Collision,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Feedback::Collision => 'e',
            Feedback::Idle => '0',
            Feedback::Success => '1',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'e' => Some(Feedback::Collision),
            '0' => Some(Feedback::Idle),
            '1' => Some(Feedback::Success),
            _ => None,
        }
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl Serialize for Feedback {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_char(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Feedback {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let c = char::deserialize(d)?;
        Feedback::from_symbol(c)
            .ok_or_else(|| serde::de::Error::custom(format!("bad feedback {c:?}")))
    }
}

/// A feedback transcript, e.g. `e01`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Codeword(Vec<Feedback>);

impl Codeword {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbols(&self) -> &[Feedback] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, fb: Feedback) {
        self.0.push(fb);
    }

    pub fn with(&self, fb: Feedback) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.extend_from_slice(&self.0);
        out.push(fb);
        Self(out)
    }

    pub fn last(&self) -> Option<Feedback> {
        self.0.last().copied()
    }

    /// A codeword proper: only `e`/`0` symbols followed by one terminal `1`.
    pub fn is_terminated(&self) -> bool {
        match self.0.split_last() {
            Some((Feedback::Success, head)) => !head.contains(&Feedback::Success),
            _ => false,
        }
    }

    /// Read the codeword as a binary fraction with `e, 1 -> 1` and `0 -> 0`.
    pub fn binary_value(&self) -> f64 {
        let mut value = 0.0;
        let mut weight = 0.5;
        for fb in &self.0 {
            if *fb != Feedback::Idle {
                value += weight;
            }
            weight *= 0.5;
        }
        value
    }
}

impl From<Vec<Feedback>> for Codeword {
    fn from(v: Vec<Feedback>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fb in &self.0 {
            write!(f, "{}", fb.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| {
                Feedback::from_symbol(c).ok_or(Error::Domain {
                    what: "codeword symbol",
                    range: "{e, 0, 1}",
                    value: c as u32 as f64,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Codeword)
    }
}

impl Serialize for Codeword {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Codeword {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
