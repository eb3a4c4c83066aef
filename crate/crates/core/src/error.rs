use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region ({a}, {b}] for {n_users} users")]
    InvalidRegion { a: f64, b: f64, n_users: u32 },

    #[error("threshold {y} lies outside region [{a}, {b}]")]
    ThresholdOutOfRange { y: f64, a: f64, b: f64 },

    #[error("{what} must lie in {range}, got {value}")]
    Domain {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("pair ({y_second}, {y_max}) is resolved below the enumeration cutoff (codeword prefix {prefix})")]
    UnresolvedAtCutoff {
        y_second: f64,
        y_max: f64,
        prefix: String,
    },

    #[error("strategy did not terminate on state {state} within {bound} steps")]
    Divergence { state: usize, bound: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error(
        "unknown strategy {0:?} (expected osa, mpa, two-sided, discrete-mpa or discrete-bisect)"
    )]
    UnknownStrategy(String),

    #[error("strategy {strategy} cannot run on channel {channel}")]
    Incompatible { strategy: String, channel: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {path}: {source}")]
    Export {
        path: PathBuf,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
