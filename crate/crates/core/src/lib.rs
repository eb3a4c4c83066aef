//! Contention resolution for opportunistic scheduling, treated as a source
//! coding problem.
//!
//! In every slot the base station wants the user with the largest channel
//! gain. It broadcasts a threshold interval, users inside it transmit, and it
//! hears back idle (`0`), success (`1`) or collision (`e`). The sequence of
//! feedback symbols is a codeword naming a threshold between the two largest
//! gains, so the mean resolution delay is the mean codeword length.
//!
//! - [`prob`]: region masses and success probabilities for i.i.d. uniform gains.
//! - [`codebook`]: the maximal-probability-allocation (MPA) code with its
//!   entropy and exact expected delay.
//! - [`channel`], [`sim`]: channel models and the slotted feedback engine.
//! - [`strategy`]: OSA, MPA, two-sided splitting and two discrete policies.
//! - [`oracles`]: closed forms and exhaustive replays used as references.
//! - [`verify`]: the acceptance checks behind `contention verify`.

pub mod channel;
pub mod codebook;
pub mod error;
pub mod feedback;
pub mod oracles;
pub mod prob;
pub mod report;
pub mod sim;
pub mod strategy;
pub mod svg;
pub mod verify;

pub use codebook::{build_codebook, CodeEntry, Codebook, CodebookBuilder};
pub use error::{Error, Result};
pub use feedback::{Codeword, Feedback};
pub use prob::{optimal_threshold, region_mass, success_prob, Region};
