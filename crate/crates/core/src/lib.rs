//! Speech anonymization and privacy-utility evaluation.
//!
//! The crate covers the signal-processing anonymizer (LPC pole shifting by a
//! McAdams coefficient), pool-based embedding anonymization, a pitch
//! estimator with the pitch-correlation validity gate, the objective metric
//! suite (EER/DET, WER, voice-similarity matrices and the gain of voice
//! distinctiveness), and the evaluation harness that aggregates metrics,
//! assigns evaluation conditions, and ranks systems.

pub mod audio;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod lpc;
pub mod mcadams;
pub mod metrics;
pub mod pitch;
pub mod poles;

pub use error::{Error, Result};
