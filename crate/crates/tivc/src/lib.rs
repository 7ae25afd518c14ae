//! Text-instruction-guided voice conversion as conditional codec language
//! modeling.
//!
//! The pipeline: speech is encoded to an 8-stage discrete code grid by a
//! residual-vector-quantized transform codec, an autoregressive model converts
//! the first-stage codes under a text instruction, a non-autoregressive model
//! fills stages 2-8, and the codec decoder reconstructs audio. The crate also
//! builds its own instruction-paired datasets and evaluates conversion success
//! with signal-processing metrics.

pub mod audio;
pub mod codec;
pub mod config;
pub mod dataset;
pub mod effects;
pub mod error;
pub mod eval;
pub mod instructions;
pub mod lm;

pub use error::{Error, Result};
