//! Gaze-guided text generation.
//!
//! A language model proposes next tokens, a gaze model predicts how long
//! readers will look at the resulting words, and beam search ranks
//! candidates by `token_score + gaze_weight * gaze_score`. Around that core
//! sit the pieces needed to train and evaluate it: fixation detection and
//! reading measures from raw eye-tracking samples, readability statistics,
//! and regression analyses of observed reading times.

pub mod analysis;
pub mod decoder;
pub mod error;
pub mod gaze_model;
pub mod gaze_processing;
pub mod lm;
pub mod metrics;
pub mod ols;
pub mod simulate;
pub mod text;

pub use error::{Error, Result};
