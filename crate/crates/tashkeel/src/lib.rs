//! Character-level Arabic text diacritization toolkit.
//!
//! The pipeline runs end to end at desk scale: a bit-exact codec between
//! diacritized text and (letter skeleton, label) pairs, corpus preparation
//! and filtering, masked-character pretraining of a small transformer,
//! fine-tuning of encoder-only and encoder-decoder diacritizers, one-round
//! noisy-student self-training, and DER/WER evaluation with and without the
//! case ending.
//!
//! Start with the runnable programs under `examples/`; each demonstrates one
//! capability on generated data. The `tashkeel` binary exposes the same
//! pipeline as subcommands.

pub mod arabic;
pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod model;
pub mod noisy_student;
pub mod synthetic;
pub mod train;

pub use arabic::{DiacriticClass, LabeledSequence, NUM_CLASSES};
