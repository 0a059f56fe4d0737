//! Model configuration and the built-in size profiles.

use serde::{Deserialize, Serialize};

use crate::arabic::NUM_CLASSES;

use super::ModelError;

/// Which head(s) a parameter set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Encoder with a vocabulary projection (masked-character pretraining).
    Mlm,
    /// Encoder with a per-position class head.
    Eo,
    /// Encoder-decoder with a class head over the decoder.
    Ed,
}

/// Architecture hyperparameters. Shapes of every parameter array follow
/// from these fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers_encoder: usize,
    /// 0 for encoder-only variants.
    pub n_layers_decoder: usize,
    pub ffn_dim: usize,
    pub dropout: f64,
    pub max_len: usize,
    pub vocab_size: usize,
    pub n_classes: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.d_model == 0 || self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            return Err(ModelError::InvalidConfig(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::InvalidConfig(format!("dropout {} not in [0,1)", self.dropout)));
        }
        if self.max_len == 0 {
            return Err(ModelError::InvalidConfig("max_len must be >= 1".into()));
        }
        if self.vocab_size == 0 || self.n_classes == 0 || self.ffn_dim == 0 {
            return Err(ModelError::InvalidConfig("zero-sized dimension".into()));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Full-scale profile: d=512, 16 heads, dropout 10%, max length 1024,
    /// 6 encoder layers (pretraining and encoder-only) or 3+3.
    pub fn paper(kind: ModelKind, vocab_size: usize) -> Self {
        let (enc, dec) = match kind {
            ModelKind::Mlm | ModelKind::Eo => (6, 0),
            ModelKind::Ed => (3, 3),
        };
        Self {
            d_model: 512,
            n_heads: 16,
            n_layers_encoder: enc,
            n_layers_decoder: dec,
            ffn_dim: 2048,
            dropout: 0.10,
            max_len: 1024,
            vocab_size,
            n_classes: NUM_CLASSES,
        }
    }

    /// Desk-scale profile used by tests and examples: d=64, 4 heads,
    /// 2 encoder layers (1+1 for the encoder-decoder), max length 128.
    pub fn desk(kind: ModelKind, vocab_size: usize) -> Self {
        let (enc, dec) = match kind {
            ModelKind::Mlm | ModelKind::Eo => (2, 0),
            ModelKind::Ed => (1, 1),
        };
        Self {
            d_model: 64,
            n_heads: 4,
            n_layers_encoder: enc,
            n_layers_decoder: dec,
            ffn_dim: 256,
            dropout: 0.10,
            max_len: 128,
            vocab_size,
            n_classes: NUM_CLASSES,
        }
    }

    /// Minimal profile for gradient checking: d=16, 2 heads, max length 8.
    pub fn tiny(kind: ModelKind, vocab_size: usize) -> Self {
        let (enc, dec) = match kind {
            ModelKind::Mlm | ModelKind::Eo => (1, 0),
            ModelKind::Ed => (1, 1),
        };
        Self {
            d_model: 16,
            n_heads: 2,
            n_layers_encoder: enc,
            n_layers_decoder: dec,
            ffn_dim: 32,
            dropout: 0.0,
            max_len: 8,
            vocab_size,
            n_classes: NUM_CLASSES,
        }
    }
}
