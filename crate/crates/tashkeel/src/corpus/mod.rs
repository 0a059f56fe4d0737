//! Corpus preparation: filtering for fine-tuning, pretraining text
//! preparation, punctuation-based chunking for long-input inference,
//! vocabulary construction, and batching.
//!
//! Corpus files are UTF-8 plain text, one sentence per line. Labeled corpora
//! use one record per line: skeleton text, a tab, space-separated class ids
//! (one per skeleton character, spaces labeled with the no-tashkeel id), and
//! an optional third tab-separated field `gold` or `pseudo` (default `gold`).

mod batch;
mod chunk;
mod filter;
mod records;
mod vocab;

pub use batch::{make_batches, Batch, IGNORE};
pub use chunk::{chunk_for_inference, recombine, Chunk, SPLIT_PUNCT};
pub use filter::{byte_lines, filter_finetune, prepare_pretrain, FilterConfig};
pub use records::{read_labeled_file, write_labeled_file, LabeledRecord, Provenance};
pub use vocab::{CharVocab, BOS_ID, MASK_ID, PAD_ID, UNK_ID};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from corpus preparation.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus contains no letters")]
    EmptyCorpus,
    #[error("sequence of length {len} exceeds max length {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("segment/separator count mismatch: {segments} vs {separators}")]
    CountMismatch { segments: usize, separators: usize },
    #[error("bad record at line {line}: {msg}")]
    BadRecord { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Exact accounting of a preparation run. `total_in` always equals
/// `kept + dropped_length + dropped_dtl + dropped_encode_error`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_in: u64,
    pub kept: u64,
    pub dropped_length: u64,
    pub dropped_dtl: u64,
    pub dropped_encode_error: u64,
    pub chars_kept: u64,
    pub words_kept: u64,
}

impl CorpusStats {
    /// Check the conservation invariant.
    pub fn balanced(&self) -> bool {
        self.total_in == self.kept + self.dropped_length + self.dropped_dtl + self.dropped_encode_error
    }

    /// Associative merge for parallel or per-provenance accounting.
    pub fn merge(&mut self, other: &CorpusStats) {
        self.total_in += other.total_in;
        self.kept += other.kept;
        self.dropped_length += other.dropped_length;
        self.dropped_dtl += other.dropped_dtl;
        self.dropped_encode_error += other.dropped_encode_error;
        self.chars_kept += other.chars_kept;
        self.words_kept += other.words_kept;
    }
}
