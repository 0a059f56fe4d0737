//! Padded batch construction with deterministic shuffling.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arabic::LabeledSequence;

use super::{CharVocab, CorpusError, PAD_ID};

/// Label value for positions excluded from the loss.
pub const IGNORE: i64 = -1;

/// One padded batch. `label_ids` carries true class ids at real positions
/// (spaces included, labeled with the no-tashkeel class) and [`IGNORE`] at
/// padding; which real positions count toward a loss is the trainer's call.
#[derive(Debug, Clone)]
pub struct Batch {
    pub token_ids: Array2<i64>,
    pub label_ids: Array2<i64>,
    pub attention_mask: Array2<u8>,
}

impl Batch {
    pub fn batch_size(&self) -> usize {
        self.token_ids.nrows()
    }

    pub fn seq_len(&self) -> usize {
        self.token_ids.ncols()
    }
}

/// Pad sequences into batches. Order is the seeded shuffle when a seed is
/// given, input order otherwise; each batch pads to its own longest
/// sequence. Fails if any sequence exceeds `max_len`.
pub fn make_batches(
    seqs: &[LabeledSequence],
    vocab: &CharVocab,
    batch_size: usize,
    max_len: usize,
    shuffle_seed: Option<u64>,
) -> Result<Vec<Batch>, CorpusError> {
    assert!(batch_size > 0, "batch_size must be positive");
    for seq in seqs {
        if seq.len() > max_len {
            return Err(CorpusError::SequenceTooLong { len: seq.len(), max: max_len });
        }
    }
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut batches = Vec::with_capacity(seqs.len().div_ceil(batch_size));
    for group in order.chunks(batch_size) {
        let longest = group.iter().map(|&i| seqs[i].len()).max().unwrap_or(0);
        let mut token_ids = Array2::from_elem((group.len(), longest), PAD_ID);
        let mut label_ids = Array2::from_elem((group.len(), longest), IGNORE);
        let mut mask = Array2::zeros((group.len(), longest));
        for (row, &i) in group.iter().enumerate() {
            let seq = &seqs[i];
            for (col, (&ch, &label)) in seq.letters().iter().zip(seq.labels()).enumerate() {
                token_ids[[row, col]] = vocab.id_of(ch);
                label_ids[[row, col]] = label.id() as i64;
                mask[[row, col]] = 1;
            }
        }
        batches.push(Batch { token_ids, label_ids, attention_mask: mask });
    }
    Ok(batches)
}
