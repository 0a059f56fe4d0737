//! Character vocabulary shared by pretraining and fine-tuning.

use std::collections::HashMap;
use std::io::{self, Write};

use sha2::{Digest, Sha256};

use crate::arabic::{classify_codepoint, CodepointKind};

use super::CorpusError;

pub const PAD_ID: i64 = 0;
pub const MASK_ID: i64 = 1;
pub const BOS_ID: i64 = 2;
pub const UNK_ID: i64 = 3;
const FIRST_CHAR_ID: i64 = 4;
const SPECIAL_NAMES: [&str; 4] = ["<pad>", "<mask>", "<bos>", "<unk>"];

/// Bidirectional map between codepoints and integer ids. Ids 0..=3 are the
/// reserved specials; real characters are assigned ids in descending corpus
/// frequency, ties broken by codepoint. Diacritic marks are never part of
/// the input vocabulary (labels live in the class alphabet).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVocab {
    chars: Vec<char>,
    id_of: HashMap<char, i64>,
}

impl CharVocab {
    /// Build from normalized corpus lines. Counts letters and spaces;
    /// ignores marks; anything else is rejected at lookup time via UNK.
    /// Space is always included even if absent from the corpus.
    pub fn build<'a, I>(lines: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut freq: HashMap<char, u64> = HashMap::new();
        freq.insert(' ', 0);
        let mut saw_letter = false;
        for line in lines {
            for c in line.chars() {
                match classify_codepoint(c) {
                    CodepointKind::ArabicLetter => {
                        saw_letter = true;
                        *freq.entry(c).or_insert(0) += 1;
                    }
                    CodepointKind::Space => *freq.entry(c).or_insert(0) += 1,
                    _ => {}
                }
            }
        }
        if !saw_letter {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut entries: Vec<(char, u64)> = freq.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(Self::from_chars(entries.into_iter().map(|(c, _)| c)))
    }

    fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let chars: Vec<char> = chars.into_iter().collect();
        let id_of = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, FIRST_CHAR_ID + i as i64))
            .collect();
        Self { chars, id_of }
    }

    /// Id for a codepoint; unseen codepoints map to UNK.
    pub fn id_of(&self, c: char) -> i64 {
        self.id_of.get(&c).copied().unwrap_or(UNK_ID)
    }

    /// Codepoint for a real-character id; `None` for specials and
    /// out-of-range ids.
    pub fn char_of(&self, id: i64) -> Option<char> {
        if id < FIRST_CHAR_ID {
            return None;
        }
        self.chars.get((id - FIRST_CHAR_ID) as usize).copied()
    }

    /// Total vocabulary size including the 4 specials.
    pub fn size(&self) -> usize {
        self.chars.len() + FIRST_CHAR_ID as usize
    }

    /// Ids of the real (non-special) characters, for random replacement in
    /// mask corruption.
    pub fn real_id_range(&self) -> std::ops::Range<i64> {
        FIRST_CHAR_ID..self.size() as i64
    }

    /// Encode a skeleton string to ids.
    pub fn encode(&self, skeleton: &str) -> Vec<i64> {
        skeleton.chars().map(|c| self.id_of(c)).collect()
    }

    /// Serialize as TSV: `id<TAB>token`, specials first, then `U+XXXX` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, name) in SPECIAL_NAMES.iter().enumerate() {
            out.push_str(&format!("{i}\t{name}\n"));
        }
        for (i, c) in self.chars.iter().enumerate() {
            out.push_str(&format!("{}\tU+{:04X}\n", FIRST_CHAR_ID + i as i64, *c as u32));
        }
        out
    }

    /// Parse the TSV produced by [`CharVocab::to_tsv`].
    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut chars = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut fields = line.split('\t');
            let (Some(id), Some(token), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(CorpusError::BadRecord {
                    line: lineno + 1,
                    msg: "expected two tab-separated fields".into(),
                });
            };
            let id: i64 = id.parse().map_err(|e| CorpusError::BadRecord {
                line: lineno + 1,
                msg: format!("bad id: {e}"),
            })?;
            if id < FIRST_CHAR_ID {
                let expect = SPECIAL_NAMES.get(id as usize).copied().unwrap_or("");
                if token != expect {
                    return Err(CorpusError::BadRecord {
                        line: lineno + 1,
                        msg: format!("special id {id} must be {expect}"),
                    });
                }
                continue;
            }
            let cp = token
                .strip_prefix("U+")
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .and_then(char::from_u32)
                .ok_or_else(|| CorpusError::BadRecord {
                    line: lineno + 1,
                    msg: format!("bad codepoint token {token:?}"),
                })?;
            if id != FIRST_CHAR_ID + chars.len() as i64 {
                return Err(CorpusError::BadRecord {
                    line: lineno + 1,
                    msg: format!("non-contiguous id {id}"),
                });
            }
            chars.push(cp);
        }
        if chars.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        Ok(Self::from_chars(chars))
    }

    /// SHA-256 of the TSV serialization, hex-encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_tsv().as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Write the TSV form to a writer.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(self.to_tsv().as_bytes())
    }
}
