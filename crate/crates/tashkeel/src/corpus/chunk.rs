//! Punctuation-based segmentation for long-input inference. Splitting is
//! lossless: concatenating each segment with its separator reproduces the
//! input byte-exactly.

use super::CorpusError;

/// Separators that end a segment (English and Arabic sentence punctuation
/// plus newline).
pub const SPLIT_PUNCT: [char; 10] = ['.', ',', ';', ':', '!', '?', '\u{060C}', '\u{061B}', '\u{061F}', '\n'];

/// One segment and the separator text that followed it in the input
/// (possibly empty at end of input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub segment: String,
    pub separator: String,
}

fn is_split(c: char) -> bool {
    SPLIT_PUNCT.contains(&c)
}

/// Split text into segments at punctuation. A separator starts at a
/// punctuation character and absorbs any following punctuation or
/// whitespace. Segments still longer than `max_len` characters are further
/// split at the last space under the limit (hard cut when there is none).
pub fn chunk_for_inference(text: &str, max_len: usize) -> Vec<Chunk> {
    let mut coarse: Vec<Chunk> = Vec::new();
    let mut segment = String::new();
    let mut separator = String::new();
    let mut in_separator = false;
    for c in text.chars() {
        if in_separator {
            if is_split(c) || c.is_whitespace() {
                separator.push(c);
                continue;
            }
            coarse.push(Chunk {
                segment: std::mem::take(&mut segment),
                separator: std::mem::take(&mut separator),
            });
            in_separator = false;
        }
        if is_split(c) {
            separator.push(c);
            in_separator = true;
        } else {
            segment.push(c);
        }
    }
    if !segment.is_empty() || !separator.is_empty() {
        coarse.push(Chunk { segment, separator });
    }

    let mut out = Vec::with_capacity(coarse.len());
    for chunk in coarse {
        split_long(&chunk, max_len, &mut out);
    }
    out
}

fn split_long(chunk: &Chunk, max_len: usize, out: &mut Vec<Chunk>) {
    let mut rest: Vec<char> = chunk.segment.chars().collect();
    while rest.len() > max_len {
        let window = &rest[..(max_len + 1).min(rest.len())];
        match window.iter().rposition(|&c| c == ' ') {
            Some(s) => {
                out.push(Chunk {
                    segment: rest[..s].iter().collect(),
                    separator: " ".to_string(),
                });
                rest.drain(..=s);
            }
            None => {
                out.push(Chunk {
                    segment: rest[..max_len].iter().collect(),
                    separator: String::new(),
                });
                rest.drain(..max_len);
            }
        }
    }
    out.push(Chunk { segment: rest.into_iter().collect(), separator: chunk.separator.clone() });
}

/// Interleave diacritized segments with the separators captured by
/// [`chunk_for_inference`].
pub fn recombine(segments: &[String], separators: &[String]) -> Result<String, CorpusError> {
    if segments.len() != separators.len() {
        return Err(CorpusError::CountMismatch {
            segments: segments.len(),
            separators: separators.len(),
        });
    }
    let mut out = String::new();
    for (seg, sep) in segments.iter().zip(separators) {
        out.push_str(seg);
        out.push_str(sep);
    }
    Ok(out)
}

/// Reconstruct the input from chunks unchanged (identity diacritizer).
pub fn reassemble(chunks: &[Chunk]) -> String {
    let mut out = String::new();
    for c in chunks {
        out.push_str(&c.segment);
        out.push_str(&c.separator);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separators_absorb_trailing_whitespace() {
        let chunks = chunk_for_inference("a\u{060C} b.", 1024);
        assert_eq!(
            chunks,
            vec![
                Chunk { segment: "a".into(), separator: "\u{060C} ".into() },
                Chunk { segment: "b".into(), separator: ".".into() },
            ]
        );
        assert_eq!(reassemble(&chunks), "a\u{060C} b.");
    }

    #[test]
    fn no_punctuation_single_segment() {
        let chunks = chunk_for_inference("abc def", 1024);
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].segment, "abc def");
        assert_eq!(chunks[0].separator, "");
    }

    #[test]
    fn empty_input_no_chunks() {
        assert!(chunk_for_inference("", 1024).is_empty());
        assert_eq!(recombine(&[], &[]).unwrap(), "");
    }

    #[test]
    fn long_unpunctuated_text_splits_under_limit() {
        let word = "abcd ";
        let text: String = word.repeat(600); // 3000 chars
        let chunks = chunk_for_inference(&text, 1024);
        assert!(chunks.len() >= 3);
        for c in &chunks {
            assert!(c.segment.chars().count() <= 1024);
        }
        assert_eq!(reassemble(&chunks), text);
    }

    #[test]
    fn hard_cut_when_no_space() {
        let text = "x".repeat(2100);
        let chunks = chunk_for_inference(&text, 1024);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[0].segment.chars().count(), 1024);
        assert_eq!(reassemble(&chunks), text);
    }

    #[test]
    fn recombine_rejects_count_mismatch() {
        let err = recombine(&["a".into()], &[]).unwrap_err();
        assert!(matches!(err, CorpusError::CountMismatch { .. }));
    }

    #[test]
    fn consecutive_punctuation_is_one_separator() {
        let chunks = chunk_for_inference("a?! b", 1024);
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].separator, "?! ");
        assert_eq!(reassemble(&chunks), "a?! b");
    }
}
