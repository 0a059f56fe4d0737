//! Line filters for the fine-tuning and pretraining corpora.

use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arabic::{dtl_ratio, encode, normalize, strip_diacritics, EncodeMode, LabeledSequence};

use super::CorpusStats;

/// Thresholds for the fine-tuning filter. Character counts include letters,
/// marks, and spaces of the normalized line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_chars: usize,
    pub max_chars: usize,
    pub min_dtl: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_chars: 6, max_chars: 1024, min_dtl: 0.60 }
    }
}

impl FilterConfig {
    /// Hash of the exact configuration, for filter-parity assertions.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{}\n{}\n{:.17e}\n", self.min_chars, self.max_chars, self.min_dtl));
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Iterate a reader as raw byte lines (without the newline), so malformed
/// UTF-8 can be counted instead of aborting the run.
pub fn byte_lines<R: BufRead>(reader: R) -> impl Iterator<Item = io::Result<Vec<u8>>> {
    reader.split(b'\n').map(|r| {
        r.map(|mut line| {
            if line.last() == Some(&b'\r') {
                line.pop();
            }
            line
        })
    })
}

fn word_count(skeleton: &str) -> u64 {
    skeleton.split(' ').filter(|w| !w.is_empty()).count() as u64
}

/// Filter diacritized lines for fine-tuning: normalize, drop lines shorter
/// than `min_chars` or longer than `max_chars`, encode in repair mode, drop
/// lines whose diacritics-to-letters ratio is below `min_dtl`. Malformed
/// UTF-8 lines count as encode errors. Survivors are passed to `sink`.
pub fn filter_finetune<I>(
    lines: I,
    cfg: &FilterConfig,
    mut sink: impl FnMut(LabeledSequence) -> io::Result<()>,
) -> io::Result<CorpusStats>
where
    I: IntoIterator<Item = io::Result<Vec<u8>>>,
{
    let mut stats = CorpusStats::default();
    for line in lines {
        let line = line?;
        stats.total_in += 1;
        let Ok(text) = std::str::from_utf8(&line) else {
            stats.dropped_encode_error += 1;
            continue;
        };
        let normalized = normalize(text);
        let n_chars = normalized.chars().count();
        if n_chars < cfg.min_chars || n_chars > cfg.max_chars {
            stats.dropped_length += 1;
            continue;
        }
        let encoded = match encode(&normalized, EncodeMode::Repair) {
            Ok(e) => e,
            Err(_) => {
                stats.dropped_encode_error += 1;
                continue;
            }
        };
        match dtl_ratio(&encoded.seq) {
            Ok(ratio) if ratio >= cfg.min_dtl => {}
            Ok(_) => {
                stats.dropped_dtl += 1;
                continue;
            }
            Err(_) => {
                stats.dropped_encode_error += 1;
                continue;
            }
        }
        stats.kept += 1;
        stats.chars_kept += n_chars as u64;
        stats.words_kept += word_count(&encoded.seq.skeleton());
        sink(encoded.seq)?;
    }
    debug_assert!(stats.balanced());
    Ok(stats)
}

/// Prepare pretraining text: normalize, strip diacritics, and cap each line
/// at `max_len` characters by cutting at the last space at or before that
/// position (the partial final word is dropped). Lines with no space in range
/// are hard-truncated. Empty results are dropped.
pub fn prepare_pretrain<I>(
    lines: I,
    max_len: usize,
    mut sink: impl FnMut(&str) -> io::Result<()>,
) -> io::Result<CorpusStats>
where
    I: IntoIterator<Item = io::Result<Vec<u8>>>,
{
    let mut stats = CorpusStats::default();
    for line in lines {
        let line = line?;
        stats.total_in += 1;
        let Ok(text) = std::str::from_utf8(&line) else {
            stats.dropped_encode_error += 1;
            continue;
        };
        let stripped = strip_diacritics(text);
        let chars: Vec<char> = stripped.chars().collect();
        let truncated: String = if chars.len() > max_len {
            match chars[..(max_len + 1).min(chars.len())].iter().rposition(|&c| c == ' ') {
                Some(s) => chars[..s].iter().collect(),
                None => chars[..max_len].iter().collect(),
            }
        } else {
            stripped
        };
        if truncated.is_empty() {
            stats.dropped_length += 1;
            continue;
        }
        stats.kept += 1;
        stats.chars_kept += truncated.chars().count() as u64;
        stats.words_kept += word_count(&truncated);
        sink(&truncated)?;
    }
    debug_assert!(stats.balanced());
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arabic::decode;

    const BA: char = '\u{0628}';
    const TA: char = '\u{062A}';
    const FATHA: char = '\u{064E}';

    fn lines(v: &[String]) -> Vec<io::Result<Vec<u8>>> {
        v.iter().map(|s| Ok(s.clone().into_bytes())).collect()
    }

    fn diacritized_word(n: usize) -> String {
        (0..n).map(|_| format!("{BA}{FATHA}")).collect()
    }

    #[test]
    fn short_line_dropped_by_length() {
        // 5 total chars counting letters and marks.
        let line = format!("{BA}{FATHA}{BA}{FATHA}{BA}");
        assert_eq!(line.chars().count(), 5);
        let mut kept = Vec::new();
        let stats = filter_finetune(lines(&[line]), &FilterConfig::default(), |s| {
            kept.push(s);
            Ok(())
        })
        .unwrap();
        assert_eq!(stats.dropped_length, 1);
        assert_eq!(stats.kept, 0);
        assert!(stats.balanced());
    }

    #[test]
    fn low_dtl_dropped() {
        // 10 letters, 5 marks: DTL 0.5 < 0.6.
        let line = format!("{}{}", diacritized_word(5), str::repeat(&BA.to_string(), 5));
        let stats = filter_finetune(lines(&[line]), &FilterConfig::default(), |_| Ok(())).unwrap();
        assert_eq!(stats.dropped_dtl, 1);
    }

    #[test]
    fn fully_diacritized_line_kept() {
        let line = diacritized_word(10); // 20 chars, DTL 1.0
        let mut kept = Vec::new();
        let stats = filter_finetune(lines(&[line.clone()]), &FilterConfig::default(), |s| {
            kept.push(s);
            Ok(())
        })
        .unwrap();
        assert_eq!(stats.kept, 1);
        assert_eq!(stats.chars_kept, 20);
        assert_eq!(stats.words_kept, 1);
        assert_eq!(decode(&kept[0]), line);
    }

    #[test]
    fn malformed_utf8_counted_and_skipped() {
        let input: Vec<io::Result<Vec<u8>>> =
            vec![Ok(vec![0xff, 0xfe, 0x41]), Ok(diacritized_word(8).into_bytes())];
        let stats = filter_finetune(input, &FilterConfig::default(), |_| Ok(())).unwrap();
        assert_eq!(stats.dropped_encode_error, 1);
        assert_eq!(stats.kept, 1);
        assert!(stats.balanced());
    }

    #[test]
    fn filter_is_idempotent_on_its_output() {
        let input: Vec<String> = vec![
            diacritized_word(3),                       // short: dropped
            diacritized_word(12),                      // kept
            format!("{} {}", diacritized_word(4), diacritized_word(5)), // kept
            format!("{}", str::repeat(&TA.to_string(), 12)),            // DTL 0: dropped
        ];
        let mut first = Vec::new();
        filter_finetune(lines(&input), &FilterConfig::default(), |s| {
            first.push(s);
            Ok(())
        })
        .unwrap();
        let rerun: Vec<String> = first.iter().map(decode).collect();
        let mut second = Vec::new();
        let stats = filter_finetune(lines(&rerun), &FilterConfig::default(), |s| {
            second.push(s);
            Ok(())
        })
        .unwrap();
        assert_eq!(stats.kept, stats.total_in);
        assert_eq!(first, second);
    }

    #[test]
    fn pretrain_truncates_at_last_space() {
        // 600 chars with a space at index 498 (0-based): output is the first
        // 498 chars. Oracle: scan for the last space at or before the cap.
        let mut s = String::new();
        for i in 0..600 {
            s.push(if i == 498 || i == 540 { ' ' } else { BA });
        }
        let mut out = Vec::new();
        prepare_pretrain(lines(&[s.clone()]), 512, |t| {
            out.push(t.to_string());
            Ok(())
        })
        .unwrap();
        assert_eq!(out[0].chars().count(), 498);
        let oracle: Vec<char> = s.chars().collect();
        let cut = (0..=512).rev().find(|&i| oracle[i] == ' ').unwrap();
        assert_eq!(out[0], oracle[..cut].iter().collect::<String>());
    }

    #[test]
    fn pretrain_short_line_unchanged_and_marks_stripped() {
        let line = diacritized_word(50);
        let mut out = Vec::new();
        prepare_pretrain(lines(&[line]), 512, |t| {
            out.push(t.to_string());
            Ok(())
        })
        .unwrap();
        assert_eq!(out[0], str::repeat(&BA.to_string(), 50));
    }

    #[test]
    fn pretrain_hard_truncates_without_space() {
        let line = str::repeat(&BA.to_string(), 600);
        let mut out = Vec::new();
        let stats = prepare_pretrain(lines(&[line]), 512, |t| {
            out.push(t.to_string());
            Ok(())
        })
        .unwrap();
        assert_eq!(out[0].chars().count(), 512);
        assert_eq!(stats.kept, 1);
    }

    #[test]
    fn config_hash_distinguishes_thresholds() {
        let a = FilterConfig::default();
        let b = FilterConfig { min_dtl: 0.5, ..FilterConfig::default() };
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash(), FilterConfig::default().config_hash());
    }
}
