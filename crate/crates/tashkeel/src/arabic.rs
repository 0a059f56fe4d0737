//! Codec between diacritized Arabic text and (letter skeleton, label sequence)
//! pairs, plus the normalization that makes the mapping bit-exact.
//!
//! The label alphabet is a closed set of 15 classes: the three short vowels,
//! the three tanween marks, shadda alone, shadda combined with each vowel or
//! tanween, sukoon, and "no tashkeel". Each class has a canonical mark string
//! of 0-2 codepoints from U+064B..U+0652, with shadda always written first.
//!
//! The letter inventory is U+0621..U+063A and U+0641..U+064A (covering the
//! hamza/alef forms and ta marbuta, which fall inside those ranges). Tatweel
//! (U+0640), superscript alef (U+0670), alef wasla (U+0671), Quranic
//! annotation marks, and anything non-Arabic classify as `Other` and are
//! removed by [`normalize`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Space separator retained by the codec.
pub const SPACE: char = ' ';

const FATHATAN: char = '\u{064B}';
const DAMMATAN: char = '\u{064C}';
const KASRATAN: char = '\u{064D}';
const FATHA: char = '\u{064E}';
const DAMMA: char = '\u{064F}';
const KASRA: char = '\u{0650}';
const SHADDA: char = '\u{0651}';
const SUKOON: char = '\u{0652}';

/// Errors from the codec.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArabicError {
    /// A letter carries a mark run that is not one of the 15 classes.
    #[error("invalid mark combination {marks:?} on letter {letter_index}")]
    InvalidMarkCombination {
        /// Index of the offending letter among letter/space positions.
        letter_index: usize,
        /// The offending mark run, in canonical order.
        marks: Vec<char>,
    },
    /// The sequence contains no Arabic letters.
    #[error("sequence contains no letters")]
    NoLetters,
}

/// The 15 diacritic label classes. Integer ids follow declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum DiacriticClass {
    Fatha = 0,
    Kasra = 1,
    Dhamma = 2,
    TanweenFath = 3,
    TanweenKasr = 4,
    TanweenDhamm = 5,
    Shadda = 6,
    ShaddaFatha = 7,
    ShaddaKasra = 8,
    ShaddaDhamma = 9,
    ShaddaTanweenFath = 10,
    ShaddaTanweenKasr = 11,
    ShaddaTanweenDhamm = 12,
    Sukoon = 13,
    NoTashkeel = 14,
}

/// Number of diacritic classes.
pub const NUM_CLASSES: usize = 15;

/// All classes in id order.
pub const ALL_CLASSES: [DiacriticClass; NUM_CLASSES] = [
    DiacriticClass::Fatha,
    DiacriticClass::Kasra,
    DiacriticClass::Dhamma,
    DiacriticClass::TanweenFath,
    DiacriticClass::TanweenKasr,
    DiacriticClass::TanweenDhamm,
    DiacriticClass::Shadda,
    DiacriticClass::ShaddaFatha,
    DiacriticClass::ShaddaKasra,
    DiacriticClass::ShaddaDhamma,
    DiacriticClass::ShaddaTanweenFath,
    DiacriticClass::ShaddaTanweenKasr,
    DiacriticClass::ShaddaTanweenDhamm,
    DiacriticClass::Sukoon,
    DiacriticClass::NoTashkeel,
];

impl DiacriticClass {
    /// Integer id in 0..15.
    pub fn id(self) -> usize {
        self as usize
    }

    /// Class from its integer id.
    pub fn from_id(id: usize) -> Option<Self> {
        ALL_CLASSES.get(id).copied()
    }

    /// Stable class name.
    pub fn name(self) -> &'static str {
        match self {
            DiacriticClass::Fatha => "Fatha",
            DiacriticClass::Kasra => "Kasra",
            DiacriticClass::Dhamma => "Dhamma",
            DiacriticClass::TanweenFath => "TanweenFath",
            DiacriticClass::TanweenKasr => "TanweenKasr",
            DiacriticClass::TanweenDhamm => "TanweenDhamm",
            DiacriticClass::Shadda => "Shadda",
            DiacriticClass::ShaddaFatha => "ShaddaFatha",
            DiacriticClass::ShaddaKasra => "ShaddaKasra",
            DiacriticClass::ShaddaDhamma => "ShaddaDhamma",
            DiacriticClass::ShaddaTanweenFath => "ShaddaTanweenFath",
            DiacriticClass::ShaddaTanweenKasr => "ShaddaTanweenKasr",
            DiacriticClass::ShaddaTanweenDhamm => "ShaddaTanweenDhamm",
            DiacriticClass::Sukoon => "Sukoon",
            DiacriticClass::NoTashkeel => "NoTashkeel",
        }
    }

    /// Canonical mark string: shadda first, then the vowel/tanween/sukoon.
    pub fn marks(self) -> &'static [char] {
        match self {
            DiacriticClass::Fatha => &[FATHA],
            DiacriticClass::Kasra => &[KASRA],
            DiacriticClass::Dhamma => &[DAMMA],
            DiacriticClass::TanweenFath => &[FATHATAN],
            DiacriticClass::TanweenKasr => &[KASRATAN],
            DiacriticClass::TanweenDhamm => &[DAMMATAN],
            DiacriticClass::Shadda => &[SHADDA],
            DiacriticClass::ShaddaFatha => &[SHADDA, FATHA],
            DiacriticClass::ShaddaKasra => &[SHADDA, KASRA],
            DiacriticClass::ShaddaDhamma => &[SHADDA, DAMMA],
            DiacriticClass::ShaddaTanweenFath => &[SHADDA, FATHATAN],
            DiacriticClass::ShaddaTanweenKasr => &[SHADDA, KASRATAN],
            DiacriticClass::ShaddaTanweenDhamm => &[SHADDA, DAMMATAN],
            DiacriticClass::Sukoon => &[SUKOON],
            DiacriticClass::NoTashkeel => &[],
        }
    }

    /// Number of mark codepoints this class contributes when decoded.
    pub fn mark_count(self) -> usize {
        self.marks().len()
    }

    /// Class for a canonical mark run (shadda first, no duplicates).
    /// `None` when the run is not one of the 15 classes.
    pub fn from_marks(marks: &[char]) -> Option<Self> {
        ALL_CLASSES.iter().copied().find(|c| c.marks() == marks)
    }
}

/// What a codepoint is, for the purposes of the codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodepointKind {
    ArabicLetter,
    DiacriticMark,
    Space,
    Other,
}

/// Classify a codepoint. Every codepoint maps to exactly one kind.
pub fn classify_codepoint(cp: char) -> CodepointKind {
    match cp {
        ' ' => CodepointKind::Space,
        '\u{064B}'..='\u{0652}' => CodepointKind::DiacriticMark,
        '\u{0621}'..='\u{063A}' | '\u{0641}'..='\u{064A}' => CodepointKind::ArabicLetter,
        _ => CodepointKind::Other,
    }
}

/// An aligned pair of letter skeleton and per-position labels.
///
/// Invariants: equal lengths, spaces labeled `NoTashkeel`, no leading,
/// trailing, or doubled spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    letters: Vec<char>,
    labels: Vec<DiacriticClass>,
}

impl LabeledSequence {
    /// Build a sequence, checking all invariants.
    pub fn new(letters: Vec<char>, labels: Vec<DiacriticClass>) -> Result<Self, String> {
        if letters.len() != labels.len() {
            return Err(format!(
                "length mismatch: {} letters vs {} labels",
                letters.len(),
                labels.len()
            ));
        }
        let mut prev_space = true; // rejects a leading space
        for (i, (&ch, &label)) in letters.iter().zip(&labels).enumerate() {
            match classify_codepoint(ch) {
                CodepointKind::ArabicLetter => prev_space = false,
                CodepointKind::Space => {
                    if prev_space {
                        return Err(format!("leading or doubled space at position {i}"));
                    }
                    if label != DiacriticClass::NoTashkeel {
                        return Err(format!("space at position {i} labeled {}", label.name()));
                    }
                    prev_space = true;
                }
                _ => return Err(format!("position {i} is not a letter or space: {ch:?}")),
            }
        }
        if letters.last() == Some(&SPACE) {
            return Err("trailing space".into());
        }
        Ok(Self { letters, labels })
    }

    pub fn empty() -> Self {
        Self { letters: Vec::new(), labels: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn labels(&self) -> &[DiacriticClass] {
        &self.labels
    }

    /// Letter positions only (spaces excluded).
    pub fn letter_count(&self) -> usize {
        self.letters
            .iter()
            .filter(|&&c| classify_codepoint(c) == CodepointKind::ArabicLetter)
            .count()
    }

    /// The skeleton as a string (letters and spaces, no marks).
    pub fn skeleton(&self) -> String {
        self.letters.iter().collect()
    }

    /// Replace the labels, keeping the skeleton. Space positions in the new
    /// labels are forced to `NoTashkeel` so the invariants hold.
    pub fn with_labels(&self, labels: Vec<DiacriticClass>) -> Result<Self, String> {
        if labels.len() != self.letters.len() {
            return Err(format!(
                "label count {} does not match skeleton length {}",
                labels.len(),
                self.letters.len()
            ));
        }
        let mut labels = labels;
        for (ch, label) in self.letters.iter().zip(labels.iter_mut()) {
            if *ch == SPACE {
                *label = DiacriticClass::NoTashkeel;
            }
        }
        Self::new(self.letters.clone(), labels)
    }
}

/// One letter (or space) with its canonicalized mark run.
struct Span {
    ch: char,
    marks: Vec<char>,
}

fn is_shadda(c: char) -> bool {
    c == SHADDA
}

/// Canonicalize a mark run: shadda hoisted to the front, duplicates removed,
/// remaining marks in first-appearance order.
fn canonical_run(run: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(2);
    if run.iter().any(|&c| is_shadda(c)) {
        out.push(SHADDA);
    }
    for &c in run {
        if !is_shadda(c) && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Parse text into letter/space spans with canonical mark runs. Marks that do
/// not follow a letter are dropped; the count of dropped marks is returned.
fn spans_of(text: &str) -> (Vec<Span>, usize) {
    let mut spans: Vec<Span> = Vec::new();
    let mut orphans = 0usize;
    let mut current_run: Vec<char> = Vec::new();
    let mut run_open = false; // the last span is a letter still collecting marks

    let mut flush = |spans: &mut Vec<Span>, run: &mut Vec<char>| {
        if let Some(last) = spans.last_mut() {
            last.marks = canonical_run(run);
        }
        run.clear();
    };

    for ch in text.chars() {
        match classify_codepoint(ch) {
            CodepointKind::ArabicLetter => {
                if run_open {
                    flush(&mut spans, &mut current_run);
                }
                spans.push(Span { ch, marks: Vec::new() });
                run_open = true;
            }
            CodepointKind::DiacriticMark => {
                if run_open {
                    current_run.push(ch);
                } else {
                    orphans += 1;
                }
            }
            CodepointKind::Space => {
                if run_open {
                    flush(&mut spans, &mut current_run);
                    run_open = false;
                }
                spans.push(Span { ch: SPACE, marks: Vec::new() });
            }
            CodepointKind::Other => {
                // Removed entirely; the mark run of the preceding letter
                // continues across it.
            }
        }
    }
    if run_open {
        flush(&mut spans, &mut current_run);
    }
    (spans, orphans)
}

/// Collapse space runs and trim boundary spaces, in place.
fn tidy_spaces(spans: &mut Vec<Span>) {
    spans.dedup_by(|b, a| a.ch == SPACE && b.ch == SPACE);
    if spans.first().map(|s| s.ch) == Some(SPACE) {
        spans.remove(0);
    }
    if spans.last().map(|s| s.ch) == Some(SPACE) {
        spans.pop();
    }
}

/// Normalize text: remove non-Arabic codepoints, collapse and trim spaces,
/// canonicalize each letter's mark run (shadda first, duplicates removed).
/// Marks with no preceding letter are dropped.
pub fn normalize(text: &str) -> String {
    let (mut spans, _orphans) = spans_of(text);
    tidy_spaces(&mut spans);
    let mut out = String::with_capacity(text.len());
    for span in &spans {
        out.push(span.ch);
        out.extend(span.marks.iter());
    }
    out
}

/// How [`encode`] treats mark runs outside the 15-class table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodeMode {
    /// Fail with [`ArabicError::InvalidMarkCombination`].
    Strict,
    /// Keep shadda if present and the last vowel/tanween/sukoon mark; if that
    /// still is not a class (shadda + sukoon), keep shadda alone.
    Repair,
}

/// Result of [`encode`], with counts of what was cleaned up.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub seq: LabeledSequence,
    /// Marks with no preceding letter, dropped.
    pub orphan_marks: usize,
    /// Letters whose mark run was repaired (repair mode only).
    pub repaired: usize,
}

fn repair_run(run: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(2);
    let has_shadda = run.iter().any(|&c| is_shadda(c));
    if has_shadda {
        out.push(SHADDA);
    }
    if let Some(&last) = run.iter().rev().find(|&&c| !is_shadda(c)) {
        out.push(last);
    }
    if DiacriticClass::from_marks(&out).is_none() {
        // Only reachable for shadda + sukoon.
        out.truncate(1);
    }
    out
}

/// Encode text into a labeled sequence. The input is expected to be
/// [`normalize`] output; arbitrary text is still handled (orphan marks are
/// dropped and counted, spaces re-tidied).
pub fn encode(text: &str, mode: EncodeMode) -> Result<Encoded, ArabicError> {
    let (mut spans, orphan_marks) = spans_of(text);
    tidy_spaces(&mut spans);

    let mut letters = Vec::with_capacity(spans.len());
    let mut labels = Vec::with_capacity(spans.len());
    let mut repaired = 0usize;
    for (i, span) in spans.iter().enumerate() {
        let label = match DiacriticClass::from_marks(&span.marks) {
            Some(c) => c,
            None => match mode {
                EncodeMode::Strict => {
                    return Err(ArabicError::InvalidMarkCombination {
                        letter_index: i,
                        marks: span.marks.clone(),
                    })
                }
                EncodeMode::Repair => {
                    repaired += 1;
                    DiacriticClass::from_marks(&repair_run(&span.marks))
                        .expect("repair always yields a class")
                }
            },
        };
        letters.push(span.ch);
        labels.push(label);
    }
    let seq = LabeledSequence::new(letters, labels).expect("spans satisfy invariants");
    Ok(Encoded { seq, orphan_marks, repaired })
}

/// Decode a labeled sequence back to text with canonical mark order.
pub fn decode(seq: &LabeledSequence) -> String {
    let mut out = String::with_capacity(seq.len() * 2);
    for (&ch, &label) in seq.letters().iter().zip(seq.labels()) {
        out.push(ch);
        out.extend(label.marks().iter());
    }
    out
}

/// Normalize and remove all diacritic marks, keeping the letter skeleton.
pub fn strip_diacritics(text: &str) -> String {
    normalize(text)
        .chars()
        .filter(|&c| classify_codepoint(c) != CodepointKind::DiacriticMark)
        .collect()
}

/// Diacritics-to-letters ratio: mark codepoints in the canonical decoding
/// divided by letter positions. Shadda-combination labels count 2 marks, so
/// the ratio can exceed 1.
pub fn dtl_ratio(seq: &LabeledSequence) -> Result<f64, ArabicError> {
    let letters = seq.letter_count();
    if letters == 0 {
        return Err(ArabicError::NoLetters);
    }
    let marks: usize = seq.labels().iter().map(|l| l.mark_count()).sum();
    Ok(marks as f64 / letters as f64)
}

/// The class table as a TSV document: `id<TAB>name<TAB>codepoints`, one row
/// per class, codepoints space-joined as `U+XXXX` (`-` for none). Third
/// parties can verify the codec against this file bit-exactly.
pub fn class_table_tsv() -> String {
    let mut out = String::from("id\tname\tcodepoints\n");
    for class in ALL_CLASSES {
        let marks = if class.marks().is_empty() {
            "-".to_string()
        } else {
            class
                .marks()
                .iter()
                .map(|c| format!("U+{:04X}", *c as u32))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("{}\t{}\t{}\n", class.id(), class.name(), marks));
    }
    out
}
