//! Generated toy language for desk-scale runs: every letter's diacritic is a
//! deterministic function of its left and right neighbor letters (word
//! boundaries act as a single sentinel neighbor). Models that read local
//! context can solve it exactly, which makes it a useful stand-in corpus for
//! training demos and end-to-end checks without shipping real data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arabic::{decode, DiacriticClass, LabeledSequence, ALL_CLASSES, SPACE};

/// Letters used by the generated language (a common subset of the alphabet).
const LETTERS: [char; 18] = [
    '\u{0628}', '\u{062A}', '\u{062B}', '\u{062C}', '\u{062D}', '\u{062E}', '\u{062F}',
    '\u{0631}', '\u{0632}', '\u{0633}', '\u{0634}', '\u{0635}', '\u{0639}', '\u{0641}',
    '\u{0642}', '\u{0643}', '\u{0644}', '\u{0645}',
];

/// A seeded (left, right) -> class rule plus sentence shape parameters.
#[derive(Debug, Clone)]
pub struct RuleLang {
    table: Vec<DiacriticClass>, // (n_letters + 1)^2 entries; last index = boundary
    min_word: usize,
    max_word: usize,
    min_words: usize,
    max_words: usize,
}

impl RuleLang {
    /// Build the rule table from a seed.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = LETTERS.len() + 1;
        let table = (0..n * n).map(|_| ALL_CLASSES[rng.gen_range(0..ALL_CLASSES.len())]).collect();
        Self { table, min_word: 2, max_word: 7, min_words: 3, max_words: 8 }
    }

    fn letter_index(c: char) -> Option<usize> {
        LETTERS.iter().position(|&l| l == c)
    }

    fn neighbor_index(c: Option<char>) -> usize {
        match c {
            Some(ch) if ch != SPACE => Self::letter_index(ch).expect("letter from this alphabet"),
            _ => LETTERS.len(), // boundary sentinel
        }
    }

    /// The class the rule assigns given the left and right neighbors.
    pub fn rule(&self, left: Option<char>, right: Option<char>) -> DiacriticClass {
        let n = LETTERS.len() + 1;
        self.table[Self::neighbor_index(left) * n + Self::neighbor_index(right)]
    }

    /// Label a skeleton (letters and spaces) according to the rule.
    pub fn label_skeleton(&self, skeleton: &str) -> LabeledSequence {
        let chars: Vec<char> = skeleton.chars().collect();
        let labels: Vec<DiacriticClass> = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if c == SPACE {
                    DiacriticClass::NoTashkeel
                } else {
                    let left = if i > 0 { Some(chars[i - 1]) } else { None };
                    let right = chars.get(i + 1).copied();
                    self.rule(left, right)
                }
            })
            .collect();
        LabeledSequence::new(chars, labels).expect("generated skeleton is well-formed")
    }

    /// Sample one bare skeleton sentence.
    pub fn sample_skeleton(&self, rng: &mut ChaCha8Rng) -> String {
        let n_words = rng.gen_range(self.min_words..=self.max_words);
        let mut words = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            let len = rng.gen_range(self.min_word..=self.max_word);
            let word: String =
                (0..len).map(|_| *LETTERS.choose(rng).expect("non-empty alphabet")).collect();
            words.push(word);
        }
        words.join(" ")
    }

    /// Sample one fully diacritized sentence.
    pub fn sample_diacritized(&self, rng: &mut ChaCha8Rng) -> String {
        decode(&self.label_skeleton(&self.sample_skeleton(rng)))
    }

    /// Generate `n` diacritized sentences.
    pub fn diacritized_corpus(&self, n: usize, seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample_diacritized(&mut rng)).collect()
    }

    /// Generate `n` bare skeleton sentences.
    pub fn skeleton_corpus(&self, n: usize, seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample_skeleton(&mut rng)).collect()
    }
}
