//! Word to subword segmentation.
//!
//! The built-in mode prepends the word-boundary marker and performs greedy
//! left-to-right longest-prefix matching against the vocabulary. Words that
//! cannot be covered are skipped (empty output). External mode looks words up
//! in a precomputed table, which lets the output of any real tokenizer be
//! injected verbatim.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::vocab::Vocabulary;

/// SentencePiece word-boundary marker (U+2581).
pub const DEFAULT_BOUNDARY_MARKER: &str = "\u{2581}";

#[derive(Debug, Clone)]
enum Mode {
    Greedy { max_token_len: usize },
    External(HashMap<String, Vec<String>>),
}

#[derive(Debug, Clone)]
pub struct Segmenter<'v> {
    vocab: &'v Vocabulary,
    marker: String,
    mode: Mode,
}

impl<'v> Segmenter<'v> {
    pub fn greedy(vocab: &'v Vocabulary) -> Self {
        let max_token_len = vocab.iter().map(str::len).max().unwrap_or(0);
        Self {
            vocab,
            marker: DEFAULT_BOUNDARY_MARKER.into(),
            mode: Mode::Greedy { max_token_len },
        }
    }

    /// Later entries for the same word replace earlier ones.
    pub fn external<I>(vocab: &'v Vocabulary, segmentations: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<String>)>,
    {
        Self {
            vocab,
            marker: DEFAULT_BOUNDARY_MARKER.into(),
            mode: Mode::External(segmentations.into_iter().collect()),
        }
    }

    pub fn with_marker(mut self, marker: impl Into<String>) -> Self {
        self.marker = marker.into();
        self
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn vocab(&self) -> &'v Vocabulary {
        self.vocab
    }

    pub fn is_external(&self) -> bool {
        matches!(self.mode, Mode::External(_))
    }

    /// Segments `word`. Returns an empty list for words containing whitespace,
    /// empty words, words greedy matching cannot cover, and words missing from
    /// the external table.
    pub fn segment(&self, word: &str) -> Vec<&str> {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Vec::new();
        }
        match &self.mode {
            Mode::External(table) => table
                .get(word)
                .map(|pieces| pieces.iter().map(String::as_str).collect())
                .unwrap_or_default(),
            Mode::Greedy { max_token_len } => self
                .greedy_ids(word, *max_token_len)
                .into_iter()
                .map(|id| self.vocab.token(id))
                .collect(),
        }
    }

    /// Vocabulary indices of the greedy segmentation. In external mode,
    /// pieces absent from the vocabulary are dropped.
    pub fn segment_ids(&self, word: &str) -> Vec<usize> {
        match &self.mode {
            Mode::Greedy { max_token_len } => {
                if word.is_empty() || word.chars().any(char::is_whitespace) {
                    return Vec::new();
                }
                self.greedy_ids(word, *max_token_len)
            }
            Mode::External(_) => self
                .segment(word)
                .into_iter()
                .filter_map(|piece| self.vocab.get(piece))
                .collect(),
        }
    }

    fn greedy_ids(&self, word: &str, max_token_len: usize) -> Vec<usize> {
        let mut text = String::with_capacity(self.marker.len() + word.len());
        text.push_str(&self.marker);
        text.push_str(word);

        let mut out = Vec::new();
        let mut start = 0;
        while start < text.len() {
            let rest = &text[start..];
            let mut end = rest.len().min(max_token_len);
            let mut found = None;
            while end > 0 {
                if rest.is_char_boundary(end) {
                    if let Some(id) = self.vocab.get(&rest[..end]) {
                        found = Some((id, end));
                        break;
                    }
                }
                end -= 1;
            }
            match found {
                Some((id, len)) => {
                    out.push(id);
                    start += len;
                }
                None => return Vec::new(),
            }
        }
        out
    }
}
