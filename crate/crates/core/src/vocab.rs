//! Vocabularies and external word vectors.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Ordered list of unique tokens with a reverse index.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary; token `i` of the iterator gets index `i`.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary::default();
        for token in tokens {
            vocab.push(token.into())?;
        }
        Ok(vocab)
    }

    /// Appends a token, returning its index.
    pub fn push(&mut self, token: String) -> Result<usize> {
        let position = self.tokens.len();
        if let Some(&first) = self.index.get(token.as_str()) {
            return Err(Error::DuplicateToken {
                token,
                first,
                second: position,
            });
        }
        self.index.insert(token.clone(), position);
        self.tokens.push(token);
        Ok(position)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    #[inline]
    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    #[inline]
    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    #[inline]
    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.tokens.iter().map(String::as_str)
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl Eq for Vocabulary {}

/// External static word vectors: one row per word of `vocab`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    vocab: Vocabulary,
    matrix: DenseMatrix,
}

impl WordVectors {
    pub fn new(vocab: Vocabulary, matrix: DenseMatrix) -> Result<Self> {
        if matrix.rows() != vocab.len() {
            return Err(Error::ShapeMismatch {
                what: "word-vector rows",
                expected: vocab.len(),
                found: matrix.rows(),
            });
        }
        Ok(Self { vocab, matrix })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.vocab.get(word).map(|i| self.matrix.row(i))
    }

    pub fn into_parts(self) -> (Vocabulary, DenseMatrix) {
        (self.vocab, self.matrix)
    }
}
