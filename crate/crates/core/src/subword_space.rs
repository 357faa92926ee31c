//! Word/subword bipartite graph and subword vectors.
//!
//! A word is linked to every subword its segmentation contains (at most once
//! per subword). A subword's vector is the mean of the vectors of its linked
//! words, or zero when it has no links.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::par;
use crate::segmenter::Segmenter;
use crate::vocab::{Vocabulary, WordVectors};

/// For every subword, the ascending, duplicate-free list of word indices
/// whose segmentation contains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordOccurrenceIndex {
    neighbors: Vec<Vec<usize>>,
    n_words: usize,
}

impl SubwordOccurrenceIndex {
    pub fn neighbors(&self, subword: usize) -> &[usize] {
        &self.neighbors[subword]
    }

    pub fn n_subwords(&self) -> usize {
        self.neighbors.len()
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    /// Number of subwords with at least one linked word.
    pub fn n_covered(&self) -> usize {
        self.neighbors.iter().filter(|n| !n.is_empty()).count()
    }
}

pub fn build_occurrence_index(
    words: &WordVectors,
    seg: &Segmenter<'_>,
    subvocab: &Vocabulary,
) -> SubwordOccurrenceIndex {
    let vocab = words.vocab();
    let per_word: Vec<Vec<usize>> = par::map_range(vocab.len(), |w| {
        let mut ids: Vec<usize> = seg
            .segment(vocab.token(w))
            .into_iter()
            .filter_map(|piece| subvocab.get(piece))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    });

    let mut neighbors = vec![Vec::new(); subvocab.len()];
    // Words are visited in ascending order, so every list comes out sorted.
    for (w, ids) in per_word.into_iter().enumerate() {
        for id in ids {
            neighbors[id].push(w);
        }
    }
    SubwordOccurrenceIndex {
        neighbors,
        n_words: vocab.len(),
    }
}

/// Subword vectors aligned to a subword vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordVectors {
    vocab: Vocabulary,
    matrix: DenseMatrix,
    covered: Vec<bool>,
}

impl SubwordVectors {
    /// Assembles subword vectors from stored parts. Uncovered rows must be
    /// zero.
    pub fn new(vocab: Vocabulary, matrix: DenseMatrix, covered: Vec<bool>) -> Result<Self> {
        if matrix.rows() != vocab.len() {
            return Err(Error::ShapeMismatch {
                what: "subword-vector rows",
                expected: vocab.len(),
                found: matrix.rows(),
            });
        }
        if covered.len() != vocab.len() {
            return Err(Error::ShapeMismatch {
                what: "coverage flags",
                expected: vocab.len(),
                found: covered.len(),
            });
        }
        if covered
            .iter()
            .enumerate()
            .any(|(r, &c)| !c && matrix.row(r).iter().any(|&v| v != 0.0))
        {
            return Err(Error::InvalidConfig("uncovered subword with nonzero vector"));
        }
        Ok(Self {
            vocab,
            matrix,
            covered,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn covered(&self) -> &[bool] {
        &self.covered
    }

    pub fn is_covered(&self, subword: usize) -> bool {
        self.covered[subword]
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn row(&self, subword: usize) -> &[f32] {
        self.matrix.row(subword)
    }

    pub fn n_covered(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    pub fn into_parts(self) -> (Vocabulary, DenseMatrix, Vec<bool>) {
        (self.vocab, self.matrix, self.covered)
    }
}

/// Mean word vector per subword, accumulated in `f64` over the ascending
/// neighbor list and rounded once to `f32`.
pub fn build_subword_vectors(
    index: &SubwordOccurrenceIndex,
    words: &WordVectors,
    subvocab: &Vocabulary,
) -> Result<SubwordVectors> {
    if index.n_subwords() != subvocab.len() {
        return Err(Error::ShapeMismatch {
            what: "occurrence index subwords",
            expected: subvocab.len(),
            found: index.n_subwords(),
        });
    }
    if index.n_words() != words.len() {
        return Err(Error::ShapeMismatch {
            what: "occurrence index words",
            expected: words.len(),
            found: index.n_words(),
        });
    }
    let dim = words.dim();
    let w = words.matrix();
    let rows = par::map_range(subvocab.len(), |c| {
        let linked = index.neighbors(c);
        let mut acc = vec![0.0f64; dim];
        if linked.is_empty() {
            return acc;
        }
        for &v in linked {
            for (a, &x) in acc.iter_mut().zip(w.row(v)) {
                *a += x as f64;
            }
        }
        let n = linked.len() as f64;
        for a in &mut acc {
            *a /= n;
        }
        acc
    });
    let mut data = Vec::with_capacity(subvocab.len() * dim);
    for row in rows {
        data.extend(row.into_iter().map(|v| v as f32));
    }
    let covered = (0..subvocab.len())
        .map(|c| !index.neighbors(c).is_empty())
        .collect();
    Ok(SubwordVectors {
        vocab: subvocab.clone(),
        matrix: DenseMatrix::from_parts(subvocab.len(), dim, data),
        covered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(entries: &[(&str, &[f32])]) -> WordVectors {
        let vocab = Vocabulary::from_tokens(entries.iter().map(|(w, _)| *w)).unwrap();
        let dim = entries.first().map_or(0, |(_, v)| v.len());
        let data = entries.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        WordVectors::new(vocab, DenseMatrix::new(entries.len(), dim, data).unwrap()).unwrap()
    }

    #[test]
    fn unbelievable_links_three_pieces() {
        let sub = Vocabulary::from_tokens(["▁un", "believ", "able", "zzz"]).unwrap();
        let w = words(&[("unbelievable", &[1.0, 2.0, 3.0])]);
        let idx = build_occurrence_index(&w, &Segmenter::greedy(&sub), &sub);
        assert_eq!(idx.neighbors(0), &[0]);
        assert_eq!(idx.neighbors(1), &[0]);
        assert_eq!(idx.neighbors(2), &[0]);
        assert!(idx.neighbors(3).is_empty());

        let u = build_subword_vectors(&idx, &w, &sub).unwrap();
        assert_eq!(u.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(u.row(3), &[0.0, 0.0, 0.0]);
        assert!(!u.is_covered(3));
        assert_eq!(u.n_covered(), 3);
    }

    #[test]
    fn repeated_piece_counts_once() {
        let sub = Vocabulary::from_tokens(["▁a", "a"]).unwrap();
        let w = words(&[("aaa", &[1.0])]);
        let seg = Segmenter::greedy(&sub);
        assert_eq!(seg.segment("aaa"), ["▁a", "a", "a"]);
        let idx = build_occurrence_index(&w, &seg, &sub);
        assert_eq!(idx.neighbors(1), &[0]);
    }

    #[test]
    fn shared_suffix_collects_all_words() {
        let sub = Vocabulary::from_tokens(["▁walk", "▁talk", "▁sing", "ing", "▁x"]).unwrap();
        let w = words(&[
            ("walking", &[1.0, 0.0]),
            ("x", &[5.0, 5.0]),
            ("talking", &[0.0, 1.0]),
            ("singing", &[1.0, 1.0]),
        ]);
        let idx = build_occurrence_index(&w, &Segmenter::greedy(&sub), &sub);
        // Brute-force membership count over all words.
        let expected: Vec<usize> = (0..w.len())
            .filter(|&i| w.vocab().token(i).ends_with("ing"))
            .collect();
        assert_eq!(idx.neighbors(3), expected.as_slice());
        assert_eq!(idx.neighbors(3).len(), 3);
    }

    #[test]
    fn two_neighbor_mean() {
        let sub = Vocabulary::from_tokens(["▁p", "q"]).unwrap();
        let w = words(&[("pq", &[1.0, 0.0, 0.0]), ("qq", &[0.0, 1.0, 0.0])]);
        let seg = Segmenter::greedy(&sub);
        // Greedy cannot cover "qq" (there is no ▁q piece).
        let idx = build_occurrence_index(&w, &seg, &sub);
        assert_eq!(idx.neighbors(1), &[0]);

        let table = [
            ("pq".into(), alloc::vec!["▁p".into(), "q".into()]),
            ("qq".into(), alloc::vec!["q".into()]),
        ];
        let ext = Segmenter::external(&sub, table);
        let idx = build_occurrence_index(&w, &ext, &sub);
        let u = build_subword_vectors(&idx, &w, &sub).unwrap();
        assert_eq!(u.row(1), &[0.5, 0.5, 0.0]);
        assert_eq!(u.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn subword_vectors_reject_mismatched_index() {
        let sub = Vocabulary::from_tokens(["a"]).unwrap();
        let other = Vocabulary::from_tokens(["a", "b"]).unwrap();
        let w = words(&[("a", &[1.0])]);
        let idx = build_occurrence_index(&w, &Segmenter::greedy(&sub), &sub);
        assert!(build_subword_vectors(&idx, &w, &other).is_err());
    }

    #[test]
    fn new_rejects_nonzero_uncovered_rows() {
        let sub = Vocabulary::from_tokens(["a"]).unwrap();
        let m = DenseMatrix::new(1, 1, alloc::vec![1.0]).unwrap();
        assert!(SubwordVectors::new(sub.clone(), m.clone(), alloc::vec![false]).is_err());
        assert!(SubwordVectors::new(sub, m, alloc::vec![true]).is_ok());
    }
}
