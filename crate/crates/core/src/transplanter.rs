//! Initialization of target coordinates from source coordinates.
//!
//! Every target subword is initialized by the first applicable rule:
//!
//! 1. **copy**: the token string also exists in the source vocabulary, so its
//!    source coordinates are copied verbatim;
//! 2. **similarity**: its subword vector is nonzero, so it becomes the
//!    softmax(cos / τ)-weighted combination of the coordinates of its `k` most
//!    cosine-similar source subwords;
//! 3. **random**: each dimension is drawn from a normal distribution with the
//!    per-dimension mean and population variance of the source coordinates.
//!
//! Nearest neighbors are exact. Ties in similarity go to the lower source
//! index. Random draws are keyed by `(seed, target index, dimension)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::par;
use crate::rng::CounterRng;
use crate::subword_space::SubwordVectors;
use crate::vocab::Vocabulary;

const QUERY_BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransplantConfig {
    /// Number of source neighbors combined per target subword.
    pub k: usize,
    /// Softmax temperature.
    pub tau: f64,
    pub seed: u64,
}

impl Default for TransplantConfig {
    fn default() -> Self {
        Self {
            k: 10,
            tau: 0.1,
            seed: 0,
        }
    }
}

impl TransplantConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig("tau must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum InitMode {
    Copied,
    Similarity,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub source: usize,
    pub similarity: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Copied { source: usize },
    Similarity { neighbors: Vec<Neighbor> },
    Random,
}

impl Provenance {
    pub fn mode(&self) -> InitMode {
        match self {
            Provenance::Copied { .. } => InitMode::Copied,
            Provenance::Similarity { .. } => InitMode::Similarity,
            Provenance::Random => InitMode::Random,
        }
    }
}

/// How each target subword was initialized, indexed by target position.
#[derive(Debug, Clone, PartialEq)]
pub struct TransplantReport {
    pub n_copied: usize,
    pub n_similarity: usize,
    pub n_random: usize,
    pub provenance: Vec<Provenance>,
}

impl TransplantReport {
    pub fn total(&self) -> usize {
        self.n_copied + self.n_similarity + self.n_random
    }

    /// Fraction of target subwords initialized by copy or similarity.
    pub fn coverage(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => (self.n_copied + self.n_similarity) as f64 / t as f64,
        }
    }
}

/// Per-dimension mean and population variance of the source coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

pub fn compute_source_stats(coords: &DenseMatrix) -> Result<SourceStats> {
    let n = coords.rows();
    if n < 2 {
        return Err(Error::TooFewRows { required: 2, found: n });
    }
    let d = coords.cols();
    let mut mean = vec![0.0f64; d];
    for row in coords.iter_rows() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v as f64;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut var = vec![0.0f64; d];
    for row in coords.iter_rows() {
        for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
            let dv = v as f64 - m;
            *s += dv * dv;
        }
    }
    for s in &mut var {
        *s /= n as f64;
    }
    Ok(SourceStats { mean, var })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VocabPartition {
    /// `(target index, source index)` for tokens present in both, by target index.
    pub shared: Vec<(usize, usize)>,
    /// Target indices with no exact match in the source vocabulary.
    pub new: Vec<usize>,
}

pub fn partition_vocab(src: &Vocabulary, tgt: &Vocabulary) -> VocabPartition {
    let mut out = VocabPartition::default();
    for (t, token) in tgt.iter().enumerate() {
        match src.get(token) {
            Some(s) => out.shared.push((t, s)),
            None => out.new.push(t),
        }
    }
    out
}

fn inverse_norm(v: &[f32]) -> Option<f64> {
    let sq: f64 = v.iter().map(|&x| (x as f64) * (x as f64)).sum();
    (sq > 0.0).then(|| 1.0 / libm::sqrt(sq))
}

/// Covered, nonzero source subword vectors.
struct CandidatePool<'a> {
    vectors: &'a DenseMatrix,
    ids: Vec<usize>,
    inv_norms: Vec<f64>,
}

impl<'a> CandidatePool<'a> {
    fn new(source: &'a SubwordVectors) -> Self {
        let mut ids = Vec::new();
        let mut inv_norms = Vec::new();
        for x in 0..source.vocab().len() {
            if !source.is_covered(x) {
                continue;
            }
            if let Some(inv) = inverse_norm(source.row(x)) {
                ids.push(x);
                inv_norms.push(inv);
            }
        }
        Self {
            vectors: source.matrix(),
            ids,
            inv_norms,
        }
    }

    fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Exact top-`k` cosine neighbors for a block of unit-scaled queries.
    /// Candidates are scanned in ascending index order for every query.
    fn top_k(&self, queries: &[(&[f32], f64)], k: usize) -> Vec<Vec<(usize, f64)>> {
        let mut best: Vec<Vec<(usize, f64)>> = queries.iter().map(|_| Vec::with_capacity(k + 1)).collect();
        for (&x, &inv_x) in self.ids.iter().zip(&self.inv_norms) {
            let cand = self.vectors.row(x);
            for ((query, inv_q), heap) in queries.iter().zip(best.iter_mut()) {
                let mut dot = 0.0f64;
                for (&a, &b) in query.iter().zip(cand) {
                    dot += a as f64 * b as f64;
                }
                let sim = dot * inv_q * inv_x;
                if heap.len() == k && heap[k - 1].1 >= sim {
                    continue;
                }
                // Strictly-greater keeps earlier (lower) indices ahead on ties.
                let pos = heap.partition_point(|&(_, s)| s >= sim);
                heap.insert(pos, (x, sim));
                heap.truncate(k);
            }
        }
        best
    }
}

fn softmax_weights(ranked: &[(usize, f64)], tau: f64) -> Vec<Neighbor> {
    let max = ranked.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = ranked.iter().map(|&(_, s)| libm::exp((s - max) / tau)).collect();
    let z: f64 = exps.iter().sum();
    ranked
        .iter()
        .zip(exps)
        .map(|(&(source, similarity), e)| Neighbor {
            source,
            similarity,
            weight: e / z,
        })
        .collect()
}

/// Top-`k` cosine neighbors of `query` among covered, nonzero rows of
/// `source`, with their softmax(cos / τ) weights, ordered by decreasing
/// similarity.
pub fn neighbor_weights(query: &[f32], source: &SubwordVectors, cfg: &TransplantConfig) -> Result<Vec<Neighbor>> {
    cfg.validate()?;
    if query.len() != source.dim() {
        return Err(Error::ShapeMismatch {
            what: "query dimension",
            expected: source.dim(),
            found: query.len(),
        });
    }
    let inv_q = inverse_norm(query).ok_or(Error::ZeroQuery)?;
    let pool = CandidatePool::new(source);
    if pool.is_empty() {
        return Err(Error::NoCandidates);
    }
    let ranked = pool.top_k(&[(query, inv_q)], cfg.k).pop().unwrap_or_default();
    Ok(softmax_weights(&ranked, cfg.tau))
}

enum Plan {
    Copy(usize),
    Similar(f64),
    Random,
}

/// Computes target coordinates `F_t` (`|tgt| × d′`) and the provenance report.
pub fn transplant(
    source_coords: &DenseMatrix,
    source_vectors: &SubwordVectors,
    target_vectors: &SubwordVectors,
    src: &Vocabulary,
    tgt: &Vocabulary,
    cfg: &TransplantConfig,
) -> Result<(DenseMatrix, TransplantReport)> {
    cfg.validate()?;
    if src.is_empty() {
        return Err(Error::EmptySourceVocabulary);
    }
    if source_coords.rows() != src.len() {
        return Err(Error::ShapeMismatch {
            what: "source coordinate rows",
            expected: src.len(),
            found: source_coords.rows(),
        });
    }
    if source_vectors.vocab() != src {
        return Err(Error::InvalidConfig("source subword vectors are not aligned to the source vocabulary"));
    }
    if target_vectors.vocab() != tgt {
        return Err(Error::InvalidConfig("target subword vectors are not aligned to the target vocabulary"));
    }
    if source_vectors.dim() != target_vectors.dim() {
        return Err(Error::ShapeMismatch {
            what: "subword vector dimension",
            expected: source_vectors.dim(),
            found: target_vectors.dim(),
        });
    }

    let pool = CandidatePool::new(source_vectors);
    let plans: Vec<Plan> = (0..tgt.len())
        .map(|y| {
            if let Some(x) = src.get(tgt.token(y)) {
                return Plan::Copy(x);
            }
            if target_vectors.is_covered(y) && !pool.is_empty() {
                if let Some(inv) = inverse_norm(target_vectors.row(y)) {
                    return Plan::Similar(inv);
                }
            }
            Plan::Random
        })
        .collect();

    let similar: Vec<(usize, f64)> = plans
        .iter()
        .enumerate()
        .filter_map(|(y, p)| match p {
            Plan::Similar(inv) => Some((y, *inv)),
            _ => None,
        })
        .collect();
    let n_blocks = similar.len().div_ceil(QUERY_BLOCK);
    let ranked: Vec<Vec<(usize, f64)>> = par::map_range(n_blocks, |b| {
        let block = &similar[b * QUERY_BLOCK..((b + 1) * QUERY_BLOCK).min(similar.len())];
        let queries: Vec<(&[f32], f64)> = block.iter().map(|&(y, inv)| (target_vectors.row(y), inv)).collect();
        pool.top_k(&queries, cfg.k)
    })
    .into_iter()
    .flatten()
    .collect();

    let mut provenance: Vec<Provenance> = plans
        .iter()
        .map(|p| match *p {
            Plan::Copy(source) => Provenance::Copied { source },
            Plan::Similar(_) => Provenance::Similarity { neighbors: Vec::new() },
            Plan::Random => Provenance::Random,
        })
        .collect();
    for (&(y, _), r) in similar.iter().zip(&ranked) {
        provenance[y] = Provenance::Similarity {
            neighbors: softmax_weights(r, cfg.tau),
        };
    }

    let needs_random = provenance.iter().any(|p| matches!(p, Provenance::Random));
    let stats = if needs_random {
        Some(compute_source_stats(source_coords)?)
    } else {
        None
    };
    let rng = CounterRng::new(cfg.seed);
    let d = source_coords.cols();

    let rows = par::map_range(tgt.len(), |y| -> Vec<f32> {
        match &provenance[y] {
            Provenance::Copied { source } => source_coords.row(*source).to_vec(),
            Provenance::Similarity { neighbors } => {
                let mut acc = vec![0.0f64; d];
                for n in neighbors {
                    for (a, &v) in acc.iter_mut().zip(source_coords.row(n.source)) {
                        *a += n.weight * v as f64;
                    }
                }
                acc.into_iter().map(|v| v as f32).collect()
            }
            Provenance::Random => {
                let stats = stats.as_ref().expect("stats computed when random rows exist");
                (0..d)
                    .map(|j| rng.normal(y as u64, j as u64, stats.mean[j], libm::sqrt(stats.var[j])) as f32)
                    .collect()
            }
        }
    });
    let coords = DenseMatrix::new(tgt.len(), d, rows.into_iter().flatten().collect())?;

    let count = |m: InitMode| provenance.iter().filter(|p| p.mode() == m).count();
    let report = TransplantReport {
        n_copied: count(InitMode::Copied),
        n_similarity: count(InitMode::Similarity),
        n_random: count(InitMode::Random),
        provenance,
    };
    Ok((coords, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subword_space::SubwordVectors;

    fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_tokens(tokens.iter().copied()).unwrap()
    }

    fn vectors(v: &Vocabulary, rows: &[&[f32]]) -> SubwordVectors {
        let dim = rows[0].len();
        let covered = rows.iter().map(|r| r.iter().any(|&x| x != 0.0)).collect();
        let m = DenseMatrix::new(rows.len(), dim, rows.iter().flat_map(|r| r.iter().copied()).collect()).unwrap();
        SubwordVectors::new(v.clone(), m, covered).unwrap()
    }

    #[test]
    fn partition_examples() {
        let p = partition_vocab(&vocab(&["a", "b"]), &vocab(&["b", "c"]));
        assert_eq!(p.shared, vec![(0, 1)]);
        assert_eq!(p.new, vec![1]);
        let same = vocab(&["x", "y", "z"]);
        let p = partition_vocab(&same, &same);
        assert_eq!(p.shared, vec![(0, 0), (1, 1), (2, 2)]);
        assert!(p.new.is_empty());
        assert!(partition_vocab(&vocab(&["a"]), &vocab(&["▁a"])).shared.is_empty());
    }

    #[test]
    fn singleton_softmax_is_one() {
        let v = vocab(&["a", "b"]);
        let u = vectors(&v, &[&[1.0, 2.0], &[0.0, 0.0]]);
        let w = neighbor_weights(&[3.0, -1.0], &u, &TransplantConfig::default()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].weight, 1.0);
        assert_eq!(w[0].source, 0);
    }

    #[test]
    fn two_candidate_softmax() {
        let v = vocab(&["a", "b"]);
        // cos 1.0 and 0.5 against (1, 0).
        let u = vectors(&v, &[&[2.0, 0.0], &[0.5, 0.75f32.sqrt()]]);
        let w = neighbor_weights(&[1.0, 0.0], &u, &TransplantConfig::default()).unwrap();
        let sigma = 1.0 / (1.0 + (-5.0f64).exp());
        assert!((sigma - 0.99331).abs() < 1e-5);
        assert!((w[0].weight - sigma).abs() < 1e-6);
        assert!((w[1].weight - (1.0 - sigma)).abs() < 1e-6);
    }

    #[test]
    fn fewer_candidates_than_k() {
        let v = vocab(&["a", "b", "c"]);
        let u = vectors(&v, &[&[1.0, 0.0], &[0.3, 0.2], &[-1.0, 0.4]]);
        let w = neighbor_weights(&[0.2, 1.0], &u, &TransplantConfig::default()).unwrap();
        assert_eq!(w.len(), 3);
        assert!((w.iter().map(|n| n.weight).sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ties_prefer_lower_source_index() {
        let v = vocab(&["a", "b", "c", "d"]);
        let u = vectors(&v, &[&[0.0, 1.0], &[1.0, 0.0], &[2.0, 0.0], &[3.0, 0.0]]);
        let cfg = TransplantConfig { k: 2, ..Default::default() };
        let w = neighbor_weights(&[1.0, 0.0], &u, &cfg).unwrap();
        assert_eq!(w.iter().map(|n| n.source).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn zero_query_and_empty_pool() {
        let v = vocab(&["a"]);
        let u = vectors(&v, &[&[0.0, 0.0]]);
        let cfg = TransplantConfig::default();
        assert_eq!(neighbor_weights(&[0.0, 0.0], &u, &cfg), Err(Error::ZeroQuery));
        assert_eq!(neighbor_weights(&[1.0, 0.0], &u, &cfg), Err(Error::NoCandidates));
    }

    #[test]
    fn config_validation() {
        assert!(TransplantConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(TransplantConfig { tau: 0.0, ..Default::default() }.validate().is_err());
        assert!(TransplantConfig { tau: f64::NAN, ..Default::default() }.validate().is_err());
        assert!(TransplantConfig::default().validate().is_ok());
    }

    #[test]
    fn source_stats_examples() {
        let m = DenseMatrix::new(2, 2, vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        let s = compute_source_stats(&m).unwrap();
        assert_eq!(s.mean, vec![1.0, 1.0]);
        assert_eq!(s.var, vec![1.0, 1.0]);
        let same = DenseMatrix::new(3, 2, vec![1.5, -2.0, 1.5, -2.0, 1.5, -2.0]).unwrap();
        assert_eq!(compute_source_stats(&same).unwrap().var, vec![0.0, 0.0]);
        assert!(compute_source_stats(&DenseMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn identical_vocabularies_copy_everything() {
        let v = vocab(&["a", "b", "c"]);
        let u = vectors(&v, &[&[1.0], &[0.0], &[2.0]]);
        let f = DenseMatrix::new(3, 2, vec![-0.0, 1.0, 2.5, -3.0, 1e-7, 4.0]).unwrap();
        let (ft, report) = transplant(&f, &u, &u, &v, &v, &TransplantConfig::default()).unwrap();
        let bits = |m: &DenseMatrix| m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&ft), bits(&f));
        assert_eq!((report.n_copied, report.n_similarity, report.n_random), (3, 0, 0));
        assert_eq!(report.coverage(), 1.0);
    }

    #[test]
    fn hand_computed_similarity_row() {
        let src = vocab(&["s0", "s1", "s2"]);
        let tgt = vocab(&["new"]);
        let cos = [0.9f64, 0.1, -0.5];
        let rows: Vec<Vec<f32>> = cos.iter().map(|&c| vec![c as f32, (1.0 - c * c).sqrt() as f32]).collect();
        let refs: Vec<&[f32]> = rows.iter().map(Vec::as_slice).collect();
        let us = vectors(&src, &refs);
        let ut = vectors(&tgt, &[&[1.0, 0.0]]);
        let fs = DenseMatrix::new(3, 2, vec![1.0, 2.0, -1.0, 0.5, 7.0, 7.0]).unwrap();
        let cfg = TransplantConfig { k: 2, tau: 0.1, seed: 1 };
        let (ft, report) = transplant(&fs, &us, &ut, &src, &tgt, &cfg).unwrap();
        let w1 = 9.0f64.exp() / (9.0f64.exp() + 1.0f64.exp());
        let w2 = 1.0 - w1;
        let want = [w1 - w2, w1 * 2.0 + w2 * 0.5];
        for (j, w) in want.iter().enumerate() {
            assert!((ft.get(0, j) as f64 - w).abs() < 1e-6);
        }
        assert_eq!((report.n_copied, report.n_similarity, report.n_random), (0, 1, 0));
    }

    #[test]
    fn uncovered_target_falls_back_to_gaussian() {
        let src = vocab(&["a", "b"]);
        let tgt = vocab(&["a", "zz"]);
        let us = vectors(&src, &[&[1.0], &[1.0]]);
        let ut = vectors(&tgt, &[&[1.0], &[0.0]]);
        let fs = DenseMatrix::new(2, 1, vec![3.0, 3.0]).unwrap();
        let (ft, report) = transplant(&fs, &us, &ut, &src, &tgt, &TransplantConfig::default()).unwrap();
        assert_eq!(report.provenance[1], Provenance::Random);
        // Zero variance: the fallback emits the mean.
        assert_eq!(ft.get(1, 0), 3.0);
    }

    #[test]
    fn shape_errors() {
        let src = vocab(&["a", "b"]);
        let us = vectors(&src, &[&[1.0], &[1.0]]);
        let cfg = TransplantConfig::default();
        let fs = DenseMatrix::zeros(3, 1);
        assert!(matches!(
            transplant(&fs, &us, &us, &src, &src, &cfg),
            Err(Error::ShapeMismatch { .. })
        ));
        let empty = Vocabulary::default();
        let ue = SubwordVectors::new(empty.clone(), DenseMatrix::zeros(0, 1), vec![]).unwrap();
        assert_eq!(
            transplant(&DenseMatrix::zeros(0, 1), &ue, &us, &empty, &src, &cfg),
            Err(Error::EmptySourceVocabulary)
        );
    }
}
