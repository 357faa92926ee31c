//! Slow, obviously-correct reference implementations used by the test suites.
//!
//! Nothing here depends on the production crates. Inputs are plain nested
//! `Vec`s and all arithmetic is `f64`. [`synth`] builds random test inputs
//! with known structure.

pub mod synth;

pub type Matrix = Vec<Vec<f64>>;

/// Singular values, descending, by one-sided Jacobi rotations on the columns.
pub fn jacobi_singular_values(a: &Matrix) -> Vec<f64> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    // Work on the orientation with fewer columns.
    let mut cols_major: Matrix = if cols <= rows {
        (0..cols).map(|c| (0..rows).map(|r| a[r][c]).collect()).collect()
    } else {
        a.clone()
    };
    let n = cols_major.len();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols_major[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols_major[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols_major[p].iter().zip(&cols_major[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols_major.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let xp = *x;
                    let yq = *y;
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols_major.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| (0..inner).map(|k| row[k] * b[k][c]).sum())
                .collect()
        })
        .collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Every way to split `text` into pieces from `vocab`.
pub fn all_segmentations(text: &str, vocab: &[String]) -> Vec<Vec<String>> {
    if text.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for piece in vocab {
        if !piece.is_empty() && text.starts_with(piece.as_str()) {
            for mut tail in all_segmentations(&text[piece.len()..], vocab) {
                tail.insert(0, piece.clone());
                out.push(tail);
            }
        }
    }
    out
}

/// Greedy longest-prefix segmentation of `marker + word`, written as a scan
/// over every vocabulary entry at each position.
pub fn greedy_segment(word: &str, marker: &str, vocab: &[String]) -> Vec<String> {
    if word.is_empty() || word.chars().any(char::is_whitespace) {
        return vec![];
    }
    let text = format!("{marker}{word}");
    let mut rest = text.as_str();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let best = vocab
            .iter()
            .filter(|t| !t.is_empty() && rest.starts_with(t.as_str()))
            .max_by_key(|t| t.len());
        match best {
            Some(t) => {
                out.push(t.clone());
                rest = &rest[t.len()..];
            }
            None => return vec![],
        }
    }
    out
}

/// Subword vectors by brute force: for every subword, scan every word's
/// segmentation. Returns `(vectors, covered)`.
pub fn subword_vectors(
    words: &[String],
    word_vectors: &Matrix,
    segmentations: &[Vec<String>],
    subwords: &[String],
) -> (Matrix, Vec<bool>) {
    let dim = word_vectors.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut covered = Vec::new();
    for sub in subwords {
        let mut sum = vec![0.0; dim];
        let mut count = 0usize;
        for w in 0..words.len() {
            if segmentations[w].iter().any(|p| p == sub) {
                count += 1;
                for (s, x) in sum.iter_mut().zip(&word_vectors[w]) {
                    *s += x;
                }
            }
        }
        if count > 0 {
            for s in &mut sum {
                *s /= count as f64;
            }
        }
        covered.push(count > 0);
        out.push(sum);
    }
    (out, covered)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Copied,
    Similarity,
    Random,
}

pub struct NaiveTransplant {
    pub rows: Matrix,
    pub modes: Vec<Mode>,
    /// `(source index, weight)` per target; empty unless similarity.
    pub weights: Vec<Vec<(usize, f64)>>,
}

/// Reference transplant. `noise(row, dim)` supplies a standard normal draw
/// for the Gaussian fallback.
#[allow(clippy::too_many_arguments)]
pub fn transplant(
    source_coords: &Matrix,
    source_vectors: &Matrix,
    source_covered: &[bool],
    target_vectors: &Matrix,
    target_covered: &[bool],
    src: &[String],
    tgt: &[String],
    k: usize,
    tau: f64,
    noise: impl Fn(usize, usize) -> f64,
) -> NaiveTransplant {
    let d = source_coords.first().map_or(0, Vec::len);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    // Full similarity matrix, NaN where undefined.
    let sims: Matrix = tgt
        .iter()
        .enumerate()
        .map(|(y, _)| {
            src.iter()
                .enumerate()
                .map(|(x, _)| {
                    if source_covered[x] && norm(&source_vectors[x]) > 0.0 && norm(&target_vectors[y]) > 0.0 {
                        cosine(&source_vectors[x], &target_vectors[y])
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();

    // Two-pass statistics.
    let n = source_coords.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| source_coords.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let var: Vec<f64> = (0..d)
        .map(|j| source_coords.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
        .collect();

    let mut rows = Vec::new();
    let mut modes = Vec::new();
    let mut weights = Vec::new();
    for (y, token) in tgt.iter().enumerate() {
        if let Some(x) = src.iter().position(|s| s == token) {
            rows.push(source_coords[x].clone());
            modes.push(Mode::Copied);
            weights.push(vec![]);
            continue;
        }
        let mut cands: Vec<(usize, f64)> = sims[y]
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_nan())
            .map(|(x, &s)| (x, s))
            .collect();
        if !target_covered[y] || cands.is_empty() {
            rows.push((0..d).map(|j| mean[j] + var[j].sqrt() * noise(y, j)).collect());
            modes.push(Mode::Random);
            weights.push(vec![]);
            continue;
        }
        cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        cands.truncate(k);
        let num: Vec<f64> = cands.iter().map(|&(_, s)| (s / tau).exp()).collect();
        let den: f64 = num.iter().sum();
        let w: Vec<(usize, f64)> = cands.iter().zip(&num).map(|(&(x, _), e)| (x, e / den)).collect();
        let mut row = vec![0.0; d];
        for &(x, wx) in &w {
            for j in 0..d {
                row[j] += wx * source_coords[x][j];
            }
        }
        rows.push(row);
        modes.push(Mode::Similarity);
        weights.push(w);
    }
    NaiveTransplant { rows, modes, weights }
}
