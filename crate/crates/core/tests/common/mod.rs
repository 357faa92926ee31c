#![allow(dead_code)]

use ofa_core::{DenseMatrix, SubwordVectors, Vocabulary};
use ofa_oracle::synth::TransplantInstance;
use ofa_oracle::Matrix;

pub fn dense(m: &Matrix) -> DenseMatrix {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DenseMatrix::from_fn(rows, cols, |r, c| m[r][c] as f32).unwrap()
}

pub fn nested(m: &DenseMatrix) -> Matrix {
    m.iter_rows().map(|r| r.iter().map(|&x| x as f64).collect()).collect()
}

pub fn vocab(tokens: &[String]) -> Vocabulary {
    Vocabulary::from_tokens(tokens.iter().cloned()).unwrap()
}

pub fn subword_vectors(tokens: &[String], vectors: &Matrix, covered: &[bool]) -> SubwordVectors {
    SubwordVectors::new(vocab(tokens), dense(vectors), covered.to_vec()).unwrap()
}

pub struct CoreInstance {
    pub coords: DenseMatrix,
    pub us: SubwordVectors,
    pub ut: SubwordVectors,
    pub src: Vocabulary,
    pub tgt: Vocabulary,
}

pub fn to_core(inst: &TransplantInstance) -> CoreInstance {
    CoreInstance {
        coords: dense(&inst.source_coords),
        us: subword_vectors(&inst.src, &inst.source_vectors, &inst.source_covered),
        ut: subword_vectors(&inst.tgt, &inst.target_vectors, &inst.target_covered),
        src: vocab(&inst.src),
        tgt: vocab(&inst.tgt),
    }
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}
