//! On-disk layout for factorizations and subword vectors.

use std::fs;
use std::path::Path;

use ofa_core::factorizer::SIGN_CONVENTION;
use ofa_core::{FactorizedEmbedding, SubwordVectors, Vocabulary};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::json;
use crate::ofat::{load_matrix, save_matrix};
use crate::text::{load_coverage, save_coverage};

pub const PRIMITIVES_FILE: &str = "p.ofat";
pub const COORDINATES_FILE: &str = "f.ofat";
pub const FACTORIZATION_MANIFEST: &str = "factorization.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationManifest {
    pub d_prime: usize,
    pub d_model: usize,
    pub vocab_size: usize,
    pub sign_convention: String,
    /// No factorization was applied: coordinates are the original embeddings
    /// and the primitives are the identity.
    pub identity: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular_values: Vec<f64>,
}

pub fn save_factorization(fe: &FactorizedEmbedding, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).in_file(dir)?;
    save_matrix(fe.primitives(), &dir.join(PRIMITIVES_FILE))?;
    save_matrix(fe.coordinates(), &dir.join(COORDINATES_FILE))?;
    let manifest = FactorizationManifest {
        d_prime: fe.d_prime(),
        d_model: fe.d_model(),
        vocab_size: fe.vocab_size(),
        sign_convention: SIGN_CONVENTION.into(),
        identity: fe.is_identity(),
        singular_values: fe.singular_values().to_vec(),
    };
    json::save(&manifest, &dir.join(FACTORIZATION_MANIFEST))
}

pub fn load_factorization_manifest(dir: &Path) -> Result<FactorizationManifest> {
    json::load(&dir.join(FACTORIZATION_MANIFEST))
}

pub fn load_factorization(dir: &Path) -> Result<FactorizedEmbedding> {
    let manifest = load_factorization_manifest(dir)?;
    let p = load_matrix(&dir.join(PRIMITIVES_FILE))?;
    let f = load_matrix(&dir.join(COORDINATES_FILE))?;
    if (p.rows(), p.cols(), f.rows()) != (manifest.d_prime, manifest.d_model, manifest.vocab_size) {
        return Err(Error::format(
            0,
            format!(
                "factorization manifest declares d_prime={} d_model={} vocab_size={}, matrices are {}x{} and {}x{}",
                manifest.d_prime,
                manifest.d_model,
                manifest.vocab_size,
                p.rows(),
                p.cols(),
                f.rows(),
                f.cols()
            ),
        )
        .in_file(dir.join(FACTORIZATION_MANIFEST)));
    }
    Ok(FactorizedEmbedding::from_parts(p, f, manifest.identity)?)
}

pub fn subword_matrix_file(name: &str) -> String {
    format!("{name}.ofat")
}

pub fn subword_coverage_file(name: &str) -> String {
    format!("{name}.coverage.txt")
}

pub fn save_subword_vectors(sv: &SubwordVectors, dir: &Path, name: &str) -> Result<()> {
    fs::create_dir_all(dir).in_file(dir)?;
    save_matrix(sv.matrix(), &dir.join(subword_matrix_file(name)))?;
    save_coverage(sv.covered(), &dir.join(subword_coverage_file(name)))
}

pub fn load_subword_vectors(dir: &Path, name: &str, vocab: &Vocabulary) -> Result<SubwordVectors> {
    let matrix_path = dir.join(subword_matrix_file(name));
    let matrix = load_matrix(&matrix_path)?;
    let covered = load_coverage(&dir.join(subword_coverage_file(name)))?;
    SubwordVectors::new(vocab.clone(), matrix, covered).in_file(matrix_path)
}
