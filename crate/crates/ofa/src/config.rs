//! Pipeline configuration: one JSON document, overridable from the command
//! line. Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use ofa_core::{AssemblyMode, TransplantConfig, DEFAULT_BOUNDARY_MARKER};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub source_embeddings: Option<PathBuf>,
    #[serde(default)]
    pub source_vocab: Option<PathBuf>,
    #[serde(default)]
    pub target_vocab: Option<PathBuf>,
    #[serde(default)]
    pub word_vectors: Option<PathBuf>,
    #[serde(default)]
    pub source_segmentations: Option<PathBuf>,
    #[serde(default)]
    pub target_segmentations: Option<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Latent dimension; absent (or equal to the model dimension) means no
    /// factorization.
    #[serde(default)]
    pub d_prime: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emit_provenance: bool,
    #[serde(default)]
    pub mode: AssemblyMode,
    #[serde(default = "default_marker")]
    pub boundary_marker: String,
}

fn default_k() -> usize {
    TransplantConfig::default().k
}

fn default_tau() -> f64 {
    TransplantConfig::default().tau
}

fn default_marker() -> String {
    DEFAULT_BOUNDARY_MARKER.into()
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source_embeddings: None,
            source_vocab: None,
            target_vocab: None,
            word_vectors: None,
            source_segmentations: None,
            target_segmentations: None,
            out_dir: None,
            d_prime: None,
            k: default_k(),
            tau: default_tau(),
            seed: 0,
            emit_provenance: false,
            mode: AssemblyMode::default(),
            boundary_marker: default_marker(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| {
            let msg = e.to_string();
            // serde names the field in messages such as "unknown field `x`".
            let field = msg
                .split('`')
                .nth(1)
                .unwrap_or("<document>")
                .to_owned();
            Error::config(field, msg)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&bytes).in_file(path)?;
        if let Some(base) = path.parent() {
            cfg.resolve_relative_to(base);
        }
        Ok(cfg)
    }

    fn resolve_relative_to(&mut self, base: &Path) {
        for p in [
            &mut self.source_embeddings,
            &mut self.source_vocab,
            &mut self.target_vocab,
            &mut self.word_vectors,
            &mut self.source_segmentations,
            &mut self.target_segmentations,
            &mut self.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn transplant_config(&self) -> Result<TransplantConfig> {
        let cfg = TransplantConfig {
            k: self.k,
            tau: self.tau,
            seed: self.seed,
        };
        if cfg.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if !(cfg.tau > 0.0 && cfg.tau.is_finite()) {
            return Err(Error::config("tau", "must be positive and finite"));
        }
        Ok(cfg)
    }

    /// Returns the named path setting, which must be set and exist.
    pub fn require_input<'a>(field: &str, value: &'a Option<PathBuf>) -> Result<&'a Path> {
        let p = value
            .as_deref()
            .ok_or_else(|| Error::config(field, "required but not set"))?;
        if !p.exists() {
            return Err(Error::config(field, format!("{} does not exist", p.display())));
        }
        Ok(p)
    }

    /// Optional input path; when set it must exist.
    pub fn optional_input<'a>(field: &str, value: &'a Option<PathBuf>) -> Result<Option<&'a Path>> {
        match value.as_deref() {
            None => Ok(None),
            Some(p) if p.exists() => Ok(Some(p)),
            Some(p) => Err(Error::config(field, format!("{} does not exist", p.display()))),
        }
    }

    pub fn require_out_dir(&self) -> Result<&Path> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| Error::config("out_dir", "required but not set (use --out or out_dir)"))
    }
}
