//! Pipeline stages. Each stage reads its inputs from disk and writes its
//! outputs into a directory; [`run`] chains them over a fixed layout.
//!
//! ```text
//! <out>/factorization/  p.ofat  f.ofat  factorization.json
//! <out>/subwords/       source.ofat  source.coverage.txt  target.ofat  target.coverage.txt
//! <out>/transplant/     f_t.ofat  report.json
//! <out>/assembled/      manifest.json  f_t.ofat  p.ofat   (factorized)
//!                       manifest.json  e_t.ofat           (full)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ofa_core::{
    assemble, build_occurrence_index, build_subword_vectors, factorize, transplant, AssembledMatrices,
    AssemblyMode, FactorizedEmbedding, Segmenter, SubwordVectors, TransplantConfig, Vocabulary, WordVectors,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Error, Result, ResultExt};
use crate::json;
use crate::manifest::{AssemblyManifest, InputDigest, ASSEMBLY_MANIFEST, MANIFEST_VERSION};
use crate::ofat::{self, load_matrix, save_matrix};
use crate::report::{Counts, ReportDocument};
use crate::store::{self, load_factorization, load_subword_vectors, save_factorization, save_subword_vectors};
use crate::text::{load_segmentations, load_vocab, load_word_vectors};

pub const SOURCE: &str = "source";
pub const TARGET: &str = "target";
pub const TARGET_COORDINATES_FILE: &str = "f_t.ofat";
pub const REPORT_FILE: &str = "report.json";
pub const FULL_EMBEDDINGS_FILE: &str = "e_t.ofat";

/// Directory layout of a pipeline run.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn factorization(&self) -> PathBuf {
        self.root.join("factorization")
    }

    pub fn subwords(&self) -> PathBuf {
        self.root.join("subwords")
    }

    pub fn transplant(&self) -> PathBuf {
        self.root.join("transplant")
    }

    pub fn assembled(&self) -> PathBuf {
        self.root.join("assembled")
    }
}

/// Structured progress lines on standard error.
#[derive(Debug, Clone, Copy, Default)]
pub struct Progress {
    pub quiet: bool,
}

impl Progress {
    pub fn stage(&self, stage: &str, rows: usize, started: Instant) {
        if self.quiet {
            return;
        }
        let line = serde_json::json!({
            "stage": stage,
            "rows": rows,
            "wall_ms": started.elapsed().as_millis() as u64,
        });
        eprintln!("{line}");
    }
}

/// Machine-readable outcome of one stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageSummary {
    pub stage: String,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covered: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_prime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_model: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
}

/// Factorizes `embeddings` at `d_prime`. `None`, or a latent dimension equal
/// to the model dimension, keeps the embeddings unfactorized.
pub fn factorize_embeddings(embeddings: ofa_core::DenseMatrix, d_prime: Option<usize>) -> Result<FactorizedEmbedding> {
    match d_prime {
        None => Ok(FactorizedEmbedding::identity(embeddings)),
        Some(d) if d == embeddings.cols() => Ok(FactorizedEmbedding::identity(embeddings)),
        Some(d) => factorize(&embeddings, d).map_err(|e| match e {
            ofa_core::Error::LatentDimOutOfRange { .. } => Error::config("d_prime", e.to_string()),
            other => other.into(),
        }),
    }
}

pub fn factorize_stage(embeddings: &Path, d_prime: Option<usize>, out_dir: &Path, progress: &Progress) -> Result<StageSummary> {
    let started = Instant::now();
    let e = load_matrix(embeddings)?;
    let rows = e.rows();
    let fe = factorize_embeddings(e, d_prime)?;
    save_factorization(&fe, out_dir)?;
    progress.stage("factorize", rows, started);
    Ok(StageSummary {
        stage: "factorize".into(),
        outputs: vec![
            out_dir.join(store::PRIMITIVES_FILE),
            out_dir.join(store::COORDINATES_FILE),
            out_dir.join(store::FACTORIZATION_MANIFEST),
        ],
        rows: Some(rows),
        d_prime: Some(fe.d_prime()),
        d_model: Some(fe.d_model()),
        ..Default::default()
    })
}

/// Segments every word with `vocab` (greedy, or the external table when
/// given) and averages word vectors per subword.
pub fn compute_subword_vectors(
    words: &WordVectors,
    vocab: &Vocabulary,
    segmentations: Option<HashMap<String, Vec<String>>>,
    marker: &str,
) -> Result<SubwordVectors> {
    let seg = match segmentations {
        Some(table) => Segmenter::external(vocab, table),
        None => Segmenter::greedy(vocab),
    }
    .with_marker(marker);
    let index = build_occurrence_index(words, &seg, vocab);
    Ok(build_subword_vectors(&index, words, vocab)?)
}

pub struct SubwordInputs<'a> {
    pub vocab: &'a Path,
    pub segmentations: Option<&'a Path>,
    pub marker: &'a str,
}

pub fn subword_vectors_stage(
    words: &WordVectors,
    inputs: &SubwordInputs<'_>,
    out_dir: &Path,
    name: &str,
    progress: &Progress,
) -> Result<StageSummary> {
    let started = Instant::now();
    let vocab = load_vocab(inputs.vocab)?;
    let table = inputs.segmentations.map(load_segmentations).transpose()?;
    let sv = compute_subword_vectors(words, &vocab, table, inputs.marker)?;
    save_subword_vectors(&sv, out_dir, name)?;
    progress.stage(&format!("subword-vectors:{name}"), vocab.len(), started);
    Ok(StageSummary {
        stage: format!("subword-vectors:{name}"),
        outputs: vec![
            out_dir.join(store::subword_matrix_file(name)),
            out_dir.join(store::subword_coverage_file(name)),
        ],
        rows: Some(vocab.len()),
        covered: Some(sv.n_covered()),
        ..Default::default()
    })
}

pub struct TransplantInputs<'a> {
    pub factorization_dir: &'a Path,
    pub subwords_dir: &'a Path,
    pub source_vocab: &'a Path,
    pub target_vocab: &'a Path,
}

pub fn transplant_stage(
    inputs: &TransplantInputs<'_>,
    cfg: &TransplantConfig,
    emit_provenance: bool,
    out_dir: &Path,
    progress: &Progress,
) -> Result<StageSummary> {
    let started = Instant::now();
    let fe = load_factorization(inputs.factorization_dir)?;
    let src = load_vocab(inputs.source_vocab)?;
    let tgt = load_vocab(inputs.target_vocab)?;
    let us = load_subword_vectors(inputs.subwords_dir, SOURCE, &src)?;
    let ut = load_subword_vectors(inputs.subwords_dir, TARGET, &tgt)?;

    let (ft, report) = transplant(fe.coordinates(), &us, &ut, &src, &tgt, cfg)?;
    fs::create_dir_all(out_dir).in_file(out_dir)?;
    save_matrix(&ft, &out_dir.join(TARGET_COORDINATES_FILE))?;
    let doc = ReportDocument::new(&report, cfg, &src, &tgt, emit_provenance);
    json::save(&doc, &out_dir.join(REPORT_FILE))?;
    progress.stage("transplant", tgt.len(), started);
    Ok(StageSummary {
        stage: "transplant".into(),
        outputs: vec![out_dir.join(TARGET_COORDINATES_FILE), out_dir.join(REPORT_FILE)],
        rows: Some(tgt.len()),
        d_prime: Some(fe.d_prime()),
        counts: Some(doc.counts),
        coverage: Some(doc.coverage),
        ..Default::default()
    })
}

pub fn assemble_stage(
    factorization_dir: &Path,
    transplant_dir: &Path,
    mode: AssemblyMode,
    out_dir: &Path,
    progress: &Progress,
) -> Result<StageSummary> {
    let started = Instant::now();
    let fe = load_factorization(factorization_dir)?;
    let ft = load_matrix(&transplant_dir.join(TARGET_COORDINATES_FILE))?;
    let report_path = transplant_dir.join(REPORT_FILE);
    let report_bytes = fs::read(&report_path).in_file(&report_path)?;
    let report: ReportDocument = serde_json::from_slice(&report_bytes).in_file(&report_path)?;

    let assembled = assemble(&ft, &fe, mode)?;

    let mut digest = InputDigest::default();
    digest.bytes("mode", mode_name(mode).as_bytes());
    for (label, m) in [("f_t", &ft), ("p", fe.primitives())] {
        let len = ofat::HEADER_LEN + ofat::payload_len(m.rows() as u64, m.cols() as u64).unwrap_or(0);
        digest.section(label, len, |w| ofat::write_matrix(m, w))?;
    }
    digest.bytes("report", &report_bytes);

    fs::create_dir_all(out_dir).in_file(out_dir)?;
    let mut files = BTreeMap::new();
    let mut outputs = Vec::new();
    match &assembled.matrices {
        AssembledMatrices::Factorized { coordinates, primitives } => {
            for (role, name, m) in [
                ("f_t", TARGET_COORDINATES_FILE, coordinates),
                ("p", store::PRIMITIVES_FILE, primitives),
            ] {
                save_matrix(m, &out_dir.join(name))?;
                files.insert(role.to_owned(), name.to_owned());
                outputs.push(out_dir.join(name));
            }
        }
        AssembledMatrices::Full { embeddings } => {
            save_matrix(embeddings, &out_dir.join(FULL_EMBEDDINGS_FILE))?;
            files.insert("e_t".to_owned(), FULL_EMBEDDINGS_FILE.to_owned());
            outputs.push(out_dir.join(FULL_EMBEDDINGS_FILE));
        }
    }

    let manifest = AssemblyManifest {
        format_version: MANIFEST_VERSION,
        mode,
        vocab_size: assembled.vocab_size,
        d_model: assembled.d_model,
        d_prime: assembled.d_prime,
        identity_factorization: fe.is_identity(),
        tied_lm_head: true,
        config: report.config,
        counts: report.counts,
        coverage: report.coverage,
        files,
        digest: digest.finish(),
    };
    json::save(&manifest, &out_dir.join(ASSEMBLY_MANIFEST))?;
    outputs.push(out_dir.join(ASSEMBLY_MANIFEST));
    progress.stage("assemble", assembled.vocab_size, started);
    Ok(StageSummary {
        stage: "assemble".into(),
        outputs,
        rows: Some(assembled.vocab_size),
        d_prime: Some(assembled.d_prime),
        d_model: Some(assembled.d_model),
        counts: Some(report.counts),
        coverage: Some(report.coverage),
        ..Default::default()
    })
}

pub fn mode_name(mode: AssemblyMode) -> &'static str {
    match mode {
        AssemblyMode::Factorized => "factorized",
        AssemblyMode::Full => "full",
    }
}

/// Inputs of a full run, validated up front so configuration mistakes are
/// reported before any work starts.
pub struct RunInputs<'a> {
    pub source_embeddings: &'a Path,
    pub source_vocab: &'a Path,
    pub target_vocab: &'a Path,
    pub word_vectors: &'a Path,
    pub source_segmentations: Option<&'a Path>,
    pub target_segmentations: Option<&'a Path>,
    pub out_dir: &'a Path,
    pub transplant: TransplantConfig,
}

impl<'a> RunInputs<'a> {
    pub fn from_config(cfg: &'a PipelineConfig) -> Result<Self> {
        Ok(Self {
            source_embeddings: PipelineConfig::require_input("source_embeddings", &cfg.source_embeddings)?,
            source_vocab: PipelineConfig::require_input("source_vocab", &cfg.source_vocab)?,
            target_vocab: PipelineConfig::require_input("target_vocab", &cfg.target_vocab)?,
            word_vectors: PipelineConfig::require_input("word_vectors", &cfg.word_vectors)?,
            source_segmentations: PipelineConfig::optional_input("source_segmentations", &cfg.source_segmentations)?,
            target_segmentations: PipelineConfig::optional_input("target_segmentations", &cfg.target_segmentations)?,
            out_dir: cfg.require_out_dir()?,
            transplant: cfg.transplant_config()?,
        })
    }
}

/// Steps 1 to 5 in sequence. Produces the same files as running the stage
/// commands one after another with the same configuration.
pub fn run(cfg: &PipelineConfig, progress: &Progress) -> Result<Vec<StageSummary>> {
    let inputs = RunInputs::from_config(cfg)?;
    let layout = Layout::new(inputs.out_dir);
    let mut summaries = Vec::new();

    summaries.push(factorize_stage(
        inputs.source_embeddings,
        cfg.d_prime,
        &layout.factorization(),
        progress,
    )?);

    let started = Instant::now();
    let words = load_word_vectors(inputs.word_vectors)?;
    progress.stage("load-word-vectors", words.len(), started);
    for (name, vocab, segmentations) in [
        (SOURCE, inputs.source_vocab, inputs.source_segmentations),
        (TARGET, inputs.target_vocab, inputs.target_segmentations),
    ] {
        let side = SubwordInputs {
            vocab,
            segmentations,
            marker: &cfg.boundary_marker,
        };
        summaries.push(subword_vectors_stage(&words, &side, &layout.subwords(), name, progress)?);
    }
    drop(words);

    let factorization_dir = layout.factorization();
    let subwords_dir = layout.subwords();
    summaries.push(transplant_stage(
        &TransplantInputs {
            factorization_dir: &factorization_dir,
            subwords_dir: &subwords_dir,
            source_vocab: inputs.source_vocab,
            target_vocab: inputs.target_vocab,
        },
        &inputs.transplant,
        cfg.emit_provenance,
        &layout.transplant(),
        progress,
    )?);

    summaries.push(assemble_stage(
        &layout.factorization(),
        &layout.transplant(),
        cfg.mode,
        &layout.assembled(),
        progress,
    )?);
    Ok(summaries)
}
