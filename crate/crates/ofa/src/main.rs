use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ofa::config::PipelineConfig;
use ofa::pipeline::{self, Layout, Progress, StageSummary, SubwordInputs, TransplantInputs};
use ofa::text::load_word_vectors;
use ofa::{json, ofat, Error, Result};
use ofa_core::{count_params, explained_variance, AssemblyMode};
use serde::Serialize;

/// Transplant a factorized subword embedding matrix onto an extended vocabulary.
#[derive(Debug, Parser)]
#[command(name = "ofa", version)]
struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the Gaussian fallback.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pipeline configuration (JSON). Flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory of the run.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write a JSON summary to this file (`-` for standard output).
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
    /// Suppress progress lines on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Source,
    Target,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Factorized,
    Full,
}

impl From<ModeArg> for AssemblyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Factorized => AssemblyMode::Factorized,
            ModeArg::Full => AssemblyMode::Full,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Step 1: factorize the source embeddings into primitives and coordinates.
    Factorize {
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Latent dimension; omit for no factorization.
        #[arg(long)]
        latent: Option<usize>,
    },
    /// Steps 2-3: subword vectors for one side from the external word vectors.
    SubwordVectors {
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long)]
        word_vectors: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// External segmentations (`word<TAB>pieces`) instead of greedy matching.
        #[arg(long)]
        segmentations: Option<PathBuf>,
        #[arg(long)]
        marker: Option<String>,
    },
    /// Step 4: initialize target coordinates.
    Transplant {
        #[arg(long)]
        source_vocab: Option<PathBuf>,
        #[arg(long)]
        target_vocab: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        /// Include per-token provenance in the report.
        #[arg(long)]
        provenance: bool,
    },
    /// Step 5: write the final embeddings and manifest.
    Assemble {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// All steps in sequence.
    Run {
        #[arg(long)]
        latent: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        provenance: bool,
    },
    /// Explained variance of the principal components of an embedding matrix.
    Analyze {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        components: usize,
    },
    /// Embedding parameter count.
    Params {
        #[arg(long)]
        vocab: u64,
        #[arg(long)]
        dim: u64,
        #[arg(long)]
        latent: Option<u64>,
    },
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

fn emit_summary<T: Serialize>(target: Option<&Path>, command: &'static str, body: T) -> Result<()> {
    let Some(target) = target else { return Ok(()) };
    let bytes = json::to_bytes(&Summary { command, body })?;
    if target == Path::new("-") {
        use std::io::Write;
        std::io::stdout().write_all(&bytes)?;
        Ok(())
    } else {
        std::fs::write(target, bytes).map_err(|e| Error::from(e).in_file(target))
    }
}

#[derive(Serialize)]
struct Stages {
    out_dir: PathBuf,
    stages: Vec<StageSummary>,
}

fn base_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("threads", e.to_string()))?;
    }
    let progress = Progress { quiet: cli.quiet };
    let summary = cli.summary.as_deref();
    let mut cfg = base_config(cli)?;

    match &cli.command {
        Command::Params { vocab, dim, latent } => {
            if *vocab == 0 || *dim == 0 || *latent == Some(0) {
                return Err(Error::config("params", "sizes must be positive"));
            }
            let count = count_params(*vocab, *dim, *latent);
            println!("{}", count.embedding_params);
            emit_summary(summary, "params", count)
        }
        Command::Analyze { embeddings, components } => {
            let e = ofat::load_matrix(embeddings)?;
            let report = explained_variance(&e, *components).map_err(|err| match err {
                ofa_core::Error::TooManyComponents { .. } | ofa_core::Error::TooFewRows { .. } => {
                    Error::config("components", err.to_string())
                }
                other => other.into(),
            })?;
            for (k, v) in report.explained_variance.iter().enumerate() {
                println!("{}\t{v:.6}", k + 1);
            }
            emit_summary(summary, "analyze", report)
        }
        Command::Factorize { embeddings, latent } => {
            if embeddings.is_some() {
                cfg.source_embeddings = embeddings.clone();
            }
            if latent.is_some() {
                cfg.d_prime = *latent;
            }
            let input = PipelineConfig::require_input("source_embeddings", &cfg.source_embeddings)?;
            let layout = Layout::new(cfg.require_out_dir()?);
            let s = pipeline::factorize_stage(input, cfg.d_prime, &layout.factorization(), &progress)?;
            emit_summary(summary, "factorize", Stages { out_dir: layout.root().to_path_buf(), stages: vec![s] })
        }
        Command::SubwordVectors {
            side,
            word_vectors,
            vocab,
            segmentations,
            marker,
        } => {
            if word_vectors.is_some() {
                cfg.word_vectors = word_vectors.clone();
            }
            if let Some(m) = marker {
                cfg.boundary_marker = m.clone();
            }
            let (name, vocab_field, seg_field) = match side {
                Side::Source => {
                    if vocab.is_some() {
                        cfg.source_vocab = vocab.clone();
                    }
                    if segmentations.is_some() {
                        cfg.source_segmentations = segmentations.clone();
                    }
                    (pipeline::SOURCE, ("source_vocab", &cfg.source_vocab), ("source_segmentations", &cfg.source_segmentations))
                }
                Side::Target => {
                    if vocab.is_some() {
                        cfg.target_vocab = vocab.clone();
                    }
                    if segmentations.is_some() {
                        cfg.target_segmentations = segmentations.clone();
                    }
                    (pipeline::TARGET, ("target_vocab", &cfg.target_vocab), ("target_segmentations", &cfg.target_segmentations))
                }
            };
            let wv_path = PipelineConfig::require_input("word_vectors", &cfg.word_vectors)?;
            let inputs = SubwordInputs {
                vocab: PipelineConfig::require_input(vocab_field.0, vocab_field.1)?,
                segmentations: PipelineConfig::optional_input(seg_field.0, seg_field.1)?,
                marker: &cfg.boundary_marker,
            };
            let layout = Layout::new(cfg.require_out_dir()?);
            let words = load_word_vectors(wv_path)?;
            let s = pipeline::subword_vectors_stage(&words, &inputs, &layout.subwords(), name, &progress)?;
            emit_summary(summary, "subword-vectors", Stages { out_dir: layout.root().to_path_buf(), stages: vec![s] })
        }
        Command::Transplant {
            source_vocab,
            target_vocab,
            k,
            tau,
            provenance,
        } => {
            if source_vocab.is_some() {
                cfg.source_vocab = source_vocab.clone();
            }
            if target_vocab.is_some() {
                cfg.target_vocab = target_vocab.clone();
            }
            if let Some(k) = k {
                cfg.k = *k;
            }
            if let Some(tau) = tau {
                cfg.tau = *tau;
            }
            cfg.emit_provenance |= provenance;
            let tcfg = cfg.transplant_config()?;
            let layout = Layout::new(cfg.require_out_dir()?);
            let (fdir, sdir) = (layout.factorization(), layout.subwords());
            let inputs = TransplantInputs {
                factorization_dir: &fdir,
                subwords_dir: &sdir,
                source_vocab: PipelineConfig::require_input("source_vocab", &cfg.source_vocab)?,
                target_vocab: PipelineConfig::require_input("target_vocab", &cfg.target_vocab)?,
            };
            let s = pipeline::transplant_stage(&inputs, &tcfg, cfg.emit_provenance, &layout.transplant(), &progress)?;
            emit_summary(summary, "transplant", Stages { out_dir: layout.root().to_path_buf(), stages: vec![s] })
        }
        Command::Assemble { mode } => {
            if let Some(m) = mode {
                cfg.mode = (*m).into();
            }
            let layout = Layout::new(cfg.require_out_dir()?);
            let s = pipeline::assemble_stage(
                &layout.factorization(),
                &layout.transplant(),
                cfg.mode,
                &layout.assembled(),
                &progress,
            )?;
            emit_summary(summary, "assemble", Stages { out_dir: layout.root().to_path_buf(), stages: vec![s] })
        }
        Command::Run {
            latent,
            k,
            tau,
            mode,
            provenance,
        } => {
            if latent.is_some() {
                cfg.d_prime = *latent;
            }
            if let Some(k) = k {
                cfg.k = *k;
            }
            if let Some(tau) = tau {
                cfg.tau = *tau;
            }
            if let Some(m) = mode {
                cfg.mode = (*m).into();
            }
            cfg.emit_provenance |= provenance;
            let s = pipeline::run(&cfg, &progress)?;
            let out_dir = cfg.require_out_dir()?.to_path_buf();
            emit_summary(summary, "run", Stages { out_dir, stages: s })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
