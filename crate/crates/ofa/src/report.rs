//! JSON form of the transplant report.

use ofa_core::{InitMode, Provenance, TransplantConfig, TransplantReport, Vocabulary};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub copied: usize,
    pub similarity: usize,
    pub random: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRecord {
    pub token: String,
    pub similarity: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub token: String,
    pub mode: InitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neighbors: Vec<NeighborRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: TransplantConfig,
    pub counts: Counts,
    pub coverage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Vec<ProvenanceRecord>>,
}

impl ReportDocument {
    pub fn new(
        report: &TransplantReport,
        cfg: &TransplantConfig,
        src: &Vocabulary,
        tgt: &Vocabulary,
        with_provenance: bool,
    ) -> Self {
        let provenance = with_provenance.then(|| {
            report
                .provenance
                .iter()
                .enumerate()
                .map(|(y, p)| ProvenanceRecord {
                    token: tgt.token(y).to_owned(),
                    mode: p.mode(),
                    source: match p {
                        Provenance::Copied { source } => Some(src.token(*source).to_owned()),
                        _ => None,
                    },
                    neighbors: match p {
                        Provenance::Similarity { neighbors } => neighbors
                            .iter()
                            .map(|n| NeighborRecord {
                                token: src.token(n.source).to_owned(),
                                similarity: n.similarity,
                                weight: n.weight,
                            })
                            .collect(),
                        _ => Vec::new(),
                    },
                })
                .collect()
        });
        Self {
            config: *cfg,
            counts: Counts {
                copied: report.n_copied,
                similarity: report.n_similarity,
                random: report.n_random,
                total: report.total(),
            },
            coverage: report.coverage(),
            provenance,
        }
    }

    pub fn count(&self, mode: InitMode) -> usize {
        match mode {
            InitMode::Copied => self.counts.copied,
            InitMode::Similarity => self.counts.similarity,
            InitMode::Random => self.counts.random,
        }
    }
}
