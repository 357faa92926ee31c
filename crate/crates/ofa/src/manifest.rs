//! Manifest written next to assembled embeddings.

use std::collections::BTreeMap;
use std::io::{self, Write};

use ofa_core::{AssemblyMode, TransplantConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::Counts;

pub const ASSEMBLY_MANIFEST: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyManifest {
    pub format_version: u32,
    pub mode: AssemblyMode,
    pub vocab_size: usize,
    pub d_model: usize,
    pub d_prime: usize,
    pub identity_factorization: bool,
    /// The source model ties its output head to the input embeddings; the
    /// head is not materialized here.
    pub tied_lm_head: bool,
    pub config: TransplantConfig,
    pub counts: Counts,
    pub coverage: f64,
    /// Role (`f_t`, `p`, `e_t`) to file name.
    pub files: BTreeMap<String, String>,
    /// SHA-256 over every assembly input, hex.
    pub digest: String,
}

/// Incremental SHA-256 over labelled, length-prefixed sections.
pub struct InputDigest {
    hasher: Sha256,
}

impl Default for InputDigest {
    fn default() -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"ofa-assembly-v1");
        Self { hasher }
    }
}

impl InputDigest {
    /// Adds a section; `write` must emit exactly `len` bytes.
    pub fn section(
        &mut self,
        label: &str,
        len: u64,
        write: impl FnOnce(&mut dyn Write) -> crate::Result<()>,
    ) -> crate::Result<()> {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update(len.to_le_bytes());
        let mut sink = HashSink {
            hasher: &mut self.hasher,
            written: 0,
        };
        write(&mut sink)?;
        debug_assert_eq!(sink.written, len);
        Ok(())
    }

    pub fn bytes(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    pub fn finish(self) -> String {
        self.hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

struct HashSink<'a> {
    hasher: &'a mut Sha256,
    written: u64,
}

impl Write for HashSink<'_> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.hasher.update(buf);
        self.written += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}
