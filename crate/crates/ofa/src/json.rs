use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Result, ResultExt};

/// Pretty JSON with a trailing newline.
pub fn to_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn save<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(value)?).in_file(path)
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).in_file(path)?;
    serde_json::from_slice(&bytes).in_file(path)
}
