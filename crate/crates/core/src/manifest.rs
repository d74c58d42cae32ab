//! Per-file provenance records, stored one JSON object per line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spec::OcclusionSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub source_relpath: String,
    pub output_relpath: String,
    pub spec: OcclusionSpec,
    pub derived_seed: u64,
    pub input_checksum: u64,
    pub output_checksum: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
    /// Set on radar frame outputs: the sensor the frame lost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_sensor: Option<String>,
    /// The output is a byte copy of the source (a sensor the frame-level
    /// occlusion left alone).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub passthrough: bool,
}

impl ManifestRecord {
    pub fn to_line(&self) -> String {
        // ManifestRecord has no map keys or non-finite floats that could fail.
        serde_json::to_string(self).expect("manifest record serializes")
    }
}

/// Append-only writer; each record is flushed as a complete line.
pub struct ManifestWriter {
    path: PathBuf,
    file: File,
}

impl ManifestWriter {
    pub fn append(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        Ok(Self { path, file })
    }

    pub fn write(&mut self, record: &ManifestRecord) -> Result<()> {
        let mut line = record.to_line();
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads every complete record; a torn final line (from an interrupted run) is ignored.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let last = lines.len().saturating_sub(1);
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if i == last => log::warn!("{}: ignoring torn final line", path.display()),
            Err(e) => return Err(Error::Config(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

/// Rewrites `path` with `records` sorted by output path, replacing atomically.
pub fn write_sorted(path: &Path, records: &mut [ManifestRecord]) -> Result<()> {
    records.sort_by(|a, b| {
        a.output_relpath
            .cmp(&b.output_relpath)
            .then_with(|| a.source_relpath.cmp(&b.source_relpath))
    });
    let mut body = String::new();
    for r in records.iter() {
        body.push_str(&r.to_line());
        body.push('\n');
    }
    crate::io::write_atomic(path, body.as_bytes())
}
