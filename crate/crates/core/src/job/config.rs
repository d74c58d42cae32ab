use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{AssetDirs, OutputFormat, DEFAULT_JPEG_QUALITY};
use crate::pointcloud::LateralConvention;
use crate::spec::Occlusion;

fn default_jpeg_quality() -> u8 {
    DEFAULT_JPEG_QUALITY
}

/// A batch job: one dataset, one output root and a sweep of occlusions.
///
/// ```toml
/// dataset_root = "/data/nuscenes"
/// output_root = "/data/occluded"
/// global_seed = 42
///
/// [[specs]]
/// kind = "dirt"
/// opacity = 0.1
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub dataset_root: PathBuf,
    pub output_root: PathBuf,
    #[serde(default)]
    pub global_seed: u64,
    #[serde(default)]
    pub specs: Vec<Occlusion>,
    /// Worker threads; all cores when unset.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_jpeg_quality")]
    pub jpeg_quality: u8,
    #[serde(default)]
    pub assets: AssetDirs,
    /// Record SSIM against the clean image for camera outputs.
    #[serde(default)]
    pub compute_ssim: bool,
    #[serde(default)]
    pub lateral: LateralConvention,
    /// Keep outputs whose manifest record still matches both checksums.
    #[serde(default)]
    pub resume: bool,
}

impl JobConfig {
    pub fn new(
        dataset_root: impl Into<PathBuf>,
        output_root: impl Into<PathBuf>,
        specs: Vec<Occlusion>,
    ) -> Self {
        Self {
            dataset_root: dataset_root.into(),
            output_root: output_root.into(),
            global_seed: 0,
            specs,
            workers: None,
            format: OutputFormat::default(),
            jpeg_quality: DEFAULT_JPEG_QUALITY,
            assets: AssetDirs::default(),
            compute_ssim: false,
            lateral: LateralConvention::default(),
            resume: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks everything that can be checked without writing.
    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::Config("no occlusion specs given".into()));
        }
        let mut ids = HashSet::new();
        for s in &self.specs {
            s.validate()?;
            if !ids.insert(s.variant_id()) {
                return Err(Error::Config(format!(
                    "spec `{}` is listed twice",
                    s.variant_id()
                )));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if !(1..=100).contains(&self.jpeg_quality) {
            return Err(Error::param(
                "jpeg_quality",
                format!("{} is outside [1, 100]", self.jpeg_quality),
            ));
        }
        if !self.dataset_root.is_dir() {
            return Err(Error::io(
                &self.dataset_root,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "dataset root is not a directory",
                ),
            ));
        }
        let data = absolute(&self.dataset_root)?;
        let out = absolute(&self.output_root)?;
        if data == out {
            return Err(Error::Config(
                "dataset_root and output_root must differ".into(),
            ));
        }
        if ["samples", "sweeps"]
            .iter()
            .any(|s| out.starts_with(data.join(s)))
        {
            return Err(Error::Config(
                "output_root must not lie inside the dataset's samples/ or sweeps/".into(),
            ));
        }
        Ok(())
    }
}

fn absolute(p: &Path) -> Result<PathBuf> {
    let abs = std::path::absolute(p).map_err(|e| Error::io(p, e))?;
    // Resolve `.` and `..` lexically; the output root may not exist yet.
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    Ok(out)
}
