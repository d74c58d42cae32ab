//! Post-hoc checks of an occluded output tree against the clean dataset.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::run::MANIFEST_FILE;
use crate::error::{Error, Result};
use crate::io::read_cloud_file;
use crate::manifest::{read_manifest, ManifestRecord};
use crate::rng::RngStream;
use crate::spec::Occlusion;
use crate::validation::{
    batch_ssim, severity_trends, verify_retention, DegradationReport, NoiseAccumulator, NoiseCheck,
    SeverityTrend,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidateMode {
    /// Camera SSIM and monotonic severity trends.
    Ssim,
    /// Point counts and order after dropout; untouched files are byte-identical.
    Retention,
    /// Displacement statistics after Gaussian noise.
    Noise,
}

impl FromStr for ValidateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssim" => Ok(Self::Ssim),
            "retention" => Ok(Self::Retention),
            "noise" => Ok(Self::Noise),
            _ => Err(Error::param(
                "mode",
                format!("unknown validation mode `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub mode: ValidateMode,
    pub dataset_root: PathBuf,
    pub occluded_root: PathBuf,
    pub samples_per_camera: usize,
    pub seed: u64,
}

impl ValidateOptions {
    pub fn new(
        mode: ValidateMode,
        dataset_root: impl Into<PathBuf>,
        occluded_root: impl Into<PathBuf>,
    ) -> Self {
        Self {
            mode,
            dataset_root: dataset_root.into(),
            occluded_root: occluded_root.into(),
            samples_per_camera: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsimValidation {
    pub report: DegradationReport,
    pub trends: Vec<SeverityTrend>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetentionValidation {
    pub variant: String,
    pub files: usize,
    /// Unmodified copies that matched their source byte for byte.
    pub passthrough: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseValidation {
    pub variant: String,
    pub files: usize,
    pub check: NoiseCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ValidationReport {
    Ssim(SsimValidation),
    Retention(Vec<RetentionValidation>),
    Noise(Vec<NoiseValidation>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationOutcome {
    pub passed: bool,
    pub report: ValidationReport,
}

pub fn run_validate(opts: &ValidateOptions) -> Result<ValidationOutcome> {
    match opts.mode {
        ValidateMode::Ssim => {
            let rng = RngStream::new(opts.seed);
            let report = batch_ssim(
                &opts.dataset_root,
                &opts.occluded_root,
                opts.samples_per_camera,
                &rng,
            )?;
            let trends = severity_trends(&report);
            let passed = trends.iter().all(|t| t.strictly_increasing);
            Ok(ValidationOutcome {
                passed,
                report: ValidationReport::Ssim(SsimValidation { report, trends }),
            })
        }
        ValidateMode::Retention => {
            let groups = manifest_groups(opts, |o| {
                matches!(
                    o,
                    Occlusion::PointDropout { .. } | Occlusion::RadarSensorDrop { .. }
                )
            })?;
            let mut out = Vec::new();
            for (variant, records) in groups {
                let mut v = RetentionValidation {
                    variant,
                    files: records.len(),
                    passthrough: 0,
                    failures: Vec::new(),
                };
                for r in &records {
                    let (src, dst) = paths(opts, r);
                    if r.passthrough {
                        if read(&src)? == read(&dst)? {
                            v.passthrough += 1;
                        } else {
                            v.failures
                                .push(format!("{}: copy differs from source", r.output_relpath));
                        }
                        continue;
                    }
                    let Occlusion::PointDropout { drop_percent, .. } = r.spec.occlusion else {
                        v.failures
                            .push(format!("{}: expected an unmodified copy", r.output_relpath));
                        continue;
                    };
                    let check = verify_retention(
                        &read_cloud_file(&src)?,
                        &read_cloud_file(&dst)?,
                        drop_percent,
                    )?;
                    if !check.passed {
                        v.failures.push(format!(
                            "{}: kept {} of {} points, expected {}{}",
                            r.output_relpath,
                            check.actual,
                            check.original,
                            check.expected,
                            if check.subsequence {
                                ""
                            } else {
                                ", records altered or reordered"
                            }
                        ));
                    }
                }
                out.push(v);
            }
            Ok(ValidationOutcome {
                passed: out.iter().all(|v| v.failures.is_empty()),
                report: ValidationReport::Retention(out),
            })
        }
        ValidateMode::Noise => {
            let groups = manifest_groups(opts, |o| matches!(o, Occlusion::GaussianNoise { .. }))?;
            let mut out = Vec::new();
            for (variant, records) in groups {
                let Occlusion::GaussianNoise { sigma } = records[0].spec.occlusion else {
                    unreachable!("filtered above")
                };
                let mut acc = NoiseAccumulator::new();
                for r in &records {
                    let (src, dst) = paths(opts, r);
                    acc.add(&read_cloud_file(&src)?, &read_cloud_file(&dst)?)?;
                }
                out.push(NoiseValidation {
                    variant,
                    files: records.len(),
                    check: acc.finish(sigma),
                });
            }
            Ok(ValidationOutcome {
                passed: out.iter().all(|v| v.check.passed),
                report: ValidationReport::Noise(out),
            })
        }
    }
}

fn paths(opts: &ValidateOptions, r: &ManifestRecord) -> (PathBuf, PathBuf) {
    (
        opts.dataset_root.join(&r.source_relpath),
        opts.occluded_root.join(&r.output_relpath),
    )
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Manifest records of the selected kinds, grouped by variant subtree.
/// Every referenced file must exist on both sides.
fn manifest_groups(
    opts: &ValidateOptions,
    keep: impl Fn(&Occlusion) -> bool,
) -> Result<BTreeMap<String, Vec<ManifestRecord>>> {
    let records = read_manifest(&opts.occluded_root.join(MANIFEST_FILE))?;
    let mut groups: BTreeMap<String, Vec<ManifestRecord>> = BTreeMap::new();
    let mut missing = Vec::new();
    for r in records.into_iter().filter(|r| keep(&r.spec.occlusion)) {
        let (src, dst) = paths(opts, &r);
        for p in [src, dst] {
            if !p.is_file() {
                missing.push(p.display().to_string());
            }
        }
        let variant = r
            .output_relpath
            .split('/')
            .next()
            .unwrap_or_default()
            .to_string();
        groups.entry(variant).or_default().push(r);
    }
    if !missing.is_empty() {
        return Err(Error::Pairing { missing });
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no matching records in {}",
            opts.occluded_root.join(MANIFEST_FILE).display()
        )));
    }
    Ok(groups)
}
