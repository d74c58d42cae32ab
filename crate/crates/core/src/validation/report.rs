//! Batch SSIM over a clean tree and one or more occluded variant trees.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::ssim::{ssim, SsimParams};
use crate::error::{Error, Result};
use crate::io::{read_image_file, scan_dataset, DatasetEntry};
use crate::rng::RngStream;
use crate::spec::Modality;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CameraReport {
    pub channel: String,
    /// Paired images present for this camera.
    pub available: usize,
    pub sampled: usize,
    /// Requested samples that could not be drawn.
    pub shortfall: usize,
    pub mean_ssim: f64,
    pub mean_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantReport {
    /// Name of the variant subtree; empty when the occluded root is itself a
    /// mirrored dataset tree.
    pub variant: String,
    pub samples: usize,
    pub mean_ssim: f64,
    /// `1 - mean_ssim`.
    pub mean_drop: f64,
    pub cameras: Vec<CameraReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradationReport {
    pub samples_per_camera: usize,
    pub variants: Vec<VariantReport>,
}

/// Variant subtrees below `occluded_root`, or the root itself when it
/// directly holds `samples/` or `sweeps/`.
pub fn discover_variants(occluded_root: &Path) -> Result<Vec<(String, PathBuf)>> {
    let is_tree = |p: &Path| p.join("samples").is_dir() || p.join("sweeps").is_dir();
    if is_tree(occluded_root) {
        return Ok(vec![(String::new(), occluded_root.to_path_buf())]);
    }
    let mut out = Vec::new();
    for e in std::fs::read_dir(occluded_root).map_err(|e| Error::io(occluded_root, e))? {
        let e = e.map_err(|e| Error::io(occluded_root, e))?;
        let path = e.path();
        if path.is_dir() && is_tree(&path) {
            out.push((e.file_name().to_string_lossy().into_owned(), path));
        }
    }
    out.sort();
    Ok(out)
}

/// Relative path without its final extension; outputs may be re-encoded.
fn stem_key(relpath: &str) -> &str {
    match relpath.rfind('.') {
        Some(i) if i > relpath.rfind('/').map_or(0, |s| s + 1) => &relpath[..i],
        _ => relpath,
    }
}

/// Pairs clean and occluded camera files by path; any file without a
/// counterpart is reported.
pub fn pair_camera_files(
    clean: &[DatasetEntry],
    occluded: &[DatasetEntry],
    variant: &str,
) -> Result<Vec<(DatasetEntry, DatasetEntry)>> {
    let by_key: HashMap<&str, &DatasetEntry> =
        clean.iter().map(|e| (stem_key(&e.relpath), e)).collect();
    let mut missing = Vec::new();
    let mut pairs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let prefix = if variant.is_empty() {
        String::new()
    } else {
        format!("{variant}/")
    };
    for o in occluded {
        match by_key.get(stem_key(&o.relpath)) {
            Some(c) => {
                seen.insert(stem_key(&c.relpath));
                pairs.push(((*c).clone(), o.clone()));
            }
            None => missing.push(format!("clean counterpart of {prefix}{}", o.relpath)),
        }
    }
    for c in clean {
        if !seen.contains(stem_key(&c.relpath)) {
            missing.push(format!("{prefix}{}", c.relpath));
        }
    }
    if !missing.is_empty() {
        return Err(Error::Pairing { missing });
    }
    Ok(pairs)
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// SSIM of sampled clean/occluded camera pairs for every variant.
///
/// Samples are drawn per camera from a stream keyed by the camera name only,
/// so every variant is scored on the same images.
pub fn batch_ssim(
    clean_root: &Path,
    occluded_root: &Path,
    samples_per_camera: usize,
    rng: &RngStream,
) -> Result<DegradationReport> {
    let params = SsimParams::default();
    let clean = scan_dataset(clean_root, &[Modality::Camera])?;
    let mut variants = Vec::new();
    for (name, vroot) in discover_variants(occluded_root)? {
        let occluded = scan_dataset(&vroot, &[Modality::Camera])?;
        if occluded.is_empty() {
            continue;
        }
        let pairs = pair_camera_files(&clean, &occluded, &name)?;
        let mut by_channel: BTreeMap<String, Vec<(DatasetEntry, DatasetEntry)>> = BTreeMap::new();
        for p in pairs {
            by_channel.entry(p.0.channel.clone()).or_default().push(p);
        }
        let mut jobs = Vec::new();
        let mut counts = Vec::new();
        for (channel, list) in &by_channel {
            let k = list.len().min(samples_per_camera);
            let picks = rng.split(channel).sample_indices(list.len(), k);
            counts.push((channel.clone(), list.len(), k));
            jobs.extend(picks.into_iter().map(|i| &list[i]));
        }
        let scores: Vec<f64> = jobs
            .par_iter()
            .map(|(c, o)| {
                let a = read_image_file(&clean_root.join(&c.relpath))?;
                let b = read_image_file(&vroot.join(&o.relpath))?;
                ssim(&a, &b, &params)
            })
            .collect::<Result<_>>()?;
        let mut cameras = Vec::new();
        let mut offset = 0;
        for (channel, available, k) in counts {
            let m = mean(&scores[offset..offset + k]);
            offset += k;
            cameras.push(CameraReport {
                channel,
                available,
                sampled: k,
                shortfall: samples_per_camera - k,
                mean_ssim: m,
                mean_drop: 1.0 - m,
            });
        }
        let m = mean(&scores);
        variants.push(VariantReport {
            variant: name,
            samples: scores.len(),
            mean_ssim: m,
            mean_drop: 1.0 - m,
            cameras,
        });
    }
    if variants.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no camera images under {}",
            occluded_root.display()
        )));
    }
    Ok(DegradationReport {
        samples_per_camera,
        variants,
    })
}

/// Mean drop of one opacity sweep, ordered by opacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeverityTrend {
    pub kind: String,
    pub levels: Vec<(f64, f64)>,
    pub strictly_increasing: bool,
}

/// Groups `dirt_<a>` and `water_blur_<a>` variants and checks that the mean
/// drop rises with opacity.
pub fn severity_trends(report: &DegradationReport) -> Vec<SeverityTrend> {
    let mut groups: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for v in &report.variants {
        for kind in ["dirt", "water_blur"] {
            let Some(rest) = v
                .variant
                .strip_prefix(kind)
                .and_then(|r| r.strip_prefix('_'))
            else {
                continue;
            };
            if let Ok(a) = rest.parse::<f64>() {
                groups.entry(kind).or_default().push((a, v.mean_drop));
            }
        }
    }
    groups
        .into_iter()
        .map(|(kind, mut levels)| {
            levels.sort_by(|a, b| a.0.total_cmp(&b.0));
            let strictly_increasing = levels.windows(2).all(|w| w[1].1 > w[0].1);
            SeverityTrend {
                kind: kind.to_string(),
                levels,
                strictly_increasing,
            }
        })
        .collect()
}
