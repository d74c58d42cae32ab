//! Runs a planned job on a bounded worker pool.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};

use rayon::prelude::*;
use serde::Serialize;

use super::config::JobConfig;
use super::plan::{plan, RadarFrame, Task, Work};
use crate::camera::{
    apply_scratch, apply_soiling, generate_soiling_mask, BinaryMask, DirtConfig, DirtGenerator,
    ImageBuffer, ScratchConfig, ScratchGenerator, WaterBlurConfig, WaterBlurGenerator,
};
use crate::error::{Error, Result};
use crate::io::{
    load_alpha_dir, load_scratch_dir, load_soiling_masks, mirror_output_path, read_image,
    read_lidar_bin, read_pcd_with_header, scan_dataset, write_atomic, write_image, write_lidar_bin,
    write_pcd, DatasetEntry, OutputFormat,
};
use crate::manifest::{read_manifest, write_sorted, ManifestRecord, ManifestWriter};
use crate::pointcloud::{
    add_gaussian_noise, drop_sensor, dropout_points, occlude_angle, occlude_region, ConeSelector,
    LateralConvention, PointCloud, RadarChannel, RegionSelector,
};
use crate::rng::{checksum, RngStream};
use crate::spec::{Occlusion, OcclusionSpec};
use crate::validation::{ssim, SsimParams};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub tasks: usize,
    /// Tasks whose previous outputs were kept.
    pub skipped: usize,
    pub records: usize,
    /// Labels of tasks that failed.
    pub failed: Vec<String>,
    pub manifest: PathBuf,
}

impl RunSummary {
    pub fn succeeded(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Generators and options shared read-only by every worker.
struct Context {
    output_root: PathBuf,
    dataset_root: PathBuf,
    format: OutputFormat,
    jpeg_quality: u8,
    compute_ssim: bool,
    lateral: LateralConvention,
    dirt: DirtGenerator,
    water: WaterBlurGenerator,
    scratch: ScratchGenerator,
    soiling_masks: Vec<Arc<BinaryMask>>,
}

impl Context {
    fn new(cfg: &JobConfig) -> Result<Self> {
        let a = &cfg.assets;
        let alpha = |d: &Option<PathBuf>| d.as_deref().map(load_alpha_dir).transpose();
        Ok(Self {
            output_root: cfg.output_root.clone(),
            dataset_root: cfg.dataset_root.clone(),
            format: cfg.format,
            jpeg_quality: cfg.jpeg_quality,
            compute_ssim: cfg.compute_ssim,
            lateral: cfg.lateral,
            dirt: DirtGenerator::new(
                DirtConfig::default(),
                alpha(&a.dirt_patches)?.unwrap_or_default(),
            ),
            water: WaterBlurGenerator::new(
                WaterBlurConfig::default(),
                alpha(&a.droplets)?.unwrap_or_default(),
            ),
            scratch: ScratchGenerator::new(
                ScratchConfig::default(),
                a.scratches
                    .as_deref()
                    .map(load_scratch_dir)
                    .transpose()?
                    .unwrap_or_default(),
            ),
            soiling_masks: a
                .soiling_masks
                .as_deref()
                .map(load_soiling_masks)
                .transpose()?
                .unwrap_or_default(),
        })
    }

    fn soiling_mask(&self, width: usize, height: usize, rng: &mut RngStream) -> BinaryMask {
        if self.soiling_masks.is_empty() {
            generate_soiling_mask(width, height, rng)
        } else {
            let m = &self.soiling_masks[rng.below(self.soiling_masks.len() as u64) as usize];
            m.resize_nearest(width, height)
        }
    }
}

/// Applies one camera occlusion. All randomness comes from `seed`.
pub(crate) fn occlude_image(
    occ: &Occlusion,
    img: &ImageBuffer,
    seed: u64,
    dirt: &DirtGenerator,
    water: &WaterBlurGenerator,
    scratch: &ScratchGenerator,
    soiling_mask: impl FnOnce(usize, usize, &mut RngStream) -> BinaryMask,
) -> Result<ImageBuffer> {
    let rng = RngStream::new(seed);
    let (w, h) = img.dims();
    match occ {
        Occlusion::Dirt { opacity } => dirt.apply(img, *opacity, &rng),
        Occlusion::WaterBlur { opacity } => water.apply(img, *opacity, &rng),
        Occlusion::Scratch { severity } => {
            let overlay = scratch.overlay(w, h, *severity, &mut rng.split("scratch"))?;
            apply_scratch(img, &overlay)
        }
        Occlusion::Soiling { kernel_size } => {
            let mask = soiling_mask(w, h, &mut rng.split("soiling-mask"));
            apply_soiling(img, &mask, *kernel_size)
        }
        other => Err(Error::Input(format!(
            "{} does not apply to images",
            other.kind()
        ))),
    }
}

/// Applies one per-file point-cloud occlusion.
pub(crate) fn occlude_cloud(
    occ: &Occlusion,
    cloud: &PointCloud,
    seed: u64,
    lateral: LateralConvention,
) -> Result<PointCloud> {
    let mut rng = RngStream::new(seed);
    match occ {
        Occlusion::PointDropout { drop_percent, .. } => {
            dropout_points(cloud, *drop_percent, &mut rng)
        }
        Occlusion::GaussianNoise { sigma } => add_gaussian_noise(cloud, *sigma, &mut rng),
        Occlusion::RegionDrop { region } => {
            occlude_region(cloud, &RegionSelector::new(*region).with_lateral(lateral))
        }
        Occlusion::AngleDrop {
            region,
            cone_angle_deg,
        } => occlude_angle(
            cloud,
            &ConeSelector::new(
                RegionSelector::new(*region).with_lateral(lateral),
                *cone_angle_deg,
            )?,
        ),
        other => Err(Error::Input(format!(
            "{} does not apply to point clouds",
            other.kind()
        ))),
    }
}

/// Output path below the variant subtree; images take the extension of the
/// output format.
fn output_relpath(
    variant: &str,
    entry: &DatasetEntry,
    image_format: Option<OutputFormat>,
) -> String {
    let rel = &entry.relpath;
    let Some(format) = image_format else {
        return format!("{variant}/{rel}");
    };
    let lower = rel.to_ascii_lowercase();
    let keep = match format {
        OutputFormat::Jpeg => lower.ends_with(".jpg") || lower.ends_with(".jpeg"),
        OutputFormat::Png => lower.ends_with(".png"),
    };
    if keep {
        return format!("{variant}/{rel}");
    }
    let stem = rel.rfind('.').map_or(rel.as_str(), |i| &rel[..i]);
    format!("{variant}/{stem}.{}", format.extension())
}

struct Source {
    entry: DatasetEntry,
    bytes: Vec<u8>,
    checksum: u64,
}

fn read_source(root: &Path, entry: &DatasetEntry) -> Result<Source> {
    let path = root.join(&entry.relpath);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(Source {
        entry: entry.clone(),
        checksum: checksum(&bytes),
        bytes,
    })
}

fn with_path(e: Error, rel: &str) -> Error {
    match e {
        Error::Malformed { offset, reason } => Error::Malformed {
            offset,
            reason: format!("{rel}: {reason}"),
        },
        Error::Decode(m) => Error::Decode(format!("{rel}: {m}")),
        other => other,
    }
}

struct Executor<'a> {
    ctx: &'a Context,
    spec: OcclusionSpec,
    variant: String,
    seed: u64,
}

impl Executor<'_> {
    fn record(&self, src: &Source, out_rel: String, out_bytes: &[u8]) -> Result<ManifestRecord> {
        let path = mirror_output_path(&self.ctx.output_root, &out_rel)?;
        write_atomic(&path, out_bytes)?;
        Ok(ManifestRecord {
            source_relpath: src.entry.relpath.clone(),
            output_relpath: out_rel,
            spec: self.spec.clone(),
            derived_seed: self.seed,
            input_checksum: src.checksum,
            output_checksum: checksum(out_bytes),
            ssim: None,
            dropped_sensor: None,
            passthrough: false,
        })
    }

    fn copy(&self, src: &Source) -> Result<ManifestRecord> {
        let mut r = self.record(
            src,
            output_relpath(&self.variant, &src.entry, None),
            &src.bytes,
        )?;
        r.passthrough = true;
        Ok(r)
    }

    fn image(&self, src: &Source) -> Result<ManifestRecord> {
        let ctx = self.ctx;
        let img = read_image(&src.bytes).map_err(|e| with_path(e, &src.entry.relpath))?;
        let out = occlude_image(
            &self.spec.occlusion,
            &img,
            self.seed,
            &ctx.dirt,
            &ctx.water,
            &ctx.scratch,
            |w, h, r| ctx.soiling_mask(w, h, r),
        )?;
        let bytes = write_image(&out, ctx.format, ctx.jpeg_quality)?;
        let mut rec = self.record(
            src,
            output_relpath(&self.variant, &src.entry, Some(ctx.format)),
            &bytes,
        )?;
        if ctx.compute_ssim {
            // Score what was written, including any encoder loss.
            rec.ssim = Some(ssim(&img, &read_image(&bytes)?, &SsimParams::default())?);
        }
        Ok(rec)
    }

    fn cloud(&self, src: &Source) -> Result<ManifestRecord> {
        let rel = &src.entry.relpath;
        let bytes = if rel.ends_with(".pcd") {
            let (header, cloud) =
                read_pcd_with_header(&src.bytes).map_err(|e| with_path(e, rel))?;
            let out = occlude_cloud(&self.spec.occlusion, &cloud, self.seed, self.ctx.lateral)?;
            write_pcd(&out, Some(&header))
        } else {
            let cloud = read_lidar_bin(&src.bytes).map_err(|e| with_path(e, rel))?;
            write_lidar_bin(&occlude_cloud(
                &self.spec.occlusion,
                &cloud,
                self.seed,
                self.ctx.lateral,
            )?)?
        };
        self.record(src, output_relpath(&self.variant, &src.entry, None), &bytes)
    }

    fn frame(&self, frame: &RadarFrame, sources: &[Source]) -> Result<Vec<ManifestRecord>> {
        let rng = RngStream::new(self.seed);
        let mut parsed = Vec::with_capacity(sources.len());
        for ((ch, _), src) in frame.members.iter().zip(sources) {
            let (header, cloud) =
                read_pcd_with_header(&src.bytes).map_err(|e| with_path(e, &src.entry.relpath))?;
            parsed.push((*ch, header, cloud));
        }
        let mut records = Vec::new();
        match &self.spec.occlusion {
            Occlusion::RadarSensorDrop { sensor } => {
                let scene = parsed.iter().map(|(ch, _, c)| (*ch, c.clone())).collect();
                let (_, dropped) = drop_sensor(scene, *sensor, &mut rng.split("sensor"))?;
                for ((ch, _), src) in frame.members.iter().zip(sources) {
                    if *ch == dropped {
                        continue;
                    }
                    let mut r = self.copy(src)?;
                    r.dropped_sensor = Some(dropped.short_name().to_string());
                    records.push(r);
                }
            }
            Occlusion::PointDropout { drop_percent, .. } => {
                let target = RadarChannel::ALL[rng.split("sensor").below(5) as usize];
                for ((ch, header, cloud), src) in parsed.iter().zip(sources) {
                    if *ch != target {
                        records.push(self.copy(src)?);
                        continue;
                    }
                    let out = dropout_points(cloud, *drop_percent, &mut rng.split("dropout"))?;
                    let bytes = write_pcd(&out, Some(header));
                    records.push(self.record(
                        src,
                        output_relpath(&self.variant, &src.entry, None),
                        &bytes,
                    )?);
                }
            }
            other => {
                return Err(Error::Input(format!(
                    "{} is not a frame-level occlusion",
                    other.kind()
                )))
            }
        }
        Ok(records)
    }

    fn run(&self, task: &Task) -> Result<Vec<ManifestRecord>> {
        let root = &self.ctx.dataset_root;
        match &task.work {
            Work::Image(e) => Ok(vec![self.image(&read_source(root, e)?)?]),
            Work::Cloud(e) => Ok(vec![self.cloud(&read_source(root, e)?)?]),
            Work::Copy(e) => Ok(vec![self.copy(&read_source(root, e)?)?]),
            Work::Frame(f) => {
                let sources = f
                    .members
                    .iter()
                    .map(|(_, e)| read_source(root, e))
                    .collect::<Result<Vec<_>>>()?;
                self.frame(f, &sources)
            }
        }
    }

    /// Earlier records for this task, if they still describe its outputs.
    fn reusable(&self, task: &Task, prior: &PriorRecords) -> Option<Vec<ManifestRecord>> {
        let mut out = Vec::new();
        for e in task.sources() {
            let key = (self.variant.clone(), e.relpath.clone());
            let Some(r) = prior.get(&key) else {
                // A sensor-drop frame has no record for the dropped sensor.
                continue;
            };
            let src = read_source(&self.ctx.dataset_root, e).ok()?;
            let existing = std::fs::read(self.ctx.output_root.join(&r.output_relpath)).ok()?;
            let same = r.spec == self.spec
                && r.derived_seed == self.seed
                && r.input_checksum == src.checksum
                && r.output_checksum == checksum(&existing)
                && (r.ssim.is_some() || !self.ctx.compute_ssim);
            if !same {
                return None;
            }
            out.push(r.clone());
        }
        let expected = match (&task.work, &self.spec.occlusion) {
            (Work::Frame(f), Occlusion::RadarSensorDrop { .. }) => f.members.len() - 1,
            _ => task.sources().len(),
        };
        (out.len() == expected).then_some(out)
    }
}

type PriorRecords = HashMap<(String, String), ManifestRecord>;

fn index_prior(records: Vec<ManifestRecord>) -> PriorRecords {
    records
        .into_iter()
        .filter_map(|r| {
            let variant = r.output_relpath.split('/').next()?.to_string();
            Some(((variant, r.source_relpath.clone()), r))
        })
        .collect()
}

/// Validates the job, then writes every occluded file and the manifest.
///
/// Nothing is written when validation fails. Per-task failures are logged
/// and listed in the summary; the remaining tasks still run.
pub fn run_occlude(cfg: &JobConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let ctx = Context::new(cfg)?;
    let entries = scan_dataset(&cfg.dataset_root, &[])?;
    let tasks = plan(&cfg.specs, &entries, cfg.global_seed);
    let specs: Vec<OcclusionSpec> = cfg
        .specs
        .iter()
        .map(|o| OcclusionSpec::new(o.clone(), cfg.global_seed))
        .collect::<Result<_>>()?;
    log::info!(
        "{} files, {} tasks over {} specs",
        entries.len(),
        tasks.len(),
        specs.len()
    );

    std::fs::create_dir_all(&cfg.output_root).map_err(|e| Error::io(&cfg.output_root, e))?;
    let manifest = cfg.output_root.join(MANIFEST_FILE);
    let prior = if cfg.resume && manifest.exists() {
        index_prior(read_manifest(&manifest)?)
    } else {
        PriorRecords::new()
    };
    if manifest.exists() {
        std::fs::remove_file(&manifest).map_err(|e| Error::io(&manifest, e))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let (tx, rx) = mpsc::channel::<ManifestRecord>();
    let writer_path = manifest.clone();
    let writer = std::thread::spawn(move || -> Result<Vec<ManifestRecord>> {
        let mut w = ManifestWriter::append(&writer_path)?;
        let mut all = Vec::new();
        for r in rx {
            w.write(&r)?;
            all.push(r);
        }
        Ok(all)
    });

    let outcomes: Vec<(bool, Option<String>)> = pool.install(|| {
        tasks
            .par_iter()
            .map_with(tx, |tx, task| {
                let exec = Executor {
                    ctx: &ctx,
                    spec: specs[task.spec].clone(),
                    variant: cfg.specs[task.spec].variant_id(),
                    seed: task.seed,
                };
                if let Some(records) = exec.reusable(task, &prior) {
                    for r in records {
                        let _ = tx.send(r);
                    }
                    return (true, None);
                }
                match exec.run(task) {
                    Ok(records) => {
                        for r in records {
                            // The writer only stops early on an I/O error, reported below.
                            let _ = tx.send(r);
                        }
                        (false, None)
                    }
                    Err(e) => {
                        let label = format!("{}: {}", exec.variant, task.label());
                        log::error!("{label}: {e}");
                        (false, Some(format!("{label}: {e}")))
                    }
                }
            })
            .collect()
    });
    let mut records = writer
        .join()
        .map_err(|_| Error::Config("manifest writer panicked".into()))??;
    write_sorted(&manifest, &mut records)?;

    let skipped = outcomes.iter().filter(|(s, _)| *s).count();
    let mut failed: Vec<String> = outcomes.into_iter().filter_map(|(_, f)| f).collect();
    failed.sort();
    Ok(RunSummary {
        tasks: tasks.len(),
        skipped,
        records: records.len(),
        failed,
        manifest,
    })
}
