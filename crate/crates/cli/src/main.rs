use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use occlusion_core::io::{scan_dataset, OutputFormat};
use occlusion_core::job::{
    presets, render_json, render_text, run_occlude, run_validate, JobConfig, ValidateMode,
    ValidateOptions,
};
use occlusion_core::pointcloud::{LateralConvention, RadarChannel};
use occlusion_core::{severity_to_spec, Modality, Occlusion, OcclusionKind, Region, Severity};

const ROOT_ENV: &str = "OCCLUDE_DATASET_ROOT";

/// Synthesizes occluded camera, radar and LiDAR data from a nuScenes-layout dataset.
#[derive(Parser)]
#[command(name = "occlude", version)]
struct Cli {
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write occluded copies of the dataset, one subtree per spec.
    Occlude(Box<OccludeArgs>),
    /// Check an occluded tree against the clean dataset.
    Validate(ValidateArgs),
    /// List occlusion kinds, parameter ranges and canonical settings.
    Presets {
        #[arg(long)]
        json: bool,
    },
    /// Count the sensor files a job would see.
    Scan {
        #[arg(long, env = ROOT_ENV)]
        dataset_root: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jpeg,
    Png,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ssim,
    Retention,
    Noise,
}

#[derive(Args)]
struct OccludeArgs {
    /// TOML job file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = ROOT_ENV)]
    dataset_root: Option<PathBuf>,
    #[arg(long)]
    output_root: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Occlusion kind, e.g. dirt, water_blur, point_dropout.
    #[arg(long = "type")]
    kind: Option<String>,
    #[arg(long, value_delimiter = ',')]
    opacity: Vec<f64>,
    /// light, moderate or heavy (camera kinds).
    #[arg(long, value_delimiter = ',')]
    severity: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    percent: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    region: Vec<String>,
    /// Cone angle in degrees.
    #[arg(long, value_delimiter = ',')]
    angle: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    kernel_size: Vec<u32>,
    /// Radar to drop; random per frame when omitted.
    #[arg(long)]
    sensor: Option<String>,
    /// Thin every radar instead of one per frame.
    #[arg(long)]
    all_sensors: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    jpeg_quality: Option<u8>,
    /// Record SSIM for each camera output in the manifest.
    #[arg(long)]
    ssim: bool,
    /// Treat positive y as left.
    #[arg(long)]
    vehicle_lateral: bool,
    /// Keep outputs whose manifest record still matches.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// The clean dataset.
    #[arg(long, env = ROOT_ENV)]
    dataset_root: PathBuf,
    /// Output root of an occlude run, or a single variant subtree (ssim only).
    #[arg(long, alias = "occluded-root")]
    output_root: PathBuf,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn parse_all<T: std::str::FromStr<Err = occlusion_core::Error>>(
    values: &[String],
) -> Result<Vec<T>> {
    values.iter().map(|v| Ok(v.parse()?)).collect()
}

/// Expands the sweep flags for one kind into specs.
fn sweep(kind: OcclusionKind, a: &OccludeArgs) -> Result<Vec<Occlusion>> {
    let need = |flag: &str, empty: bool| {
        if empty {
            bail!("--type {kind} needs --{flag}")
        }
        Ok(())
    };
    let severities: Vec<Severity> = parse_all(&a.severity)?;
    let from_severity = || -> Result<Vec<Occlusion>> {
        severities
            .iter()
            .map(|s| Ok(severity_to_spec(kind, *s, 0)?.occlusion))
            .collect()
    };
    let specs = match kind {
        OcclusionKind::Dirt | OcclusionKind::WaterBlur => {
            need(
                "opacity or --severity",
                a.opacity.is_empty() && severities.is_empty(),
            )?;
            let mut v: Vec<Occlusion> = a
                .opacity
                .iter()
                .map(|&opacity| match kind {
                    OcclusionKind::Dirt => Occlusion::Dirt { opacity },
                    _ => Occlusion::WaterBlur { opacity },
                })
                .collect();
            v.extend(from_severity()?);
            v
        }
        OcclusionKind::Scratch => {
            need("severity", severities.is_empty())?;
            from_severity()?
        }
        OcclusionKind::Soiling => {
            need(
                "kernel-size or --severity",
                a.kernel_size.is_empty() && severities.is_empty(),
            )?;
            let mut v: Vec<Occlusion> = a
                .kernel_size
                .iter()
                .map(|&kernel_size| Occlusion::Soiling { kernel_size })
                .collect();
            v.extend(from_severity()?);
            v
        }
        OcclusionKind::RadarSensorDrop => vec![Occlusion::RadarSensorDrop {
            sensor: a
                .sensor
                .as_deref()
                .map(str::parse::<RadarChannel>)
                .transpose()?,
        }],
        OcclusionKind::PointDropout => {
            need("percent", a.percent.is_empty())?;
            a.percent
                .iter()
                .map(|&drop_percent| Occlusion::PointDropout {
                    drop_percent,
                    all_sensors: a.all_sensors,
                })
                .collect()
        }
        OcclusionKind::GaussianNoise => {
            need("sigma", a.sigma.is_empty())?;
            a.sigma
                .iter()
                .map(|&sigma| Occlusion::GaussianNoise { sigma })
                .collect()
        }
        OcclusionKind::RegionDrop => {
            need("region", a.region.is_empty())?;
            parse_all::<Region>(&a.region)?
                .into_iter()
                .map(|region| Occlusion::RegionDrop { region })
                .collect()
        }
        OcclusionKind::AngleDrop => {
            need("region", a.region.is_empty())?;
            need("angle", a.angle.is_empty())?;
            let regions: Vec<Region> = parse_all(&a.region)?;
            regions
                .iter()
                .flat_map(|&region| {
                    a.angle
                        .iter()
                        .map(move |&cone_angle_deg| Occlusion::AngleDrop {
                            region,
                            cone_angle_deg,
                        })
                })
                .collect()
        }
    };
    Ok(specs)
}

fn job_config(a: &OccludeArgs) -> Result<JobConfig> {
    let mut cfg = match &a.config {
        Some(path) => JobConfig::from_file(path)?,
        None => {
            let (Some(data), Some(out)) = (&a.dataset_root, &a.output_root) else {
                bail!("--dataset-root and --output-root are required without --config");
            };
            JobConfig::new(data, out, Vec::new())
        }
    };
    if let Some(p) = &a.dataset_root {
        cfg.dataset_root = p.clone();
    }
    if let Some(p) = &a.output_root {
        cfg.output_root = p.clone();
    }
    if let Some(kind) = &a.kind {
        cfg.specs = sweep(kind.parse()?, a)?;
    }
    if let Some(s) = a.seed {
        cfg.global_seed = s;
    }
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    if let Some(f) = a.format {
        cfg.format = match f {
            Format::Jpeg => OutputFormat::Jpeg,
            Format::Png => OutputFormat::Png,
        };
    }
    if let Some(q) = a.jpeg_quality {
        cfg.jpeg_quality = q;
    }
    cfg.compute_ssim |= a.ssim;
    cfg.resume |= a.resume;
    if a.vehicle_lateral {
        cfg.lateral = LateralConvention::Vehicle;
    }
    Ok(cfg)
}

fn occlude(a: &OccludeArgs) -> Result<ExitCode> {
    let cfg = match job_config(a).and_then(|c| c.validate().map(|_| c).map_err(Into::into)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(2));
        }
    };
    let summary = run_occlude(&cfg)?;
    println!(
        "{} tasks, {} records ({} reused), manifest {}",
        summary.tasks,
        summary.records,
        summary.skipped,
        summary.manifest.display()
    );
    if summary.succeeded() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} task(s) failed:", summary.failed.len());
        for f in &summary.failed {
            eprintln!("  {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn validate(a: &ValidateArgs) -> Result<ExitCode> {
    let mode = match a.mode {
        Mode::Ssim => ValidateMode::Ssim,
        Mode::Retention => ValidateMode::Retention,
        Mode::Noise => ValidateMode::Noise,
    };
    let mut opts = ValidateOptions::new(mode, &a.dataset_root, &a.output_root);
    opts.samples_per_camera = a.samples;
    opts.seed = a.seed;
    let outcome = run_validate(&opts)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&outcome)?);
    } else {
        println!("{}", serde_json::to_string_pretty(&outcome.report)?);
        println!("{}", if outcome.passed { "PASS" } else { "FAIL" });
    }
    Ok(if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn scan(root: &Path, json: bool) -> Result<ExitCode> {
    let entries =
        scan_dataset(root, &[]).with_context(|| format!("scanning {}", root.display()))?;
    let mut counts: BTreeMap<(Modality, String), usize> = BTreeMap::new();
    for e in &entries {
        *counts.entry((e.modality, e.channel.clone())).or_default() += 1;
    }
    if json {
        let rows: Vec<_> = counts
            .iter()
            .map(|((m, ch), n)| serde_json::json!({"modality": m, "channel": ch, "files": n}))
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        for ((m, ch), n) in &counts {
            println!("{m:<8}{ch:<20}{n}");
        }
        println!("{} files", entries.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Occlude(a) => occlude(a),
        Command::Validate(a) => validate(a),
        Command::Presets { json } => {
            let p = presets();
            if *json {
                println!("{}", render_json(&p));
            } else {
                print!("{}", render_text(&p));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Scan { dataset_root, json } => scan(dataset_root, *json),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
