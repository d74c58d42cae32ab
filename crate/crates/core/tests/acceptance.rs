//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails or exceeds its time budget.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use occlusion_core::camera::{
    apply_dirt, apply_scratch, apply_soiling, apply_water_blur, apply_water_blur_with,
    convex_blend, convolve, gaussian_kernel, AlphaMask, BinaryMask, ConvKernel, ImageBuffer,
    OverlayLayer, Plane, ScratchGenerator,
};
use occlusion_core::io::{
    read_lidar_bin, read_pcd, read_pcd_with_header, scan_dataset, write_lidar_bin, write_pcd,
};
use occlusion_core::job::{
    run_occlude, run_validate, JobConfig, ValidateMode, ValidateOptions, MANIFEST_FILE,
};
use occlusion_core::pointcloud::{
    add_gaussian_noise, drop_sensor, dropout_points, occlude_angle, occlude_region, ConeSelector,
    PointCloud, RadarChannel, RadarScene, RegionSelector, Schema,
};
use occlusion_core::synthetic::{lidar_cloud, radar_cloud, textured_image, MiniTree};
use occlusion_core::validation::{ssim, SsimParams};
use occlusion_core::{Error, Modality, Occlusion, Region, RngStream, Severity};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lidar_from(points: &[[f64; 3]]) -> PointCloud {
    PointCloud::from_positions(Arc::new(Schema::lidar_xyzir()), points).unwrap()
}

/// Distinct records so order and identity are observable.
fn indexed_cloud(n: usize, rng: &mut RngStream) -> PointCloud {
    let mut bytes = Vec::with_capacity(n * 20);
    for i in 0..n {
        for v in [
            i as f32,
            rng.uniform_range(-50.0, 50.0) as f32,
            rng.uniform_range(-3.0, 3.0) as f32,
            rng.uniform_range(0.0, 255.0) as f32,
            (i % 32) as f32,
        ] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    PointCloud::new(Arc::new(Schema::lidar_xyzir()), bytes).unwrap()
}

fn c1_retention() -> Outcome {
    let mut rng = RngStream::new(0xC1);
    let mut failures = 0;
    for trial in 0..1000 {
        let n = rng.below(100_001) as usize;
        // Percent in hundredths so the oracle stays in integers.
        let q = rng.below(9901);
        let p = q as f64 / 100.0;
        let expected = (n as u64 * (10_000 - q) / 10_000) as usize;
        let cloud = indexed_cloud(n, &mut rng.split("cloud"));
        let out = dropout_points(&cloud, p, &mut rng.split(&trial.to_string()))
            .map_err(|e| e.to_string())?;
        let mut it = cloud.records();
        let subsequence = out.records().all(|r| it.any(|o| o == r));
        if out.len() != expected || !subsequence {
            failures += 1;
        }
    }
    ensure(failures == 0, || {
        format!("{failures} of 1000 trials failed")
    })?;
    Ok("1000 (N, p) pairs exact, order and bytes preserved".into())
}

fn unit(deg: f64) -> (f64, f64) {
    (deg.to_radians().cos(), deg.to_radians().sin())
}

/// Independent predicates. Left is y < 0, right is y > 0.
fn oracle_region(region: Region, x: f64, y: f64) -> bool {
    match region {
        Region::Front => x > 0.0,
        Region::Back => x < 0.0,
        Region::Left => y < 0.0,
        Region::Right => y > 0.0,
    }
}

fn oracle_center(region: Region) -> f64 {
    match region {
        Region::Front => 0.0,
        Region::Back => 180.0,
        Region::Left => -90.0,
        Region::Right => 90.0,
    }
}

/// Cosine of the angle to the region center against the half-angle cosine.
fn oracle_cone_margin(region: Region, alpha: f64, x: f64, y: f64) -> f64 {
    let (ux, uy) = unit(oracle_center(region));
    (x * ux + y * uy) / x.hypot(y) - (alpha / 2.0).to_radians().cos()
}

fn boundary_free_points(
    rng: &mut RngStream,
    n: usize,
    keep: impl Fn(f64, f64) -> bool,
) -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let x = rng.uniform_range(-80.0, 80.0);
        let y = rng.uniform_range(-80.0, 80.0);
        // f32 storage must not move a point across a boundary.
        let (xs, ys) = (x as f32 as f64, y as f32 as f64);
        if xs.abs() > 1e-3 && ys.abs() > 1e-3 && keep(xs, ys) {
            pts.push([xs, ys, rng.uniform_range(-2.0, 2.0) as f32 as f64]);
        }
    }
    pts
}

fn c2_geometry() -> Outcome {
    let mut rng = RngStream::new(0xC2);
    let regions = [Region::Front, Region::Back, Region::Left, Region::Right];
    let mut checked = 0usize;
    for _ in 0..100 {
        let region = regions[rng.below(4) as usize];
        let alpha = match rng.below(4) {
            0 => 30.0,
            1 => 60.0,
            2 => 90.0,
            _ => rng.uniform_range(1.0, 359.0),
        };
        let pts = boundary_free_points(&mut rng, 1000, |x, y| {
            oracle_cone_margin(region, alpha, x, y).abs() > 1e-6
        });
        let cloud = lidar_from(&pts);

        let got = occlude_region(&cloud, &RegionSelector::new(region)).unwrap();
        let want: Vec<usize> = (0..pts.len())
            .filter(|&i| !oracle_region(region, pts[i][0], pts[i][1]))
            .collect();
        ensure(got == cloud.select(&want), || {
            format!("region {region:?} disagrees with oracle")
        })?;

        let cone = ConeSelector::new(RegionSelector::new(region), alpha).unwrap();
        let got = occlude_angle(&cloud, &cone).unwrap();
        let want: Vec<usize> = (0..pts.len())
            .filter(|&i| {
                let [x, y, _] = pts[i];
                !(oracle_region(region, x, y) && oracle_cone_margin(region, alpha, x, y) >= 0.0)
            })
            .collect();
        ensure(got == cloud.select(&want), || {
            format!("cone {region:?} {alpha} disagrees with oracle")
        })?;
        checked += 2 * pts.len();
    }
    Ok(format!("{checked} point decisions agree"))
}

fn c3_cone_region() -> Outcome {
    let mut rng = RngStream::new(0xC3);
    for _ in 0..50 {
        let pts = boundary_free_points(&mut rng, 1000, |_, _| true);
        let cloud = lidar_from(&pts);
        let region = occlude_region(&cloud, &RegionSelector::new(Region::Front)).unwrap();
        let cone = occlude_angle(
            &cloud,
            &ConeSelector::new(RegionSelector::new(Region::Front), 180.0).unwrap(),
        )
        .unwrap();
        ensure(region == cone, || {
            "front cone at 180 deg differs from front region".into()
        })?;
    }
    Ok("50 clouds identical".into())
}

fn c4_noise() -> Outcome {
    let clean = radar_cloud(100_000, 0xC4);
    let layout = clean.schema().spatial().unwrap();
    let mut lines = Vec::new();
    for sigma in [0.1, 0.5, 2.0] {
        let noisy =
            add_gaussian_noise(&clean, sigma, &mut RngStream::new(sigma.to_bits())).unwrap();
        let n = clean.len() as f64;
        let mut sum = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        for (a, b) in clean.records().zip(noisy.records()) {
            let (pa, pb) = (layout.read(a), layout.read(b));
            for k in 0..3 {
                let d = pb[k] - pa[k];
                sum[k] += d;
                sq[k] += d * d;
            }
            // x, y, z are the first 12 bytes of the radar layout.
            ensure(a[12..] == b[12..], || "non-spatial bytes changed".into())?;
        }
        for k in 0..3 {
            let mean = sum[k] / n;
            let std = ((sq[k] - n * mean * mean) / (n - 1.0)).sqrt();
            ensure((std - sigma).abs() <= 0.05 * sigma, || {
                format!("sigma {sigma}: axis {k} std {std}")
            })?;
            ensure(mean.abs() <= 4.0 * sigma / n.sqrt(), || {
                format!("sigma {sigma}: axis {k} mean {mean}")
            })?;
        }
        lines.push(format!("{sigma}: std {:.4}", (sq[0] / n).sqrt()));
    }
    Ok(lines.join(", "))
}

fn c5_identity() -> Outcome {
    let img = textured_image(64, 48, 0xC5);
    let rng = RngStream::new(5);
    ensure(apply_dirt(&img, 0.0, &rng).unwrap() == img, || {
        "dirt".into()
    })?;
    let overlay = OverlayLayer::new(textured_image(64, 48, 1), AlphaMask::zeros(64, 48)).unwrap();
    ensure(apply_scratch(&img, &overlay).unwrap() == img, || {
        "scratch".into()
    })?;
    let generated = ScratchGenerator::default()
        .overlay(64, 48, Severity::Heavy, &mut rng.split("s"))
        .unwrap();
    let zero_alpha = OverlayLayer::new(generated.color, AlphaMask::zeros(64, 48)).unwrap();
    ensure(apply_scratch(&img, &zero_alpha).unwrap() == img, || {
        "scratch texture".into()
    })?;
    for k in [15, 51, 101, 251] {
        ensure(
            apply_soiling(&img, &BinaryMask::empty(64, 48), k).unwrap() == img,
            || format!("soiling k{k}"),
        )?;
    }
    let identity = ConvKernel::identity(9).unwrap();
    ensure(
        apply_water_blur_with(&img, &identity, &textured_image(64, 48, 2), 0.0).unwrap() == img,
        || "water".into(),
    )?;
    let cloud = radar_cloud(500, 3);
    ensure(
        dropout_points(&cloud, 0.0, &mut rng.split("p")).unwrap() == cloud,
        || "dropout".into(),
    )?;
    ensure(
        add_gaussian_noise(&cloud, 0.0, &mut rng.split("n")).unwrap() == cloud,
        || "noise".into(),
    )?;
    Ok("dirt, scratch, soiling, water, dropout, noise".into())
}

fn random_image(rng: &mut RngStream) -> ImageBuffer {
    let w = 12 + rng.below(60) as usize;
    let h = 12 + rng.below(60) as usize;
    let extreme = rng.bernoulli(0.3);
    ImageBuffer::from_fn(w, h, |_, _| {
        std::array::from_fn(|_| {
            if extreme {
                [0u8, 255][rng.below(2) as usize]
            } else {
                rng.below(256) as u8
            }
        })
    })
    .unwrap()
}

fn c6_range() -> Outcome {
    let mut rng = RngStream::new(0xC6);
    let mut ops = 0;
    for i in 0..200 {
        let img = random_image(&mut rng);
        let (w, h) = img.dims();
        let opacity = rng.uniform();
        let seed = RngStream::new(i);
        let out = match i % 4 {
            0 => apply_dirt(&img, opacity, &seed),
            1 => apply_water_blur(&img, opacity, &seed),
            2 => {
                let sev =
                    [Severity::Light, Severity::Moderate, Severity::Heavy][rng.below(3) as usize];
                let o = ScratchGenerator::default()
                    .overlay(w, h, sev, &mut seed.split("s"))
                    .unwrap();
                apply_scratch(&img, &o)
            }
            _ => {
                let mask = BinaryMask::new(w, h, (0..w * h).map(|_| rng.bernoulli(0.4)).collect())
                    .unwrap();
                apply_soiling(&img, &mask, [15, 51, 101, 251][rng.below(4) as usize])
            }
        }
        .map_err(|e| format!("op failed: {e}"))?;
        ensure(out.dims() == (w, h), || "dimensions changed".into())?;
        ops += 1;

        // Convex blends must stay in range before quantization.
        let blurred: [Plane; 3] = std::array::from_fn(|c| {
            convolve(
                &img.channel(c),
                &gaussian_kernel(7, 1.0 + rng.uniform() * 3.0).unwrap(),
            )
        });
        let overlay = random_image(&mut rng);
        let overlay = ImageBuffer::from_fn(w, h, |x, y| {
            overlay.pixel(x % overlay.width(), y % overlay.height())
        })
        .unwrap();
        let weights: Vec<f64> = (0..w * h).map(|_| rng.uniform()).collect();
        let planes = convex_blend(&blurred, &overlay, |p| weights[p]).unwrap();
        for p in planes.iter().chain(blurred.iter()) {
            ensure(p.min() >= -1e-9 && p.max() <= 255.0 + 1e-9, || {
                format!("blend left range: [{}, {}]", p.min(), p.max())
            })?;
        }
    }
    Ok(format!("{ops} fuzzed ops in range; blends unclipped"))
}

/// Direct, unseparated SSIM with a 2D window built from scratch.
#[allow(clippy::needless_range_loop)]
fn reference_ssim(a: &ImageBuffer, b: &ImageBuffer) -> f64 {
    let luma = |img: &ImageBuffer, x: usize, y: usize| {
        let [r, g, bl] = img.pixel(x, y);
        0.299 * r as f64 + 0.587 * g as f64 + 0.114 * bl as f64
    };
    let mut win = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (i, row) in win.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
            *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let (w, h) = a.dims();
    let mut sum = 0.0;
    let mut count = 0;
    for y0 in 0..=h - 11 {
        for x0 in 0..=w - 11 {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let g = win[i][j] / total;
                    let (p, q) = (luma(a, x0 + j, y0 + i), luma(b, x0 + j, y0 + i));
                    mx += g * p;
                    my += g * q;
                    sxx += g * p * p;
                    syy += g * q * q;
                    sxy += g * p * q;
                }
            }
            let (vx, vy, cov) = (sxx - mx * mx, syy - my * my, sxy - mx * my);
            sum += (2.0 * mx * my + c1) * (2.0 * cov + c2)
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / count as f64
}

fn c7_ssim() -> Outcome {
    let params = SsimParams::default();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..24u64 {
        let clean = textured_image(
            40 + (i as usize % 5) * 7,
            32 + (i as usize % 3) * 5,
            100 + i,
        );
        let rng = RngStream::new(i);
        let degraded = match i % 4 {
            0 => apply_dirt(&clean, 0.1 + 0.1 * (i % 3) as f64, &rng).unwrap(),
            1 => apply_water_blur(&clean, 0.2, &rng).unwrap(),
            2 => textured_image(clean.width(), clean.height(), 900 + i),
            _ => {
                let mut r = rng.split("noise");
                ImageBuffer::from_fn(clean.width(), clean.height(), |x, y| {
                    clean
                        .pixel(x, y)
                        .map(|v| (v as f64 + r.normal(0.0, 20.0)).clamp(0.0, 255.0) as u8)
                })
                .unwrap()
            }
        };
        let s_self = ssim(&clean, &clean, &params).unwrap();
        ensure((s_self - 1.0).abs() <= 1e-9, || {
            format!("self-similarity {s_self}")
        })?;
        let ab = ssim(&clean, &degraded, &params).unwrap();
        let ba = ssim(&degraded, &clean, &params).unwrap();
        ensure(ab.to_bits() == ba.to_bits(), || {
            format!("asymmetric: {ab} vs {ba}")
        })?;
        let reference = reference_ssim(&clean, &degraded);
        worst = worst.max((ab - reference).abs());
        pairs += 1;
    }
    ensure(worst <= 1e-4, || {
        format!("max deviation from reference {worst:e}")
    })?;
    Ok(format!("{pairs} pairs, max deviation {worst:.2e}"))
}

fn c8_monotonic() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    MiniTree {
        image_width: 160,
        image_height: 96,
        frames: 4,
        radar_points: 10,
        lidar_points: 100,
        seed: 0xC8,
    }
    .write(&data)
    .unwrap();
    let mut specs = Vec::new();
    for opacity in [0.1, 0.2, 0.3] {
        specs.push(Occlusion::Dirt { opacity });
        specs.push(Occlusion::WaterBlur { opacity });
    }
    let mut cfg = JobConfig::new(&data, &out, specs);
    cfg.global_seed = 42;
    cfg.format = occlusion_core::io::OutputFormat::Png;
    let s = run_occlude(&cfg).map_err(|e| e.to_string())?;
    ensure(s.succeeded(), || format!("{:?}", s.failed))?;
    let mut opts = ValidateOptions::new(ValidateMode::Ssim, &data, &out);
    opts.samples_per_camera = 4;
    let outcome = run_validate(&opts).map_err(|e| e.to_string())?;
    let json = serde_json::to_value(&outcome.report).unwrap();
    let samples: Vec<u64> = json["report"]["variants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["samples"].as_u64().unwrap())
        .collect();
    ensure(samples.iter().all(|&n| n == 24), || {
        format!("samples per variant {samples:?}")
    })?;
    let trends = json["trends"].as_array().unwrap();
    ensure(trends.len() == 2, || "missing trend".into())?;
    let summary: Vec<String> = trends
        .iter()
        .map(|t| {
            let drops: Vec<String> = t["levels"]
                .as_array()
                .unwrap()
                .iter()
                .map(|l| format!("{:.3}", l[1].as_f64().unwrap()))
                .collect();
            format!("{} {}", t["kind"].as_str().unwrap(), drops.join(" < "))
        })
        .collect();
    ensure(outcome.passed, || {
        format!("not strictly increasing: {}", summary.join("; "))
    })?;
    Ok(summary.join("; "))
}

fn c9_sensor_drop() -> Outcome {
    let scene: RadarScene = RadarChannel::ALL
        .iter()
        .enumerate()
        .map(|(i, ch)| (*ch, radar_cloud(8, i as u64)))
        .collect();
    let mut counts: BTreeMap<RadarChannel, usize> = BTreeMap::new();
    let root = RngStream::new(0xC9);
    for i in 0..10_000 {
        let (rest, dropped) =
            drop_sensor(scene.clone(), None, &mut root.split(&i.to_string())).unwrap();
        *counts.entry(dropped).or_default() += 1;
        ensure(!rest.contains_key(&dropped) && rest.len() == 4, || {
            "dropped sensor still present".into()
        })?;
        for (ch, cloud) in &rest {
            ensure(cloud.bytes() == scene[ch].bytes(), || {
                format!("{ch} modified")
            })?;
        }
    }
    let list: Vec<usize> = RadarChannel::ALL
        .iter()
        .map(|c| counts.get(c).copied().unwrap_or(0))
        .collect();
    ensure(list.iter().all(|&c| (1800..=2200).contains(&c)), || {
        format!("counts {list:?}")
    })?;
    Ok(format!("counts {list:?}"))
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn all_kinds() -> Vec<Occlusion> {
    vec![
        Occlusion::Dirt { opacity: 0.2 },
        Occlusion::WaterBlur { opacity: 0.3 },
        Occlusion::Scratch {
            severity: Severity::Moderate,
        },
        Occlusion::Soiling { kernel_size: 51 },
        Occlusion::RadarSensorDrop { sensor: None },
        Occlusion::PointDropout {
            drop_percent: 40.0,
            all_sensors: false,
        },
        Occlusion::PointDropout {
            drop_percent: 70.0,
            all_sensors: true,
        },
        Occlusion::GaussianNoise { sigma: 0.5 },
        Occlusion::RegionDrop {
            region: Region::Left,
        },
        Occlusion::AngleDrop {
            region: Region::Front,
            cone_angle_deg: 60.0,
        },
    ]
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    MiniTree {
        frames: 2,
        ..MiniTree::default()
    }
    .write(&data)
    .unwrap();
    let mut trees = Vec::new();
    for (name, workers) in [("a", 1), ("b", 4)] {
        let mut cfg = JobConfig::new(&data, dir.path().join(name), all_kinds());
        cfg.global_seed = 2024;
        cfg.workers = Some(workers);
        cfg.compute_ssim = true;
        let s = run_occlude(&cfg).map_err(|e| e.to_string())?;
        ensure(s.succeeded(), || format!("{:?}", s.failed))?;
        trees.push(tree_bytes(&dir.path().join(name)));
    }
    ensure(trees[0].contains_key(MANIFEST_FILE), || {
        "no manifest".into()
    })?;
    let keys: BTreeSet<_> = trees[0].keys().chain(trees[1].keys()).collect();
    let differing: Vec<_> = keys
        .iter()
        .filter(|k| trees[0].get(**k) != trees[1].get(**k))
        .collect();
    ensure(differing.is_empty(), || {
        format!("differing files: {differing:?}")
    })?;
    Ok(format!(
        "{} files identical across runs with 1 and 4 workers",
        trees[0].len()
    ))
}

fn typed(e: &Error) -> bool {
    matches!(e, Error::Malformed { .. } | Error::UnsupportedFormat(_))
}

fn mutate(base: &[u8], rng: &mut RngStream) -> Vec<u8> {
    let mut b = base.to_vec();
    match rng.below(6) {
        0 => b.truncate(rng.below(b.len() as u64 + 1) as usize),
        1 => {
            for _ in 0..1 + rng.below(8) {
                let i = rng.below(b.len() as u64) as usize;
                b[i] ^= 1 << rng.below(8);
            }
        }
        2 => {
            let i = rng.below(b.len() as u64 + 1) as usize;
            let n = 1 + rng.below(7) as usize;
            b.splice(i..i, (0..n).map(|_| rng.below(256) as u8));
        }
        3 => {
            let i = rng.below(b.len() as u64) as usize;
            let end = (i + 1 + rng.below(16) as usize).min(b.len());
            b.drain(i..end);
        }
        4 => {
            // Rewrite a number in the header.
            let text_end = b
                .iter()
                .position(|&c| c == 0x80 || c > 0x7e)
                .unwrap_or(b.len())
                .min(400);
            if let Some(i) = b[..text_end].iter().position(|c| c.is_ascii_digit()) {
                let junk = [
                    "-1",
                    "0",
                    "99999999999999999999",
                    "4294967296",
                    "x",
                    "1e9",
                    "",
                ][rng.below(7) as usize];
                b.splice(i..i + 1, junk.bytes());
            }
        }
        _ => {
            let lines = [
                "FIELDS x y\n",
                "DATA ascii\n",
                "DATA binary_compressed\n",
                "SIZE 3\n",
                "COUNT 0\n",
                "TYPE Q\n",
            ];
            let i = b.windows(5).position(|w| w == b"WIDTH").unwrap_or(0);
            b.splice(i..i, lines[rng.below(lines.len() as u64) as usize].bytes());
        }
    }
    b
}

fn c11_parsers() -> Outcome {
    let radar = write_pcd(&radar_cloud(50, 11), None);
    let (header, cloud) = read_pcd_with_header(&radar).unwrap();
    ensure(write_pcd(&cloud, Some(&header)) == radar, || {
        "pcd round trip".into()
    })?;
    let lidar = write_lidar_bin(&lidar_cloud(300, 11)).unwrap();
    ensure(
        write_lidar_bin(&read_lidar_bin(&lidar).unwrap()).unwrap() == lidar,
        || "lidar round trip".into(),
    )?;

    ensure(
        matches!(
            read_pcd(&radar[..radar.len() - 7]),
            Err(Error::Malformed { .. })
        ),
        || "pcd truncation".into(),
    )?;
    let bad = String::from_utf8_lossy(&radar)
        .replacen("VERSION", "VERSON", 1)
        .into_bytes();
    ensure(
        matches!(read_pcd(&bad), Err(Error::Malformed { .. })),
        || "bad header".into(),
    )?;
    ensure(
        matches!(
            read_lidar_bin(&lidar[..lidar.len() - 3]),
            Err(Error::Malformed { .. })
        ),
        || "lidar length".into(),
    )?;

    let mut rng = RngStream::new(0xC11);
    let mut rejected = 0;
    for i in 0..1000 {
        let (base, is_pcd) = if i % 2 == 0 {
            (&radar, true)
        } else {
            (&lidar, false)
        };
        let m = mutate(base, &mut rng);
        let r = catch_unwind(|| {
            if is_pcd {
                read_pcd(&m).map(|_| ())
            } else {
                read_lidar_bin(&m).map(|_| ())
            }
        })
        .map_err(|_| format!("panic on mutated file {i}"))?;
        if let Err(e) = r {
            ensure(typed(&e), || format!("untyped error {e:?}"))?;
            rejected += 1;
        }
    }
    Ok(format!(
        "round trips exact; 1000 mutants, {rejected} rejected with typed errors, 0 panics"
    ))
}

fn c12_layout() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("out");
    MiniTree {
        frames: 2,
        ..MiniTree::default()
    }
    .write(&data)
    .unwrap();
    let specs = all_kinds();
    run_occlude(&JobConfig::new(&data, &out, specs.clone())).map_err(|e| e.to_string())?;
    let entries = scan_dataset(&data, &[]).unwrap();
    for spec in &specs {
        let variant = out.join(spec.variant_id());
        let mods = spec.kind().modalities();
        let mut expected: BTreeSet<String> = entries
            .iter()
            .filter(|e| mods.contains(&e.modality))
            .map(|e| e.relpath.clone())
            .collect();
        let got: BTreeSet<String> = tree_bytes(&variant).into_keys().collect();
        if let Occlusion::RadarSensorDrop { .. } = spec {
            // The dropped sensor's file is the only one missing from each frame.
            let missing: Vec<_> = expected.difference(&got).cloned().collect();
            ensure(missing.len() == 2, || {
                format!("sensor drop removed {missing:?}")
            })?;
            for m in &missing {
                expected.remove(m);
            }
        }
        ensure(got == expected, || {
            format!(
                "{}: {:?}",
                spec.variant_id(),
                got.symmetric_difference(&expected).collect::<Vec<_>>()
            )
        })?;
        let rescanned: Vec<_> = scan_dataset(&variant, &[])
            .unwrap()
            .into_iter()
            .map(|e| (e.modality, e.relpath))
            .collect();
        ensure(rescanned.len() == got.len(), || {
            "subtree does not rescan as a dataset".into()
        })?;
        ensure(
            rescanned
                .iter()
                .all(|(m, _)| *m != Modality::Camera || spec.kind().is_camera()),
            || "stray camera file".into(),
        )?;
    }
    Ok(format!(
        "{} variant subtrees mirror source relpaths",
        specs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("retention exactness", c1_retention, 10),
        ("geometric oracle equivalence", c2_geometry, 10),
        ("cone/region consistency", c3_cone_region, 5),
        ("noise statistics", c4_noise, 10),
        ("identity suite", c5_identity, 5),
        ("range safety", c6_range, 30),
        ("ssim correctness", c7_ssim, 10),
        ("severity monotonicity", c8_monotonic, 60),
        ("radar sensor-drop uniformity", c9_sensor_drop, 5),
        ("end-to-end determinism", c10_determinism, 60),
        ("parser robustness", c11_parsers, 60),
        ("layout fidelity", c12_layout, 10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > Duration::from_secs(*budget) => Err(format!(
                "took {:.1}s, budget {budget}s",
                elapsed.as_secs_f64()
            )),
            r => r,
        };
        match result {
            Ok(detail) => println!(
                "criterion {:>2} {name}: PASS ({detail}; {:.2}s)",
                i + 1,
                elapsed.as_secs_f64()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} {name}: FAIL ({detail}; {:.2}s)",
                    i + 1,
                    elapsed.as_secs_f64()
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
