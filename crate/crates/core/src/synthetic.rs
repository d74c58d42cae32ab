//! Synthetic sensor data in the nuScenes directory layout, for tests and demos.

use std::path::Path;
use std::sync::Arc;

use crate::camera::ImageBuffer;
use crate::error::Result;
use crate::io::{write_atomic, write_image, write_lidar_bin, write_pcd, OutputFormat};
use crate::pointcloud::{Field, PointCloud, RadarChannel, ScalarKind, Schema};
use crate::rng::RngStream;

pub const CAMERA_CHANNELS: [&str; 6] = [
    "CAM_FRONT",
    "CAM_FRONT_LEFT",
    "CAM_FRONT_RIGHT",
    "CAM_BACK",
    "CAM_BACK_LEFT",
    "CAM_BACK_RIGHT",
];

const LOG: &str = "n008-2018-08-01-15-16-36-0400";

/// The 18-field radar point layout (43 bytes per point).
pub fn nuscenes_radar_schema() -> Schema {
    use ScalarKind::*;
    let spec: [(&str, ScalarKind); 18] = [
        ("x", F32),
        ("y", F32),
        ("z", F32),
        ("dyn_prop", I8),
        ("id", I16),
        ("rcs", F32),
        ("vx", F32),
        ("vy", F32),
        ("vx_comp", F32),
        ("vy_comp", F32),
        ("is_quality_valid", I8),
        ("ambig_state", I8),
        ("x_rms", I8),
        ("y_rms", I8),
        ("invalid_state", I8),
        ("pdh0", I8),
        ("vx_rms", I8),
        ("vy_rms", I8),
    ];
    Schema::new(spec.iter().map(|&(n, k)| Field::new(n, k)).collect())
        .expect("static schema is valid")
}

/// Smooth gradients, a few solid shapes and light grain.
pub fn textured_image(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = RngStream::new(seed);
    let base: [f64; 3] = std::array::from_fn(|_| rng.uniform_range(60.0, 180.0));
    let slope: [f64; 3] = std::array::from_fn(|_| rng.uniform_range(-60.0, 60.0));
    let shapes: Vec<(f64, f64, f64, [f64; 3])> = (0..6)
        .map(|_| {
            (
                rng.uniform_range(0.0, width as f64),
                rng.uniform_range(0.0, height as f64),
                rng.uniform_range(0.05, 0.25) * width.min(height) as f64,
                std::array::from_fn(|_| rng.uniform_range(20.0, 235.0)),
            )
        })
        .collect();
    let mut grain = rng.split("grain");
    ImageBuffer::from_fn(width, height, |x, y| {
        let (u, v) = (x as f64 / width as f64, y as f64 / height as f64);
        let mut px: [f64; 3] = std::array::from_fn(|c| base[c] + slope[c] * (u - v));
        for (cx, cy, r, color) in &shapes {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx.abs().max(dy.abs()) < *r || dx.hypot(dy) < r * 1.2 && (x + y) % 2 == 0 {
                px = *color;
            }
        }
        let n = grain.uniform_range(-12.0, 12.0);
        px.map(|c| (c + n).clamp(0.0, 255.0).round() as u8)
    })
    .expect("positive dimensions")
}

fn push_f32(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&(v as f32).to_le_bytes());
}

/// Radar returns spread over a forward-facing fan.
pub fn radar_cloud(points: usize, seed: u64) -> PointCloud {
    let mut rng = RngStream::new(seed);
    let schema = Arc::new(nuscenes_radar_schema());
    let mut b = Vec::with_capacity(points * schema.record_size());
    for i in 0..points {
        let range = rng.uniform_range(1.0, 120.0);
        let az = rng.uniform_range(-1.2, 1.2);
        push_f32(&mut b, range * az.cos());
        push_f32(&mut b, range * az.sin());
        push_f32(&mut b, 0.0);
        b.push(rng.below(8) as u8);
        b.extend_from_slice(&(i as i16).to_le_bytes());
        for _ in 0..5 {
            push_f32(&mut b, rng.uniform_range(-20.0, 20.0));
        }
        b.push(1);
        b.push(3);
        for _ in 0..6 {
            b.push(rng.below(32) as u8);
        }
    }
    PointCloud::new(schema, b).expect("records match schema")
}

/// A LiDAR sweep with points all around the sensor.
pub fn lidar_cloud(points: usize, seed: u64) -> PointCloud {
    let mut rng = RngStream::new(seed);
    let mut b = Vec::with_capacity(points * 20);
    for _ in 0..points {
        push_f32(&mut b, rng.uniform_range(-60.0, 60.0));
        push_f32(&mut b, rng.uniform_range(-60.0, 60.0));
        push_f32(&mut b, rng.uniform_range(-2.0, 6.0));
        push_f32(&mut b, rng.uniform_range(0.0, 255.0));
        push_f32(&mut b, rng.below(32) as f64);
    }
    PointCloud::new(Arc::new(Schema::lidar_xyzir()), b).expect("records match schema")
}

#[derive(Debug, Clone)]
pub struct MiniTree {
    pub image_width: usize,
    pub image_height: usize,
    pub radar_points: usize,
    pub lidar_points: usize,
    /// Key frames written per channel.
    pub frames: usize,
    pub seed: u64,
}

impl Default for MiniTree {
    fn default() -> Self {
        Self {
            image_width: 96,
            image_height: 64,
            radar_points: 60,
            lidar_points: 2000,
            frames: 1,
            seed: 7,
        }
    }
}

impl MiniTree {
    /// Writes six cameras, five radars and one LiDAR under `root/samples`,
    /// returning the relative paths in sorted order.
    pub fn write(&self, root: &Path) -> Result<Vec<String>> {
        let mut rels = Vec::new();
        for f in 0..self.frames {
            let ts = 1_533_151_603_500_000u64 + f as u64 * 500_000;
            for (i, ch) in CAMERA_CHANNELS.iter().enumerate() {
                let rel = format!("samples/{ch}/{LOG}__{ch}__{}.jpg", ts + i as u64 * 1000);
                let img = textured_image(
                    self.image_width,
                    self.image_height,
                    self.seed ^ ((f * 16 + i) as u64).wrapping_mul(0x9e37_79b9),
                );
                write_atomic(
                    &root.join(&rel),
                    &write_image(&img, OutputFormat::Jpeg, 95)?,
                )?;
                rels.push(rel);
            }
            for (i, ch) in RadarChannel::ALL.iter().enumerate() {
                let dir = ch.channel_dir();
                let rel = format!(
                    "samples/{dir}/{LOG}__{dir}__{}.pcd",
                    ts + 100 + i as u64 * 1000
                );
                let cloud = radar_cloud(self.radar_points, self.seed + 100 + (f * 8 + i) as u64);
                write_atomic(&root.join(&rel), &write_pcd(&cloud, None))?;
                rels.push(rel);
            }
            let rel = format!("samples/LIDAR_TOP/{LOG}__LIDAR_TOP__{}.pcd.bin", ts + 200);
            let cloud = lidar_cloud(self.lidar_points, self.seed + 1000 + f as u64);
            write_atomic(&root.join(&rel), &write_lidar_bin(&cloud)?)?;
            rels.push(rel);
        }
        rels.sort();
        Ok(rels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::scan_dataset;
    use crate::spec::Modality;

    #[test]
    fn radar_schema_is_43_bytes() {
        let s = nuscenes_radar_schema();
        assert_eq!(s.fields().len(), 18);
        assert_eq!(s.record_size(), 43);
        assert_eq!(radar_cloud(5, 1).len(), 5);
    }

    #[test]
    fn mini_tree_counts() {
        let dir = tempfile::tempdir().unwrap();
        let rels = MiniTree::default().write(dir.path()).unwrap();
        assert_eq!(rels.len(), 12);
        let entries = scan_dataset(dir.path(), &[]).unwrap();
        let count = |m| entries.iter().filter(|e| e.modality == m).count();
        assert_eq!(
            (
                count(Modality::Camera),
                count(Modality::Radar),
                count(Modality::Lidar)
            ),
            (6, 5, 1)
        );
    }
}
