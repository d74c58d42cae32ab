//! Point-cloud checks: retention counts and noise statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointcloud::{retained_count, PointCloud, SpatialLayout};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetentionCheck {
    pub original: usize,
    pub expected: usize,
    pub actual: usize,
    /// Every degraded record appears, unmodified and in order, in the original.
    pub subsequence: bool,
    pub passed: bool,
}

fn same_schema(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.schema() != b.schema() {
        return Err(Error::Input("point clouds have different schemas".into()));
    }
    Ok(())
}

/// True if the records of `sub` occur in `full` in the same order.
pub fn is_record_subsequence(full: &PointCloud, sub: &PointCloud) -> bool {
    let mut it = full.records();
    sub.records().all(|r| it.any(|o| o == r))
}

pub fn verify_retention(
    original: &PointCloud,
    degraded: &PointCloud,
    drop_percent: f64,
) -> Result<RetentionCheck> {
    same_schema(original, degraded)?;
    let expected = retained_count(original.len(), drop_percent);
    let subsequence = is_record_subsequence(original, degraded);
    Ok(RetentionCheck {
        original: original.len(),
        expected,
        actual: degraded.len(),
        subsequence,
        passed: subsequence && degraded.len() == expected,
    })
}

/// Relative tolerance on the displacement standard deviation. Five percent
/// for large clouds; widened to four standard errors of the estimator below
/// ten thousand points.
pub fn std_tolerance(n: usize) -> f64 {
    if n >= 10_000 {
        0.05
    } else if n < 2 {
        f64::INFINITY
    } else {
        (4.0 / (2.0 * (n as f64 - 1.0)).sqrt()).max(0.05)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseCheck {
    pub points: usize,
    pub sigma: f64,
    pub mean: [f64; 3],
    pub std: [f64; 3],
    pub std_tolerance: f64,
    pub mean_bound: f64,
    pub non_spatial_identical: bool,
    pub passed: bool,
}

/// Streams displacements from many cloud pairs into one estimate.
#[derive(Debug, Clone)]
pub struct NoiseAccumulator {
    n: usize,
    sum: [f64; 3],
    sum_sq: [f64; 3],
    non_spatial_identical: bool,
}

impl Default for NoiseAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl NoiseAccumulator {
    pub fn new() -> Self {
        Self {
            n: 0,
            sum: [0.0; 3],
            sum_sq: [0.0; 3],
            non_spatial_identical: true,
        }
    }

    pub fn add(&mut self, original: &PointCloud, degraded: &PointCloud) -> Result<()> {
        same_schema(original, degraded)?;
        if original.len() != degraded.len() {
            return Err(Error::Input(format!(
                "point counts differ: {} vs {}",
                original.len(),
                degraded.len()
            )));
        }
        let layout = original.schema().spatial()?;
        for (a, b) in original.records().zip(degraded.records()) {
            let (p, q) = (layout.read(a), layout.read(b));
            for axis in 0..3 {
                let d = q[axis] - p[axis];
                self.sum[axis] += d;
                self.sum_sq[axis] += d * d;
            }
            if !non_spatial_equal(&layout, a, b) {
                self.non_spatial_identical = false;
            }
        }
        self.n += original.len();
        Ok(())
    }

    pub fn finish(&self, sigma: f64) -> NoiseCheck {
        let n = self.n;
        let nf = n as f64;
        let mut mean = [0.0; 3];
        let mut std = [0.0; 3];
        for a in 0..3 {
            if n > 0 {
                mean[a] = self.sum[a] / nf;
            }
            if n > 1 {
                let var = (self.sum_sq[a] - nf * mean[a] * mean[a]) / (nf - 1.0);
                std[a] = var.max(0.0).sqrt();
            }
        }
        let std_tolerance = std_tolerance(n);
        let mean_bound = if n > 0 { 4.0 * sigma / nf.sqrt() } else { 0.0 };
        let std_ok = n < 2
            || std
                .iter()
                .all(|s| (s - sigma).abs() <= std_tolerance * sigma + 1e-12);
        let mean_ok = n == 0 || mean.iter().all(|m| m.abs() <= mean_bound + 1e-12);
        NoiseCheck {
            points: n,
            sigma,
            mean,
            std,
            std_tolerance,
            mean_bound,
            non_spatial_identical: self.non_spatial_identical,
            passed: std_ok && mean_ok && self.non_spatial_identical,
        }
    }
}

fn non_spatial_equal(layout: &SpatialLayout, a: &[u8], b: &[u8]) -> bool {
    a.iter()
        .zip(b)
        .enumerate()
        .all(|(i, (x, y))| x == y || layout.covers(i))
}

pub fn verify_noise_stats(
    original: &PointCloud,
    degraded: &PointCloud,
    sigma: f64,
) -> Result<NoiseCheck> {
    let mut acc = NoiseAccumulator::new();
    acc.add(original, degraded)?;
    Ok(acc.finish(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{add_gaussian_noise, dropout_points, Schema};
    use crate::rng::RngStream;
    use std::sync::Arc;

    fn cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = RngStream::new(seed);
        let mut bytes = Vec::with_capacity(n * 20);
        for _ in 0..n {
            for _ in 0..5 {
                bytes.extend_from_slice(&(rng.uniform_range(-50.0, 50.0) as f32).to_le_bytes());
            }
        }
        PointCloud::new(Arc::new(Schema::lidar_xyzir()), bytes).unwrap()
    }

    #[test]
    fn retention_pass_and_fail() {
        let c = cloud(1000, 1);
        let d = dropout_points(&c, 30.0, &mut RngStream::new(2)).unwrap();
        assert!(verify_retention(&c, &d, 30.0).unwrap().passed);

        let extra = c.retain_indices(|i| i < 701);
        let r = verify_retention(&c, &extra, 30.0).unwrap();
        assert!(!r.passed);
        assert_eq!((r.expected, r.actual), (700, 701));

        let mut bytes = d.bytes().to_vec();
        bytes[15] ^= 0x40;
        let tampered = PointCloud::new(c.schema().clone(), bytes).unwrap();
        let r = verify_retention(&c, &tampered, 30.0).unwrap();
        assert!(!r.subsequence && !r.passed);
    }

    #[test]
    fn noise_checks() {
        let c = cloud(100_000, 3);
        assert!(verify_noise_stats(&c, &c, 0.0).unwrap().passed);
        let honest = add_gaussian_noise(&c, 0.5, &mut RngStream::new(4)).unwrap();
        let r = verify_noise_stats(&c, &honest, 0.5).unwrap();
        assert!(r.passed, "{r:?}");
        let loud = add_gaussian_noise(&c, 1.0, &mut RngStream::new(4)).unwrap();
        assert!(!verify_noise_stats(&c, &loud, 0.5).unwrap().passed);
        assert!(verify_noise_stats(&c, &cloud(10, 3), 0.5).is_err());
    }

    #[test]
    fn non_spatial_tamper_detected() {
        let c = cloud(100, 5);
        let mut bytes = c.bytes().to_vec();
        bytes[12] ^= 1;
        let t = PointCloud::new(c.schema().clone(), bytes).unwrap();
        let r = verify_noise_stats(&c, &t, 0.0).unwrap();
        assert!(!r.non_spatial_identical && !r.passed);
    }
}
