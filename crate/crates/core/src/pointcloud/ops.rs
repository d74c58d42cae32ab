use super::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// `floor(n * (1 - p / 100))`, evaluated as `n * (100 - p) / 100` so integral
/// percentages are exact.
pub fn retained_count(n: usize, drop_percent: f64) -> usize {
    let keep = n as f64 * (100.0 - drop_percent) / 100.0;
    let nearest = keep.round();
    // Fractional percentages can land a hair below an integer.
    if (keep - nearest).abs() <= 1e-12 * nearest.max(1.0) {
        nearest as usize
    } else {
        keep.floor() as usize
    }
}

/// Keeps `retained_count(N, p)` points chosen uniformly without replacement,
/// in their original order.
pub fn dropout_points(
    cloud: &PointCloud,
    drop_percent: f64,
    rng: &mut RngStream,
) -> Result<PointCloud> {
    if !(drop_percent.is_finite() && (0.0..=99.0).contains(&drop_percent)) {
        return Err(Error::param(
            "drop_percent",
            format!("{drop_percent} is outside [0, 99]"),
        ));
    }
    let n = cloud.len();
    let k = retained_count(n, drop_percent);
    if k >= n {
        return Ok(cloud.clone());
    }
    Ok(cloud.select(&rng.sample_indices(n, k)))
}

/// Adds independent `N(0, sigma^2)` offsets to x, y and z of every point.
pub fn add_gaussian_noise(
    cloud: &PointCloud,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<PointCloud> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", format!("{sigma} must be >= 0")));
    }
    let layout = cloud.schema().spatial()?;
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let mut out = cloud.clone();
    let size = cloud.schema().record_size();
    for rec in out.records_mut().chunks_exact_mut(size) {
        let [x, y, z] = layout.read(rec);
        let moved = [
            x + sigma * rng.standard_normal(),
            y + sigma * rng.standard_normal(),
            z + sigma * rng.standard_normal(),
        ];
        layout.write(rec, moved);
    }
    Ok(out)
}
