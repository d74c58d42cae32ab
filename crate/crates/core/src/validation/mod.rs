//! Degradation measurements: SSIM for images, retention and noise statistics
//! for point clouds.

mod report;
mod ssim;
mod stats;

pub use report::{
    batch_ssim, discover_variants, pair_camera_files, severity_trends, CameraReport,
    DegradationReport, SeverityTrend, VariantReport,
};
pub use ssim::{ssim, ssim_planes, SsimParams};
pub use stats::{
    is_record_subsequence, std_tolerance, verify_noise_stats, verify_retention, NoiseAccumulator,
    NoiseCheck, RetentionCheck,
};
