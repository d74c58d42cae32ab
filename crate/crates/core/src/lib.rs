//! Deterministic camera, radar and LiDAR occlusion synthesis for
//! nuScenes-layout sensor data, with SSIM and point-statistics validation.

pub mod camera;
pub mod error;
pub mod io;
pub mod job;
pub mod manifest;
pub mod pointcloud;
pub mod rng;
pub mod spec;
pub mod synthetic;
pub mod validation;

pub use error::{Error, Result};
pub use manifest::ManifestRecord;
pub use rng::{checksum, derive_seed, RngStream};
pub use spec::{
    severity_to_spec, Modality, Occlusion, OcclusionKind, OcclusionSpec, Region, Severity,
};
