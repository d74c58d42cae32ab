//! Dataset discovery, file formats and output placement.

mod assets;
mod codec;
mod lidar;
mod paths;
mod pcd;
mod scan;

pub use assets::{load_alpha_dir, load_scratch_dir, load_soiling_masks, AssetDirs};
pub use codec::{read_image, read_image_file, write_image, OutputFormat, DEFAULT_JPEG_QUALITY};
pub use lidar::{read_lidar_bin, write_lidar_bin, LIDAR_RECORD_SIZE};
pub use paths::{mirror_output_path, normalize_relpath, write_atomic};
pub use pcd::{read_pcd, read_pcd_with_header, write_pcd, DataMode, PcdHeader, MAX_HEADER_BYTES};
pub use scan::{classify_channel, scan_dataset, DatasetEntry};

use std::path::Path;

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;

/// Reads a radar `.pcd` or a flat LiDAR `.bin` sweep, chosen by extension.
pub fn read_cloud_file(path: &Path) -> Result<PointCloud> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path.to_string_lossy().to_ascii_lowercase();
    let parsed = if name.ends_with(".pcd") {
        read_pcd(&bytes)
    } else if name.ends_with(".bin") {
        read_lidar_bin(&bytes)
    } else {
        return Err(Error::UnsupportedFormat(format!(
            "{}: unknown point cloud extension",
            path.display()
        )));
    };
    parsed.map_err(|e| match e {
        Error::Malformed { offset, reason } => Error::Malformed {
            offset,
            reason: format!("{}: {reason}", path.display()),
        },
        other => other,
    })
}
