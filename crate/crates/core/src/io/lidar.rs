use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pointcloud::{PointCloud, Schema};

/// Five little-endian float32 values per point.
pub const LIDAR_RECORD_SIZE: usize = 20;

/// Parses a flat `x y z intensity ring` sweep.
pub fn read_lidar_bin(bytes: &[u8]) -> Result<PointCloud> {
    let tail = bytes.len() % LIDAR_RECORD_SIZE;
    if tail != 0 {
        return Err(Error::malformed(
            bytes.len() - tail,
            format!(
                "{} bytes is not a multiple of the {LIDAR_RECORD_SIZE}-byte record",
                bytes.len()
            ),
        ));
    }
    PointCloud::new(Arc::new(Schema::lidar_xyzir()), bytes.to_vec())
}

pub fn write_lidar_bin(cloud: &PointCloud) -> Result<Vec<u8>> {
    if **cloud.schema() != Schema::lidar_xyzir() {
        return Err(Error::Input(
            "flat LiDAR output needs the x, y, z, intensity, ring float32 schema".into(),
        ));
    }
    Ok(cloud.bytes().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crafted_points() {
        let mut b = Vec::new();
        for v in [1.0f32, 2.0, 3.0, 4.0, 5.0, -1.0, -2.0, -3.0, 0.5, 31.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        let c = read_lidar_bin(&b).unwrap();
        assert_eq!(
            c.positions().unwrap(),
            vec![[1.0, 2.0, 3.0], [-1.0, -2.0, -3.0]]
        );
        assert_eq!(write_lidar_bin(&c).unwrap(), b);
    }

    #[test]
    fn empty_and_ragged() {
        assert!(read_lidar_bin(&[]).unwrap().is_empty());
        assert!(matches!(
            read_lidar_bin(&[0; 21]),
            Err(Error::Malformed { offset: 20, .. })
        ));
    }
}
