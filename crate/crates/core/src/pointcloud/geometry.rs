//! Directional removal: half-plane regions and azimuth cones.

use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::spec::Region;

/// Which sign of `y` counts as "left".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LateralConvention {
    /// Left is `y < 0`, right is `y > 0`.
    #[default]
    Published,
    /// Left is `y > 0`, right is `y < 0` (usual vehicle frame).
    Vehicle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSelector {
    pub region: Region,
    pub lateral: LateralConvention,
}

impl RegionSelector {
    pub fn new(region: Region) -> Self {
        Self {
            region,
            lateral: LateralConvention::default(),
        }
    }

    pub fn with_lateral(mut self, lateral: LateralConvention) -> Self {
        self.lateral = lateral;
        self
    }

    fn left_is_negative_y(&self) -> bool {
        self.lateral == LateralConvention::Published
    }

    /// Strict half-plane test; points on the dividing axis are outside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self.region {
            Region::Front => x > 0.0,
            Region::Back => x < 0.0,
            Region::Left if self.left_is_negative_y() => y < 0.0,
            Region::Left => y > 0.0,
            Region::Right if self.left_is_negative_y() => y > 0.0,
            Region::Right => y < 0.0,
        }
    }

    /// Azimuth of the region's center direction in degrees, from `atan2(y, x)`.
    pub fn center_azimuth_deg(&self) -> f64 {
        let positive_y = match self.region {
            Region::Front => return 0.0,
            Region::Back => return 180.0,
            Region::Left => !self.left_is_negative_y(),
            Region::Right => self.left_is_negative_y(),
        };
        if positive_y {
            90.0
        } else {
            -90.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSelector {
    pub region: RegionSelector,
    pub cone_angle_deg: f64,
}

impl ConeSelector {
    pub fn new(region: RegionSelector, cone_angle_deg: f64) -> Result<Self> {
        if !(cone_angle_deg.is_finite() && (0.0..=360.0).contains(&cone_angle_deg)) {
            return Err(Error::param(
                "cone_angle_deg",
                format!("{cone_angle_deg} is outside [0, 360]"),
            ));
        }
        Ok(Self {
            region,
            cone_angle_deg,
        })
    }

    /// Inside the region and within half the cone angle of its center azimuth.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.region.contains(x, y)
            && angular_distance_deg(azimuth_deg(x, y), self.region.center_azimuth_deg())
                <= self.cone_angle_deg / 2.0
    }
}

/// `atan2(y, x)` in degrees, in `(-180, 180]`.
pub fn azimuth_deg(x: f64, y: f64) -> f64 {
    y.atan2(x).to_degrees()
}

/// Absolute difference of two azimuths, wrapped into `[0, 180]`.
pub fn angular_distance_deg(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d < -180.0 {
        d += 360.0;
    }
    d.abs()
}

fn remove_where(cloud: &PointCloud, pred: impl Fn(f64, f64) -> bool) -> Result<PointCloud> {
    let layout = cloud.schema().spatial()?;
    let drop: Vec<bool> = cloud
        .records()
        .map(|r| {
            let [x, y, _] = layout.read(r);
            pred(x, y)
        })
        .collect();
    Ok(cloud.retain_indices(|i| !drop[i]))
}

/// Removes every point inside the region.
pub fn occlude_region(cloud: &PointCloud, region: &RegionSelector) -> Result<PointCloud> {
    remove_where(cloud, |x, y| region.contains(x, y))
}

/// Removes every point inside the cone.
pub fn occlude_angle(cloud: &PointCloud, cone: &ConeSelector) -> Result<PointCloud> {
    remove_where(cloud, |x, y| cone.contains(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::Schema;
    use std::sync::Arc;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        PointCloud::from_positions(Arc::new(Schema::lidar_xyzir()), pts).unwrap()
    }

    #[test]
    fn front_region_example() {
        let c = cloud(&[[5.0, 3.0, 0.0], [-5.0, 3.0, 0.0]]);
        let out = occlude_region(&c, &RegionSelector::new(Region::Front)).unwrap();
        assert_eq!(out.positions().unwrap(), vec![[-5.0, 3.0, 0.0]]);
    }

    #[test]
    fn boundary_points_kept() {
        let c = cloud(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(
            occlude_region(&c, &RegionSelector::new(Region::Front))
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            occlude_region(&c, &RegionSelector::new(Region::Right))
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            occlude_region(&c, &RegionSelector::new(Region::Left))
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn region_sign_conventions() {
        let left = RegionSelector::new(Region::Left);
        assert!(left.contains(0.0, -1.0) && !left.contains(0.0, 1.0));
        let swapped = left.with_lateral(LateralConvention::Vehicle);
        assert!(swapped.contains(0.0, 1.0));
        assert_eq!(swapped.center_azimuth_deg(), 90.0);
        assert_eq!(left.center_azimuth_deg(), -90.0);
        assert_eq!(
            RegionSelector::new(Region::Right).center_azimuth_deg(),
            90.0
        );
    }

    #[test]
    fn cone_hand_values() {
        let cone = ConeSelector::new(RegionSelector::new(Region::Front), 30.0).unwrap();
        // atan(0.2) = 11.31 deg, atan(0.6) = 30.96 deg.
        assert!(cone.contains(1.0, 0.2));
        assert!(!cone.contains(1.0, 0.6));
        let c = cloud(&[[1.0, 0.2, 0.0], [1.0, 0.6, 0.0]]);
        assert_eq!(
            occlude_angle(&c, &cone).unwrap().positions().unwrap(),
            vec![[1.0, f64::from(0.6f32), 0.0]]
        );
    }

    #[test]
    fn back_cone_wraps() {
        let cone = ConeSelector::new(RegionSelector::new(Region::Back), 60.0).unwrap();
        assert!(cone.contains(-1.0, 0.1));
        assert!(cone.contains(-1.0, -0.1));
        assert!(!cone.contains(-1.0, 1.0));
    }

    #[test]
    fn degenerate_cone() {
        let cone = ConeSelector::new(RegionSelector::new(Region::Front), 0.0).unwrap();
        assert!(cone.contains(2.0, 0.0));
        assert!(!cone.contains(2.0, 1e-6));
        assert!(ConeSelector::new(RegionSelector::new(Region::Front), 400.0).is_err());
    }

    #[test]
    fn wrapping_distance() {
        assert_eq!(angular_distance_deg(179.0, -179.0), 2.0);
        assert_eq!(angular_distance_deg(-90.0, 90.0), 180.0);
        assert_eq!(angular_distance_deg(10.0, 0.0), 10.0);
    }
}
