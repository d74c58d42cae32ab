//! Radar and LiDAR degradations on schema-described point clouds.
//!
//! All predicates run in the coordinate frame stored in the file. Filtering
//! operations return a subsequence of the input records; nothing is rewritten
//! except the coordinates touched by [`add_gaussian_noise`].

mod cloud;
mod geometry;
mod ops;
mod radar;

pub use cloud::{Field, PointCloud, ScalarKind, Schema, SpatialLayout};
pub use geometry::{
    angular_distance_deg, azimuth_deg, occlude_angle, occlude_region, ConeSelector,
    LateralConvention, RegionSelector,
};
pub use ops::{add_gaussian_noise, dropout_points, retained_count};
pub use radar::{drop_sensor, RadarChannel, RadarScene};
