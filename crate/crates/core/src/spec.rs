//! Occlusion specifications and severity presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointcloud::RadarChannel;

/// Soiling kernel sizes used for the released camera variants.
pub const CANONICAL_SOILING_KERNELS: [u32; 4] = [15, 51, 101, 251];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Camera,
    Radar,
    Lidar,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Camera => "camera",
            Modality::Radar => "radar",
            Modality::Lidar => "lidar",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Light,
    Moderate,
    Heavy,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::Light, Severity::Moderate, Severity::Heavy];

    /// Camera opacity for this level.
    pub fn opacity(self) -> f64 {
        match self {
            Severity::Light => 0.1,
            Severity::Moderate => 0.2,
            Severity::Heavy => 0.3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Severity::Light => "light",
            Severity::Moderate => "moderate",
            Severity::Heavy => "heavy",
        }
    }
}

impl FromStr for Severity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "light" => Ok(Severity::Light),
            "moderate" => Ok(Severity::Moderate),
            "heavy" => Ok(Severity::Heavy),
            other => Err(Error::param("severity", format!("unknown level `{other}`"))),
        }
    }
}

/// Half-space around the sensor, using the sign conventions
/// front `x > 0`, back `x < 0`, left `y < 0`, right `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Front,
    Back,
    Left,
    Right,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Front, Region::Back, Region::Left, Region::Right];

    pub fn name(self) -> &'static str {
        match self {
            Region::Front => "front",
            Region::Back => "back",
            Region::Left => "left",
            Region::Right => "right",
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "front" => Ok(Region::Front),
            "back" => Ok(Region::Back),
            "left" => Ok(Region::Left),
            "right" => Ok(Region::Right),
            other => Err(Error::param("region", format!("unknown region `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcclusionKind {
    Dirt,
    WaterBlur,
    Scratch,
    Soiling,
    RadarSensorDrop,
    PointDropout,
    GaussianNoise,
    RegionDrop,
    AngleDrop,
}

impl OcclusionKind {
    pub const ALL: [OcclusionKind; 9] = [
        OcclusionKind::Dirt,
        OcclusionKind::WaterBlur,
        OcclusionKind::Scratch,
        OcclusionKind::Soiling,
        OcclusionKind::RadarSensorDrop,
        OcclusionKind::PointDropout,
        OcclusionKind::GaussianNoise,
        OcclusionKind::RegionDrop,
        OcclusionKind::AngleDrop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OcclusionKind::Dirt => "dirt",
            OcclusionKind::WaterBlur => "water_blur",
            OcclusionKind::Scratch => "scratch",
            OcclusionKind::Soiling => "soiling",
            OcclusionKind::RadarSensorDrop => "radar_sensor_drop",
            OcclusionKind::PointDropout => "point_dropout",
            OcclusionKind::GaussianNoise => "gaussian_noise",
            OcclusionKind::RegionDrop => "region_drop",
            OcclusionKind::AngleDrop => "angle_drop",
        }
    }

    pub fn is_camera(self) -> bool {
        matches!(
            self,
            OcclusionKind::Dirt
                | OcclusionKind::WaterBlur
                | OcclusionKind::Scratch
                | OcclusionKind::Soiling
        )
    }

    /// Modalities a job applies this kind to.
    pub fn modalities(self) -> &'static [Modality] {
        match self {
            OcclusionKind::Dirt
            | OcclusionKind::WaterBlur
            | OcclusionKind::Scratch
            | OcclusionKind::Soiling => &[Modality::Camera],
            OcclusionKind::RadarSensorDrop | OcclusionKind::GaussianNoise => &[Modality::Radar],
            OcclusionKind::PointDropout => &[Modality::Radar, Modality::Lidar],
            OcclusionKind::RegionDrop | OcclusionKind::AngleDrop => &[Modality::Lidar],
        }
    }
}

impl fmt::Display for OcclusionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OcclusionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        OcclusionKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::param("type", format!("unknown occlusion kind `{s}`")))
    }
}

/// One degradation together with exactly the parameters it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Occlusion {
    Dirt {
        opacity: f64,
    },
    WaterBlur {
        opacity: f64,
    },
    /// Severity picks the texture bucket or the procedural scratch density.
    Scratch {
        severity: Severity,
    },
    Soiling {
        kernel_size: u32,
    },
    RadarSensorDrop {
        /// Fixed sensor to disable; drawn uniformly per frame when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sensor: Option<RadarChannel>,
    },
    PointDropout {
        drop_percent: f64,
        /// Radar only: thin every sensor rather than one random sensor per frame.
        #[serde(default, skip_serializing_if = "is_false")]
        all_sensors: bool,
    },
    GaussianNoise {
        sigma: f64,
    },
    RegionDrop {
        region: Region,
    },
    AngleDrop {
        region: Region,
        cone_angle_deg: f64,
    },
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn check_range(name: &'static str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{v} is outside [{lo}, {hi}]")))
    }
}

pub(crate) fn check_kernel_size(size: u32) -> Result<()> {
    if size >= 3 && size % 2 == 1 {
        Ok(())
    } else {
        Err(Error::param(
            "kernel_size",
            format!("{size} must be odd and at least 3"),
        ))
    }
}

impl Occlusion {
    pub fn kind(&self) -> OcclusionKind {
        match self {
            Occlusion::Dirt { .. } => OcclusionKind::Dirt,
            Occlusion::WaterBlur { .. } => OcclusionKind::WaterBlur,
            Occlusion::Scratch { .. } => OcclusionKind::Scratch,
            Occlusion::Soiling { .. } => OcclusionKind::Soiling,
            Occlusion::RadarSensorDrop { .. } => OcclusionKind::RadarSensorDrop,
            Occlusion::PointDropout { .. } => OcclusionKind::PointDropout,
            Occlusion::GaussianNoise { .. } => OcclusionKind::GaussianNoise,
            Occlusion::RegionDrop { .. } => OcclusionKind::RegionDrop,
            Occlusion::AngleDrop { .. } => OcclusionKind::AngleDrop,
        }
    }

    pub fn opacity(&self) -> Option<f64> {
        match self {
            Occlusion::Dirt { opacity } | Occlusion::WaterBlur { opacity } => Some(*opacity),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Occlusion::Dirt { opacity } | Occlusion::WaterBlur { opacity } => {
                check_range("opacity", opacity, 0.0, 1.0)
            }
            Occlusion::Scratch { .. } | Occlusion::RadarSensorDrop { .. } => Ok(()),
            Occlusion::Soiling { kernel_size } => check_kernel_size(kernel_size),
            Occlusion::PointDropout { drop_percent, .. } => {
                check_range("drop_percent", drop_percent, 0.0, 99.0)
            }
            Occlusion::GaussianNoise { sigma } => check_range("sigma", sigma, 0.0, f64::MAX),
            Occlusion::RegionDrop { .. } => Ok(()),
            Occlusion::AngleDrop { cone_angle_deg, .. } => {
                check_range("cone_angle_deg", cone_angle_deg, 0.0, 360.0)
            }
        }
    }

    /// Directory name for this variant's output subtree, e.g. `dirt_0.2`.
    pub fn variant_id(&self) -> String {
        let kind = self.kind().name();
        match self {
            Occlusion::Dirt { opacity } | Occlusion::WaterBlur { opacity } => {
                format!("{kind}_{opacity}")
            }
            Occlusion::Scratch { severity } => format!("{kind}_{}", severity.name()),
            Occlusion::Soiling { kernel_size } => format!("{kind}_k{kernel_size}"),
            Occlusion::RadarSensorDrop { sensor: None } => kind.to_string(),
            Occlusion::RadarSensorDrop {
                sensor: Some(sensor),
            } => format!("{kind}_{}", sensor.short_name().to_ascii_lowercase()),
            Occlusion::PointDropout {
                drop_percent,
                all_sensors,
            } => {
                if *all_sensors {
                    format!("{kind}_{drop_percent}_all")
                } else {
                    format!("{kind}_{drop_percent}")
                }
            }
            Occlusion::GaussianNoise { sigma } => format!("{kind}_{sigma}"),
            Occlusion::RegionDrop { region } => format!("{kind}_{}", region.name()),
            Occlusion::AngleDrop {
                region,
                cone_angle_deg,
            } => format!("{kind}_{}_{cone_angle_deg}", region.name()),
        }
    }
}

/// An occlusion bound to the seed it is reproduced from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionSpec {
    #[serde(flatten)]
    pub occlusion: Occlusion,
    pub seed: u64,
}

impl OcclusionSpec {
    pub fn new(occlusion: Occlusion, seed: u64) -> Result<Self> {
        occlusion.validate()?;
        Ok(Self { occlusion, seed })
    }

    pub fn kind(&self) -> OcclusionKind {
        self.occlusion.kind()
    }
}

/// Maps a named severity onto a camera occlusion.
///
/// Dirt and water-blur take the preset opacity; scratch keeps the level as
/// its severity; soiling maps light/moderate/heavy onto kernel sizes
/// 15/51/101.
pub fn severity_to_spec(kind: OcclusionKind, preset: Severity, seed: u64) -> Result<OcclusionSpec> {
    let occlusion = match kind {
        OcclusionKind::Dirt => Occlusion::Dirt {
            opacity: preset.opacity(),
        },
        OcclusionKind::WaterBlur => Occlusion::WaterBlur {
            opacity: preset.opacity(),
        },
        OcclusionKind::Scratch => Occlusion::Scratch { severity: preset },
        OcclusionKind::Soiling => Occlusion::Soiling {
            kernel_size: CANONICAL_SOILING_KERNELS[preset as usize],
        },
        other => return Err(Error::UnsupportedPreset(other.name())),
    };
    OcclusionSpec::new(occlusion, seed)
}
