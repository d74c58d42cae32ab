use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// The five radar units of the sensor suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RadarChannel {
    Front,
    FrontLeft,
    FrontRight,
    BackLeft,
    BackRight,
}

impl RadarChannel {
    pub const ALL: [RadarChannel; 5] = [
        RadarChannel::Front,
        RadarChannel::FrontLeft,
        RadarChannel::FrontRight,
        RadarChannel::BackLeft,
        RadarChannel::BackRight,
    ];

    /// `FRONT`, `FRONT_LEFT`, ...
    pub fn short_name(self) -> &'static str {
        match self {
            RadarChannel::Front => "FRONT",
            RadarChannel::FrontLeft => "FRONT_LEFT",
            RadarChannel::FrontRight => "FRONT_RIGHT",
            RadarChannel::BackLeft => "BACK_LEFT",
            RadarChannel::BackRight => "BACK_RIGHT",
        }
    }

    /// Dataset directory name, e.g. `RADAR_FRONT_LEFT`.
    pub fn channel_dir(self) -> String {
        format!("RADAR_{}", self.short_name())
    }

    pub fn from_channel_dir(dir: &str) -> Option<Self> {
        dir.strip_prefix("RADAR_")
            .and_then(|s| Self::ALL.into_iter().find(|c| c.short_name() == s))
    }
}

impl fmt::Display for RadarChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for RadarChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase().replace('-', "_");
        let short = up.strip_prefix("RADAR_").unwrap_or(&up);
        Self::ALL
            .into_iter()
            .find(|c| c.short_name() == short)
            .ok_or_else(|| Error::param("sensor", format!("unknown radar `{s}`")))
    }
}

/// Radar clouds of one frame, keyed by sensor.
pub type RadarScene = BTreeMap<RadarChannel, PointCloud>;

/// Removes one sensor from a complete five-radar scene. With no `choice`,
/// the sensor is drawn uniformly.
pub fn drop_sensor(
    mut scene: RadarScene,
    choice: Option<RadarChannel>,
    rng: &mut RngStream,
) -> Result<(RadarScene, RadarChannel)> {
    let missing: Vec<_> = RadarChannel::ALL
        .into_iter()
        .filter(|c| !scene.contains_key(c))
        .map(|c| c.short_name())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Input(format!(
            "radar scene is missing {}",
            missing.join(", ")
        )));
    }
    let dropped = choice.unwrap_or_else(|| RadarChannel::ALL[rng.below(5) as usize]);
    scene.remove(&dropped);
    Ok((scene, dropped))
}
