use serde::Serialize;

use crate::spec::OcclusionKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamInfo {
    pub name: &'static str,
    pub range: &'static str,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PresetInfo {
    pub kind: &'static str,
    pub modality: &'static str,
    pub params: Vec<ParamInfo>,
    /// Canonical settings.
    pub setting: &'static str,
}

fn p(name: &'static str, range: &'static str, unit: &'static str) -> ParamInfo {
    ParamInfo { name, range, unit }
}

/// Parameters, ranges and canonical settings of every occlusion kind.
pub fn presets() -> Vec<PresetInfo> {
    use OcclusionKind as K;
    K::ALL
        .into_iter()
        .map(|k| {
            let (modality, params, setting) = match k {
                K::Dirt => (
                    "camera",
                    vec![p("opacity", "0 – 1", "")],
                    "opacity 0.1 – 0.3 (light 0.1, moderate 0.2, heavy 0.3)",
                ),
                K::WaterBlur => (
                    "camera",
                    vec![p("opacity", "0 – 1", "")],
                    "opacity 0.1 – 0.3 (light 0.1, moderate 0.2, heavy 0.3)",
                ),
                K::Scratch => (
                    "camera",
                    vec![p("severity", "light | moderate | heavy", "")],
                    "opacity 0.1 – 0.3 via severity",
                ),
                K::Soiling => (
                    "camera",
                    vec![p("kernel_size", "15 | 51 | 101 | 251", "px")],
                    "Gaussian kernel 15 / 51 / 101 / 251 px",
                ),
                K::RadarSensorDrop => (
                    "radar",
                    vec![p(
                        "sensor",
                        "FRONT | FRONT_LEFT | FRONT_RIGHT | BACK_LEFT | BACK_RIGHT",
                        "",
                    )],
                    "Drop 1 of 5 radars",
                ),
                K::PointDropout => (
                    "radar, lidar",
                    vec![
                        p("drop_percent", "0 – 99", "%"),
                        p("all_sensors", "true | false", ""),
                    ],
                    "drop 0 – 99 % of points",
                ),
                K::GaussianNoise => (
                    "radar",
                    vec![p("sigma", "0.1 – 2", "m")],
                    "Std Dev (m) 0.1 – 2",
                ),
                K::RegionDrop => (
                    "lidar",
                    vec![p("region", "front | back | left | right", "")],
                    "front / back / left / right",
                ),
                K::AngleDrop => (
                    "lidar",
                    vec![
                        p("region", "front | back | left | right", ""),
                        p("cone_angle_deg", "0 – 360", "deg"),
                    ],
                    "cone 30° / 60° / 90° about the region center",
                ),
            };
            PresetInfo {
                kind: k.name(),
                modality,
                params,
                setting,
            }
        })
        .collect()
}

pub fn render_text(presets: &[PresetInfo]) -> String {
    let mut out = String::new();
    for p in presets {
        out.push_str(&format!("{} [{}]\n", p.kind, p.modality));
        for param in &p.params {
            let unit = if param.unit.is_empty() {
                String::new()
            } else {
                format!(" {}", param.unit)
            };
            out.push_str(&format!("  {:<16}{}{unit}\n", param.name, param.range));
        }
        out.push_str(&format!("  setting         {}\n", p.setting));
    }
    out
}

pub fn render_json(presets: &[PresetInfo]) -> String {
    serde_json::to_string_pretty(presets).expect("preset table serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_listed_once() {
        let names: Vec<_> = presets().iter().map(|p| p.kind).collect();
        assert_eq!(names.len(), 9);
        for n in &names {
            assert_eq!(names.iter().filter(|m| *m == n).count(), 1);
            assert!(n.parse::<OcclusionKind>().is_ok());
        }
    }

    #[test]
    fn json_matches_text() {
        let ps = presets();
        let v: serde_json::Value = serde_json::from_str(&render_json(&ps)).unwrap();
        let text = render_text(&ps);
        for item in v.as_array().unwrap() {
            assert!(text.contains(item["kind"].as_str().unwrap()));
            assert!(text.contains(item["setting"].as_str().unwrap()));
        }
    }
}
