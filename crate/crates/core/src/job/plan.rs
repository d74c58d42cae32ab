//! Expands a job into independent units of work.

use std::collections::BTreeMap;

use crate::io::DatasetEntry;
use crate::pointcloud::RadarChannel;
use crate::rng::derive_seed;
use crate::spec::{Modality, Occlusion};

/// Five radar files treated as one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarFrame {
    /// `split/log#ordinal`, used for seeding.
    pub label: String,
    pub members: Vec<(RadarChannel, DatasetEntry)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Work {
    Image(DatasetEntry),
    Cloud(DatasetEntry),
    Frame(RadarFrame),
    /// Copied unchanged; the occlusion cannot apply to it.
    Copy(DatasetEntry),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    /// Index into the job's spec list.
    pub spec: usize,
    pub work: Work,
    pub seed: u64,
}

impl Task {
    pub fn sources(&self) -> Vec<&DatasetEntry> {
        match &self.work {
            Work::Image(e) | Work::Cloud(e) | Work::Copy(e) => vec![e],
            Work::Frame(f) => f.members.iter().map(|(_, e)| e).collect(),
        }
    }

    pub fn label(&self) -> String {
        match &self.work {
            Work::Frame(f) => format!("radar frame {}", f.label),
            _ => self.sources()[0].relpath.clone(),
        }
    }
}

/// Log prefix of a nuScenes file name (`<log>__<CHANNEL>__<timestamp>.ext`).
fn log_prefix(file_name: &str) -> &str {
    file_name
        .split("__")
        .next()
        .filter(|_| file_name.contains("__"))
        .unwrap_or("")
}

/// Groups radar files into frames: the i-th file of every channel within the
/// same split and log. Files that cannot form a complete frame are returned
/// separately.
pub fn group_radar_frames(entries: &[DatasetEntry]) -> (Vec<RadarFrame>, Vec<DatasetEntry>) {
    type Key = (String, String);
    let mut groups: BTreeMap<Key, BTreeMap<RadarChannel, Vec<DatasetEntry>>> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.modality == Modality::Radar) {
        let Some(ch) = RadarChannel::from_channel_dir(&e.channel) else {
            continue;
        };
        groups
            .entry((e.split().to_string(), log_prefix(e.file_name()).to_string()))
            .or_default()
            .entry(ch)
            .or_default()
            .push(e.clone());
    }
    let mut frames = Vec::new();
    let mut leftovers = Vec::new();
    for ((split, log), mut by_channel) in groups {
        for list in by_channel.values_mut() {
            list.sort_by(|a, b| a.relpath.cmp(&b.relpath));
        }
        let complete = if by_channel.len() == RadarChannel::ALL.len() {
            by_channel.values().map(Vec::len).min().unwrap_or(0)
        } else {
            0
        };
        frames.extend((0..complete).map(|i| {
            RadarFrame {
                label: format!("{split}/{log}#{i}"),
                members: RadarChannel::ALL
                    .iter()
                    .map(|ch| (*ch, by_channel[ch][i].clone()))
                    .collect(),
            }
        }));
        for list in by_channel.into_values() {
            leftovers.extend(list.into_iter().skip(complete));
        }
    }
    leftovers.sort_by(|a, b| a.relpath.cmp(&b.relpath));
    (frames, leftovers)
}

/// Seed of one unit of work. Severity parameters are deliberately left out so
/// every level of a sweep draws the same layers, overlays and samples.
pub fn task_seed(global_seed: u64, occlusion: &Occlusion, unit: &str) -> u64 {
    derive_seed(global_seed, &format!("{}/{unit}", occlusion.kind().name()))
}

/// Every task of the job, in a stable order.
pub fn plan(specs: &[Occlusion], entries: &[DatasetEntry], global_seed: u64) -> Vec<Task> {
    let (frames, leftovers) = group_radar_frames(entries);
    let mut warned = false;
    let mut tasks = Vec::new();
    for (i, occ) in specs.iter().enumerate() {
        let modalities = occ.kind().modalities();
        let frame_level = match occ {
            Occlusion::RadarSensorDrop { .. } => true,
            Occlusion::PointDropout { all_sensors, .. } => !all_sensors,
            _ => false,
        };
        for e in entries.iter().filter(|e| modalities.contains(&e.modality)) {
            let work = match e.modality {
                Modality::Camera => Work::Image(e.clone()),
                Modality::Radar if frame_level => continue,
                Modality::Radar | Modality::Lidar => Work::Cloud(e.clone()),
            };
            tasks.push(Task {
                spec: i,
                seed: task_seed(global_seed, occ, &e.relpath),
                work,
            });
        }
        if frame_level {
            if !leftovers.is_empty() && !warned {
                log::warn!(
                    "{} radar file(s) do not form complete five-sensor frames and are copied unchanged",
                    leftovers.len()
                );
                warned = true;
            }
            for f in &frames {
                tasks.push(Task {
                    spec: i,
                    seed: task_seed(global_seed, occ, &f.label),
                    work: Work::Frame(f.clone()),
                });
            }
            for e in &leftovers {
                tasks.push(Task {
                    spec: i,
                    seed: task_seed(global_seed, occ, &e.relpath),
                    work: Work::Copy(e.clone()),
                });
            }
        }
    }
    tasks
}
