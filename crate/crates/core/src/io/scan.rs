use std::path::Path;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::pointcloud::RadarChannel;
use crate::spec::Modality;

const SPLITS: [&str; 2] = ["samples", "sweeps"];

/// One sensor file found under `samples/` or `sweeps/`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub modality: Modality,
    pub channel: String,
    /// Forward-slash path relative to the dataset root.
    pub relpath: String,
    pub len: u64,
}

impl DatasetEntry {
    /// `samples` or `sweeps`.
    pub fn split(&self) -> &str {
        self.relpath.split('/').next().unwrap_or_default()
    }

    pub fn file_name(&self) -> &str {
        self.relpath.rsplit('/').next().unwrap_or_default()
    }
}

/// Modality of a channel directory name, if it is one we know.
pub fn classify_channel(dir: &str) -> Option<Modality> {
    if dir.starts_with("CAM_") {
        Some(Modality::Camera)
    } else if RadarChannel::from_channel_dir(dir).is_some() {
        Some(Modality::Radar)
    } else if dir.starts_with("LIDAR_") {
        Some(Modality::Lidar)
    } else {
        None
    }
}

fn has_extension(modality: Modality, name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    match modality {
        Modality::Camera => [".jpg", ".jpeg", ".png"].iter().any(|e| lower.ends_with(e)),
        Modality::Radar => lower.ends_with(".pcd"),
        Modality::Lidar => lower.ends_with(".bin"),
    }
}

/// Lists sensor files of the requested modalities (all when `filter` is
/// empty), sorted by relative path.
pub fn scan_dataset(root: &Path, filter: &[Modality]) -> Result<Vec<DatasetEntry>> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "dataset root is not a directory",
            ),
        ));
    }
    let mut out = Vec::new();
    for split in SPLITS {
        let split_dir = root.join(split);
        if !split_dir.is_dir() {
            continue;
        }
        let mut channels: Vec<_> = std::fs::read_dir(&split_dir)
            .map_err(|e| Error::io(&split_dir, e))?
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(&split_dir, e))?;
        channels.sort_by_key(|d| d.file_name());
        for ch in channels {
            let name = ch.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') || !ch.path().is_dir() {
                continue;
            }
            let Some(modality) = classify_channel(&name) else {
                log::warn!("skipping unknown channel directory {split}/{name}");
                continue;
            };
            if !filter.is_empty() && !filter.contains(&modality) {
                continue;
            }
            for item in WalkDir::new(ch.path()).min_depth(1).sort_by_file_name() {
                let item = item.map_err(|e| {
                    let path = e.path().unwrap_or(root).to_path_buf();
                    Error::io(path, e.into())
                })?;
                let file = item.file_name().to_string_lossy();
                if !item.file_type().is_file()
                    || file.starts_with('.')
                    || !has_extension(modality, &file)
                {
                    continue;
                }
                let rel = item
                    .path()
                    .strip_prefix(root)
                    .expect("walk stays under root")
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/");
                let len = item
                    .metadata()
                    .map_err(|e| Error::io(item.path(), e.into()))?
                    .len();
                out.push(DatasetEntry {
                    modality,
                    channel: name.clone(),
                    relpath: rel,
                    len,
                });
            }
        }
    }
    out.sort_by(|a, b| a.relpath.cmp(&b.relpath));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn touch(root: &Path, rel: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, b"x").unwrap();
    }

    #[test]
    fn single_camera_entry() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "samples/CAM_FRONT/a.jpg");
        let e = scan_dataset(dir.path(), &[]).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].modality, Modality::Camera);
        assert_eq!(e[0].relpath, "samples/CAM_FRONT/a.jpg");
        assert_eq!(e[0].len, 1);
    }

    #[test]
    fn empty_and_missing_roots() {
        let dir = tempfile::tempdir().unwrap();
        assert!(scan_dataset(dir.path(), &[]).unwrap().is_empty());
        assert!(matches!(
            scan_dataset(&dir.path().join("nope"), &[]),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn unknown_channels_and_filters() {
        let dir = tempfile::tempdir().unwrap();
        touch(dir.path(), "samples/RADAR_TOP/a.pcd");
        touch(dir.path(), "samples/RADAR_FRONT/a.pcd");
        touch(dir.path(), "sweeps/LIDAR_TOP/b.pcd.bin");
        touch(dir.path(), "sweeps/LIDAR_TOP/.b.pcd.bin.tmp1");
        touch(dir.path(), "maps/x.png");
        let all = scan_dataset(dir.path(), &[]).unwrap();
        assert_eq!(
            all.iter().map(|e| e.relpath.as_str()).collect::<Vec<_>>(),
            vec!["samples/RADAR_FRONT/a.pcd", "sweeps/LIDAR_TOP/b.pcd.bin"]
        );
        assert_eq!(
            scan_dataset(dir.path(), &[Modality::Lidar]).unwrap().len(),
            1
        );
    }
}
