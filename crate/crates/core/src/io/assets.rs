//! Optional external textures for the camera occlusions.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::camera::{BinaryMask, Plane, ScratchTexture};
use crate::error::{Error, Result};

/// Directories of user-provided masks; procedural shapes are used for any
/// that are unset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetDirs {
    pub dirt_patches: Option<PathBuf>,
    pub droplets: Option<PathBuf>,
    /// Sorted by file name from lightest to heaviest.
    pub scratches: Option<PathBuf>,
    pub soiling_masks: Option<PathBuf>,
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| ["png", "jpg", "jpeg"].contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!("{} holds no images", dir.display())));
    }
    Ok(files)
}

fn open(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|e| Error::Decode(format!("{}: {e}", path.display())))
}

/// Alpha plane in `[0, 1]`: the alpha channel when present, luminance otherwise.
fn alpha_plane(img: &image::DynamicImage) -> Plane {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = if img.color().has_alpha() {
        img.to_rgba8()
            .pixels()
            .map(|p| f64::from(p[3]) / 255.0)
            .collect()
    } else {
        img.to_luma8()
            .pixels()
            .map(|p| f64::from(p[0]) / 255.0)
            .collect()
    };
    Plane::new(w, h, data).expect("decoder dimensions are consistent")
}

/// Dirt patches or droplet shapes.
pub fn load_alpha_dir(dir: &Path) -> Result<Vec<Arc<Plane>>> {
    image_files(dir)?
        .iter()
        .map(|p| Ok(Arc::new(alpha_plane(&open(p)?))))
        .collect()
}

pub fn load_scratch_dir(dir: &Path) -> Result<Vec<Arc<ScratchTexture>>> {
    image_files(dir)?
        .iter()
        .map(|p| {
            let img = open(p)?;
            let rgb = img.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let color = std::array::from_fn(|c| {
                Plane::new(w, h, rgb.pixels().map(|px| f64::from(px[c])).collect())
                    .expect("decoder dimensions are consistent")
            });
            Ok(Arc::new(ScratchTexture::new(color, alpha_plane(&img))?))
        })
        .collect()
}

/// Grayscale masks thresholded at 128.
pub fn load_soiling_masks(dir: &Path) -> Result<Vec<Arc<BinaryMask>>> {
    image_files(dir)?
        .iter()
        .map(|p| {
            let g = open(p)?.to_luma8();
            let (w, h) = (g.width() as usize, g.height() as usize);
            Ok(Arc::new(BinaryMask::from_gray(w, h, g.as_raw(), 128)?))
        })
        .collect()
}
