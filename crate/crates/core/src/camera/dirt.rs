//! Lens dirt: three additive obstruction layers scattered over a 10x10 grid.

use std::sync::Arc;

use super::buffer::{quantize, AdditiveLayer, ImageBuffer, Plane};
use super::patch::{PatchShape, Placement};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const GRID_DIVISIONS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DirtConfig {
    /// Peak amplitude of layers M0, M1, M2 before brightness weighting and opacity.
    pub amplitudes: [f64; 3],
    /// Chance that a grid cell receives a patch, per layer.
    pub patch_probability: [f64; 3],
    /// Patch size relative to the cell.
    pub scale_range: (f64, f64),
    /// Floor of the brightness weight.
    pub min_weight: f64,
    /// Per-channel multiplier of the layer sum; `[1, 1, 1]` is neutral gray.
    pub tint: [f64; 3],
}

impl Default for DirtConfig {
    fn default() -> Self {
        Self {
            amplitudes: [40.0, 80.0, 120.0],
            patch_probability: [0.6, 0.4, 0.25],
            scale_range: (0.5, 1.5),
            min_weight: 0.25,
            tint: [1.0, 1.0, 1.0],
        }
    }
}

/// Half-open pixel rectangle of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl GridCell {
    pub fn width(&self) -> usize {
        self.x1 - self.x0
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0
    }
}

/// Splits the frame into a 10x10 grid, row by row. Cell borders sit at
/// `floor(i * extent / 10)`, so cells are equal when the extent divides by ten.
pub fn grid_cells(width: usize, height: usize) -> Vec<GridCell> {
    let edge = |i: usize, extent: usize| i * extent / GRID_DIVISIONS;
    let mut cells = Vec::with_capacity(GRID_DIVISIONS * GRID_DIVISIONS);
    for row in 0..GRID_DIVISIONS {
        for col in 0..GRID_DIVISIONS {
            cells.push(GridCell {
                x0: edge(col, width),
                y0: edge(row, height),
                x1: edge(col + 1, width),
                y1: edge(row + 1, height),
            });
        }
    }
    cells
}

/// `clamp(mean_luma / 255, min_weight, 1)`.
pub fn brightness_weight(mean_luma: f64, min_weight: f64) -> f64 {
    (mean_luma / 255.0).clamp(min_weight, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirtLayers {
    pub layers: [AdditiveLayer; 3],
}

impl DirtLayers {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            layers: std::array::from_fn(|_| AdditiveLayer::zeros(width, height)),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.layers[0].dims()
    }
}

/// Dirt layer generator with optional external patch textures.
#[derive(Debug, Clone, Default)]
pub struct DirtGenerator {
    pub config: DirtConfig,
    /// Alpha patches; procedural blobs are used when empty.
    pub textures: Vec<Arc<Plane>>,
}

impl DirtGenerator {
    pub fn new(config: DirtConfig, textures: Vec<Arc<Plane>>) -> Self {
        Self { config, textures }
    }

    pub fn generate(&self, img: &ImageBuffer, rng: &RngStream) -> DirtLayers {
        let (w, h) = img.dims();
        let cells = grid_cells(w, h);
        let weights: Vec<f64> = cells
            .iter()
            .map(|c| {
                brightness_weight(
                    img.mean_luminance(c.x0, c.y0, c.x1, c.y1),
                    self.config.min_weight,
                )
            })
            .collect();
        let mut out = DirtLayers::zeros(w, h);
        for (k, layer) in out.layers.iter_mut().enumerate() {
            let mut rng = rng.split(&format!("dirt-layer-{k}"));
            for (cell, &weight) in cells.iter().zip(&weights) {
                if cell.width() == 0 || cell.height() == 0 {
                    continue;
                }
                if !rng.bernoulli(self.config.patch_probability[k]) {
                    continue;
                }
                let shape = self.pick_shape(&mut rng);
                let (lo, hi) = self.config.scale_range;
                let scale = rng.uniform_range(lo, hi);
                let placement = Placement {
                    cx: rng.uniform_range(cell.x0 as f64, cell.x1 as f64),
                    cy: rng.uniform_range(cell.y0 as f64, cell.y1 as f64),
                    half_w: 0.5 * scale * cell.width() as f64 * rng.uniform_range(0.8, 1.25),
                    half_h: 0.5 * scale * cell.height() as f64 * rng.uniform_range(0.8, 1.25),
                    angle: rng.uniform_range(0.0, std::f64::consts::TAU),
                };
                let amplitude = self.config.amplitudes[k] * weight;
                placement.rasterize(&shape, w, h, |x, y, a| layer.raise(x, y, amplitude * a));
            }
        }
        out
    }

    fn pick_shape(&self, rng: &mut RngStream) -> PatchShape {
        if self.textures.is_empty() {
            PatchShape::random_blob(rng)
        } else {
            let i = rng.below(self.textures.len() as u64) as usize;
            PatchShape::Texture(Arc::clone(&self.textures[i]))
        }
    }

    pub fn apply(&self, img: &ImageBuffer, opacity: f64, rng: &RngStream) -> Result<ImageBuffer> {
        let layers = self.generate(img, rng);
        apply_dirt_layers(img, &layers, opacity, self.config.tint)
    }
}

/// Generates the three dirt layers with the default configuration.
pub fn generate_dirt_layers(img: &ImageBuffer, rng: &RngStream) -> DirtLayers {
    DirtGenerator::default().generate(img, rng)
}

/// `I' = clip(I + opacity * (M0 + M1 + M2), 0, 255)` per pixel and channel.
pub fn apply_dirt_layers(
    img: &ImageBuffer,
    layers: &DirtLayers,
    opacity: f64,
    tint: [f64; 3],
) -> Result<ImageBuffer> {
    if !(0.0..=1.0).contains(&opacity) {
        return Err(Error::param(
            "opacity",
            format!("{opacity} is outside [0, 1]"),
        ));
    }
    let (w, h) = img.dims();
    for layer in &layers.layers {
        layer.plane().expect_dims(w, h)?;
    }
    let [m0, m1, m2] = &layers.layers;
    let (m0, m1, m2) = (
        m0.plane().values(),
        m1.plane().values(),
        m2.plane().values(),
    );
    let mut data = Vec::with_capacity(w * h * 3);
    for (i, px) in img.as_bytes().chunks_exact(3).enumerate() {
        let sum = m0[i] + m1[i] + m2[i];
        for c in 0..3 {
            data.push(quantize(f64::from(px[c]) + opacity * sum * tint[c]));
        }
    }
    ImageBuffer::new(w, h, data)
}

/// Dirt with the default generator: layers are drawn from `rng`, then blended.
pub fn apply_dirt(img: &ImageBuffer, opacity: f64, rng: &RngStream) -> Result<ImageBuffer> {
    DirtGenerator::default().apply(img, opacity, rng)
}
