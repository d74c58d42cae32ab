//! Wet-lens blur: droplet-shaped directional convolution, then a convex
//! blend with a droplet overlay.

use std::sync::Arc;

use super::buffer::{AlphaMask, ImageBuffer, Plane};
use super::kernel::{convolve, gaussian_kernel, ConvKernel};
use super::patch::{PatchShape, Placement};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterBlurConfig {
    /// Side of the droplet blur kernel (odd).
    pub kernel_size: usize,
    /// Random scale applied to the droplet when rasterizing the kernel.
    pub scale_range: (f64, f64),
    /// Streak width relative to its length for procedural droplets.
    pub streak_aspect: f64,
    /// Inclusive range of droplets placed on the overlay.
    pub droplet_count: (u64, u64),
    /// Droplet radius as a fraction of the shorter image side.
    pub droplet_radius: (f64, f64),
    /// Share of white mixed into droplet color (light scattered by water).
    pub haze: f64,
    /// Blur applied to the scene to color droplets, relative to the longer side.
    pub droplet_blur: f64,
}

impl Default for WaterBlurConfig {
    fn default() -> Self {
        Self {
            kernel_size: 15,
            scale_range: (0.75, 1.5),
            streak_aspect: 0.35,
            droplet_count: (20, 60),
            droplet_radius: (0.02, 0.07),
            haze: 0.3,
            droplet_blur: 0.015,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct WaterBlurGenerator {
    pub config: WaterBlurConfig,
    /// Droplet alpha textures; procedural shapes are used when empty.
    pub droplets: Vec<Arc<Plane>>,
}

impl WaterBlurGenerator {
    pub fn new(config: WaterBlurConfig, droplets: Vec<Arc<Plane>>) -> Self {
        Self { config, droplets }
    }

    /// Droplet patch rasterized to `kernel_size`^2 with a random rotation in
    /// `[0, 360)` degrees and scale in `scale_range`, then normalized.
    pub fn droplet_kernel(&self, rng: &mut RngStream) -> Result<ConvKernel> {
        let k = self.config.kernel_size;
        if k == 0 || k.is_multiple_of(2) {
            return Err(Error::param("kernel_size", format!("{k} must be odd")));
        }
        let r = (k / 2) as f64;
        let (lo, hi) = self.config.scale_range;
        let scale = rng.uniform_range(lo, hi);
        let angle = rng.uniform_range(0.0, std::f64::consts::TAU);
        let (shape, half_w, half_h) = match self.pick_texture(rng) {
            Some(tex) => {
                let s = 0.6 * r * scale;
                (PatchShape::Texture(tex), s, s)
            }
            None => {
                let s = 0.6 * r * scale;
                (
                    PatchShape::SoftDisc { inner: 0.2 },
                    s,
                    s * self.config.streak_aspect,
                )
            }
        };
        let mut weights = Plane::zeros(k, k);
        Placement {
            cx: r,
            cy: r,
            half_w: half_w.max(0.5),
            half_h: half_h.max(0.5),
            angle,
        }
        .rasterize(&shape, k, k, |x, y, a| weights.set(x, y, a));
        match ConvKernel::new(k, weights.data) {
            Ok(kernel) => Ok(kernel),
            Err(_) => ConvKernel::identity(k),
        }
    }

    /// Union of randomly placed, scaled droplet shapes.
    pub fn droplet_mask(&self, width: usize, height: usize, rng: &mut RngStream) -> AlphaMask {
        let mut mask = AlphaMask::zeros(width, height);
        let (cmin, cmax) = self.config.droplet_count;
        let count = cmin + rng.below(cmax.saturating_sub(cmin) + 1);
        let side = width.min(height) as f64;
        for _ in 0..count {
            let (rmin, rmax) = self.config.droplet_radius;
            let radius = side * rng.uniform_range(rmin, rmax);
            let shape = match self.pick_texture(rng) {
                Some(tex) => PatchShape::Texture(tex),
                None => PatchShape::SoftDisc {
                    inner: rng.uniform_range(0.3, 0.7),
                },
            };
            let placement = Placement {
                cx: rng.uniform_range(0.0, width as f64),
                cy: rng.uniform_range(0.0, height as f64),
                half_w: radius,
                half_h: radius * rng.uniform_range(0.7, 1.3),
                angle: rng.uniform_range(0.0, std::f64::consts::TAU),
            };
            placement.rasterize(&shape, width, height, |x, y, a| mask.raise(x, y, a));
        }
        mask
    }

    fn pick_texture(&self, rng: &mut RngStream) -> Option<Arc<Plane>> {
        if self.droplets.is_empty() {
            None
        } else {
            let i = rng.below(self.droplets.len() as u64) as usize;
            Some(Arc::clone(&self.droplets[i]))
        }
    }

    /// Overlay `O`: droplet color where droplets sit, the blurred scene elsewhere.
    pub fn overlay(
        &self,
        img: &ImageBuffer,
        blurred: &[Plane; 3],
        droplets: &AlphaMask,
    ) -> Result<ImageBuffer> {
        let (w, h) = img.dims();
        let sigma = (self.config.droplet_blur * w.max(h) as f64).max(0.5);
        let size = (2.0 * (3.0 * sigma).ceil() + 1.0) as usize;
        let big = gaussian_kernel(size.max(3), sigma)?;
        let haze = self.config.haze;
        let planes: [Plane; 3] = std::array::from_fn(|c| {
            let smooth = convolve(&img.channel(c), &big);
            let mut out = Plane::zeros(w, h);
            for (i, v) in out.data.iter_mut().enumerate() {
                let a = droplets.plane().data[i];
                let color = (1.0 - haze) * smooth.data[i] + haze * 255.0;
                *v = a * color + (1.0 - a) * blurred[c].data[i];
            }
            out
        });
        ImageBuffer::from_planes(&planes)
    }

    pub fn apply(&self, img: &ImageBuffer, opacity: f64, rng: &RngStream) -> Result<ImageBuffer> {
        check_opacity(opacity)?;
        let mut krng = rng.split("water-kernel");
        let mut drng = rng.split("water-droplets");
        let kernel = self.droplet_kernel(&mut krng)?;
        let (w, h) = img.dims();
        let droplets = self.droplet_mask(w, h, &mut drng);
        let blurred = blur_channels(img, &kernel);
        let overlay = self.overlay(img, &blurred, &droplets)?;
        let out = convex_blend(&blurred, &overlay, |_| opacity)?;
        ImageBuffer::from_planes(&out)
    }
}

fn check_opacity(opacity: f64) -> Result<()> {
    if (0.0..=1.0).contains(&opacity) {
        Ok(())
    } else {
        Err(Error::param(
            "opacity",
            format!("{opacity} is outside [0, 1]"),
        ))
    }
}

/// Per-channel convolution `Ĩ_c = I_c * K`.
pub fn blur_channels(img: &ImageBuffer, kernel: &ConvKernel) -> [Plane; 3] {
    std::array::from_fn(|c| convolve(&img.channel(c), kernel))
}

/// `(1 - w) * base + w * overlay` per pixel, with `w` given per pixel index.
/// Returns unquantized planes so callers can check the range directly.
pub fn convex_blend(
    base: &[Plane; 3],
    overlay: &ImageBuffer,
    weight: impl Fn(usize) -> f64,
) -> Result<[Plane; 3]> {
    let (w, h) = overlay.dims();
    for p in base {
        p.expect_dims(w, h)?;
    }
    let over = overlay.as_bytes();
    Ok(std::array::from_fn(|c| {
        let mut out = Plane::zeros(w, h);
        for (i, v) in out.data.iter_mut().enumerate() {
            let a = weight(i);
            *v = (1.0 - a) * base[c].data[i] + a * f64::from(over[i * 3 + c]);
        }
        out
    }))
}

/// Water blur with an explicit kernel and overlay.
pub fn apply_water_blur_with(
    img: &ImageBuffer,
    kernel: &ConvKernel,
    overlay: &ImageBuffer,
    opacity: f64,
) -> Result<ImageBuffer> {
    check_opacity(opacity)?;
    if overlay.dims() != img.dims() {
        return Err(Error::Shape {
            expected: format!("{}x{}", img.width(), img.height()),
            actual: format!("{}x{}", overlay.width(), overlay.height()),
        });
    }
    let blurred = blur_channels(img, kernel);
    ImageBuffer::from_planes(&convex_blend(&blurred, overlay, |_| opacity)?)
}

/// Water blur with the default generator and procedural droplets.
pub fn apply_water_blur(img: &ImageBuffer, opacity: f64, rng: &RngStream) -> Result<ImageBuffer> {
    WaterBlurGenerator::default().apply(img, opacity, rng)
}
