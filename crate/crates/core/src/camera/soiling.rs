//! Soiling: a Gaussian-softened binary mask selects which content is blurred.

use super::buffer::{quantize, BinaryMask, ImageBuffer, Plane};
use super::kernel::{convolve, gaussian_kernel};
use super::patch::{PatchShape, Placement};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spec::{check_kernel_size, CANONICAL_SOILING_KERNELS};

/// Gaussian standard deviation for a soiling kernel of the given size (`size / 6`).
pub fn soiling_sigma(kernel_size: u32) -> f64 {
    f64::from(kernel_size) / 6.0
}

/// Applies soiling with a binary mask `M` (true = occluded):
///
/// ```text
/// M'        = G * M
/// I_blurred = G * (I ∘ M')
/// I'        = I ∘ (1 - M') + I_blurred
/// ```
pub fn apply_soiling(
    img: &ImageBuffer,
    mask: &BinaryMask,
    kernel_size: u32,
) -> Result<ImageBuffer> {
    check_kernel_size(kernel_size)?;
    if mask.dims() != img.dims() {
        return Err(Error::Shape {
            expected: format!("{}x{}", img.width(), img.height()),
            actual: format!("{}x{}", mask.dims().0, mask.dims().1),
        });
    }
    if mask.count() == 0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(kernel_size as usize, soiling_sigma(kernel_size))?;
    let soft = convolve(&mask.to_plane(), &kernel);
    let (w, h) = img.dims();
    let planes: [Plane; 3] = std::array::from_fn(|c| {
        let channel = img.channel(c);
        let mut masked = channel.clone();
        for (v, m) in masked.data.iter_mut().zip(&soft.data) {
            *v *= m;
        }
        let blurred = convolve(&masked, &kernel);
        let mut out = Plane::zeros(w, h);
        for (i, v) in out.data.iter_mut().enumerate() {
            *v = channel.data[i] * (1.0 - soft.data[i]) + blurred.data[i];
        }
        out
    });
    // Blurring M' a second time can push I_blurred past the unoccluded share
    // near mask edges, so the final write clips.
    let mut data = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        for p in &planes {
            data.push(quantize(p.data[i]));
        }
    }
    ImageBuffer::new(w, h, data)
}

/// Procedural soiling mask: a few large blobs, thresholded at half weight.
pub fn generate_soiling_mask(width: usize, height: usize, rng: &mut RngStream) -> BinaryMask {
    let mut weight = Plane::zeros(width, height);
    let side = width.min(height) as f64;
    let count = 2 + rng.below(4);
    for _ in 0..count {
        let shape = PatchShape::random_blob(rng);
        let radius = side * rng.uniform_range(0.15, 0.4);
        let placement = Placement {
            cx: rng.uniform_range(0.0, width as f64),
            cy: rng.uniform_range(0.0, height as f64),
            half_w: radius * rng.uniform_range(0.8, 1.6),
            half_h: radius,
            angle: rng.uniform_range(0.0, std::f64::consts::TAU),
        };
        placement.rasterize(&shape, width, height, |x, y, a| {
            if a > weight.get(x, y) {
                weight.set(x, y, a);
            }
        });
    }
    let cells = weight.values().iter().map(|&a| a >= 0.5).collect();
    BinaryMask::new(width, height, cells).expect("dimensions match")
}

/// One of the canonical kernel sizes, uniformly.
pub fn random_soiling_kernel(rng: &mut RngStream) -> u32 {
    CANONICAL_SOILING_KERNELS[rng.below(CANONICAL_SOILING_KERNELS.len() as u64) as usize]
}
