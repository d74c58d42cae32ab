//! Lens scratches: per-pixel alpha blending of a scratch texture.

use std::sync::Arc;

use super::buffer::{AlphaMask, ImageBuffer, OverlayLayer, Plane};
use super::water::convex_blend;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spec::Severity;

/// Background-free scratch texture (color plus alpha) at its native size.
#[derive(Debug, Clone, PartialEq)]
pub struct ScratchTexture {
    pub color: [Plane; 3],
    pub alpha: Plane,
}

impl ScratchTexture {
    pub fn new(color: [Plane; 3], alpha: Plane) -> Result<Self> {
        let (w, h) = alpha.dims();
        for p in &color {
            p.expect_dims(w, h)?;
        }
        Ok(Self { color, alpha })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.alpha.dims()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScratchConfig {
    pub color: [u8; 3],
    /// Number of procedural scratches for light, moderate and heavy.
    pub counts: [usize; 3],
    /// Half width of a scratch line in pixels.
    pub half_width: (f64, f64),
    pub peak_alpha: (f64, f64),
    pub segments: (u64, u64),
    /// Segment length as a fraction of the frame diagonal.
    pub segment_length: (f64, f64),
}

impl Default for ScratchConfig {
    fn default() -> Self {
        Self {
            color: [225, 225, 225],
            counts: [6, 14, 28],
            half_width: (0.6, 2.0),
            peak_alpha: (0.5, 0.9),
            segments: (3, 8),
            segment_length: (0.03, 0.12),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScratchGenerator {
    pub config: ScratchConfig,
    /// Textures ordered from lightest to heaviest; procedural lines when empty.
    pub textures: Vec<Arc<ScratchTexture>>,
}

impl ScratchGenerator {
    pub fn new(config: ScratchConfig, textures: Vec<Arc<ScratchTexture>>) -> Self {
        Self { config, textures }
    }

    pub fn overlay(
        &self,
        width: usize,
        height: usize,
        severity: Severity,
        rng: &mut RngStream,
    ) -> Result<OverlayLayer> {
        if self.textures.is_empty() {
            return self.procedural(width, height, severity, rng);
        }
        let bucket = severity_bucket(self.textures.len(), severity);
        let i = bucket.start + rng.below(bucket.len() as u64) as usize;
        fit_texture(&self.textures[i], width, height, rng)
    }

    /// Random thin polylines with a quadratic alpha falloff across their width.
    pub fn procedural(
        &self,
        width: usize,
        height: usize,
        severity: Severity,
        rng: &mut RngStream,
    ) -> Result<OverlayLayer> {
        let cfg = &self.config;
        let mut alpha = AlphaMask::zeros(width, height);
        let diag = (width as f64).hypot(height as f64);
        for _ in 0..cfg.counts[severity as usize] {
            let half_w = rng.uniform_range(cfg.half_width.0, cfg.half_width.1);
            let peak = rng.uniform_range(cfg.peak_alpha.0, cfg.peak_alpha.1);
            let mut x = rng.uniform_range(0.0, width as f64);
            let mut y = rng.uniform_range(0.0, height as f64);
            let mut heading = rng.uniform_range(0.0, std::f64::consts::TAU);
            let n = cfg.segments.0 + rng.below(cfg.segments.1 - cfg.segments.0 + 1);
            for _ in 0..n {
                let len = diag * rng.uniform_range(cfg.segment_length.0, cfg.segment_length.1);
                heading += rng.uniform_range(-0.35, 0.35);
                let nx = x + len * heading.cos();
                let ny = y + len * heading.sin();
                stroke_segment(&mut alpha, (x, y), (nx, ny), half_w, peak);
                x = nx;
                y = ny;
            }
        }
        OverlayLayer::new(ImageBuffer::filled(width, height, cfg.color)?, alpha)
    }
}

fn severity_bucket(n: usize, severity: Severity) -> std::ops::Range<usize> {
    if n < 3 {
        return 0..n;
    }
    let i = severity as usize;
    (i * n / 3)..((i + 1) * n / 3)
}

fn stroke_segment(alpha: &mut AlphaMask, a: (f64, f64), b: (f64, f64), half_w: f64, peak: f64) {
    let (w, h) = alpha.dims();
    let x0 = (a.0.min(b.0) - half_w - 1.0).floor().max(0.0) as usize;
    let y0 = (a.1.min(b.1) - half_w - 1.0).floor().max(0.0) as usize;
    let x1 = ((a.0.max(b.0) + half_w + 1.0).ceil().max(0.0) as usize).min(w);
    let y1 = ((a.1.max(b.1) + half_w + 1.0).ceil().max(0.0) as usize).min(h);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    for y in y0..y1 {
        for x in x0..x1 {
            let (px, py) = (x as f64 - a.0, y as f64 - a.1);
            let t = if len2 > 0.0 {
                ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let d = (px - t * dx).hypot(py - t * dy);
            if d < half_w {
                let f = 1.0 - d / half_w;
                alpha.raise(x, y, peak * f * f);
            }
        }
    }
}

/// Scales a texture to cover the frame, crops at a random offset and applies
/// random horizontal/vertical flips (both flips give a 180 degree rotation).
pub fn fit_texture(
    texture: &ScratchTexture,
    width: usize,
    height: usize,
    rng: &mut RngStream,
) -> Result<OverlayLayer> {
    let (tw, th) = texture.dims();
    if tw == 0 || th == 0 {
        return Err(Error::Input("empty scratch texture".into()));
    }
    let scale = (width as f64 / tw as f64).max(height as f64 / th as f64);
    let ox = rng.uniform_range(0.0, (tw as f64 * scale - width as f64).max(0.0));
    let oy = rng.uniform_range(0.0, (th as f64 * scale - height as f64).max(0.0));
    let flip_x = rng.bernoulli(0.5);
    let flip_y = rng.bernoulli(0.5);
    let mut color = vec![0u8; width * height * 3];
    let mut alpha = Plane::zeros(width, height);
    for y in 0..height {
        for x in 0..width {
            let mut sx = (x as f64 + 0.5 + ox) / scale - 0.5;
            let mut sy = (y as f64 + 0.5 + oy) / scale - 0.5;
            sx = sx.clamp(0.0, (tw - 1) as f64);
            sy = sy.clamp(0.0, (th - 1) as f64);
            if flip_x {
                sx = (tw - 1) as f64 - sx;
            }
            if flip_y {
                sy = (th - 1) as f64 - sy;
            }
            alpha.set(x, y, texture.alpha.sample_bilinear(sx, sy).clamp(0.0, 1.0));
            for c in 0..3 {
                color[(y * width + x) * 3 + c] =
                    super::buffer::quantize(texture.color[c].sample_bilinear(sx, sy));
            }
        }
    }
    OverlayLayer::new(
        ImageBuffer::new(width, height, color)?,
        AlphaMask::new(alpha)?,
    )
}

/// `I' = (1 - α(x, y)) I + α(x, y) S` per pixel.
pub fn apply_scratch(img: &ImageBuffer, overlay: &OverlayLayer) -> Result<ImageBuffer> {
    if overlay.dims() != img.dims() {
        return Err(Error::Shape {
            expected: format!("{}x{}", img.width(), img.height()),
            actual: format!("{}x{}", overlay.dims().0, overlay.dims().1),
        });
    }
    let alpha = overlay.alpha.plane().values();
    let planes = convex_blend(&img.channels(), &overlay.color, |i| alpha[i])?;
    ImageBuffer::from_planes(&planes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img() -> ImageBuffer {
        ImageBuffer::from_fn(12, 8, |x, y| [(x * 20) as u8, (y * 30) as u8, 77]).unwrap()
    }

    #[test]
    fn zero_alpha_identity() {
        let i = img();
        let o = OverlayLayer::new(
            ImageBuffer::filled(12, 8, [255; 3]).unwrap(),
            AlphaMask::zeros(12, 8),
        )
        .unwrap();
        assert_eq!(apply_scratch(&i, &o).unwrap(), i);
    }

    #[test]
    fn unit_alpha_takes_texture() {
        let i = img();
        let mut a = Plane::zeros(12, 8);
        a.set(3, 2, 1.0);
        let o = OverlayLayer::new(
            ImageBuffer::filled(12, 8, [10, 20, 30]).unwrap(),
            AlphaMask::new(a).unwrap(),
        )
        .unwrap();
        let out = apply_scratch(&i, &o).unwrap();
        assert_eq!(out.pixel(3, 2), [10, 20, 30]);
        assert_eq!(out.pixel(4, 2), i.pixel(4, 2));
    }

    #[test]
    fn half_alpha_hand_value() {
        let i = ImageBuffer::filled(2, 2, [100; 3]).unwrap();
        let o = OverlayLayer::new(
            ImageBuffer::filled(2, 2, [200; 3]).unwrap(),
            AlphaMask::constant(2, 2, 0.5).unwrap(),
        )
        .unwrap();
        assert!(apply_scratch(&i, &o)
            .unwrap()
            .as_bytes()
            .iter()
            .all(|&v| v == 150));
    }

    #[test]
    fn shape_mismatch() {
        let o = OverlayLayer::new(
            ImageBuffer::filled(3, 3, [0; 3]).unwrap(),
            AlphaMask::zeros(3, 3),
        )
        .unwrap();
        assert!(matches!(
            apply_scratch(&img(), &o),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn procedural_density_grows_with_severity() {
        let g = ScratchGenerator::default();
        let coverage = |s| {
            let o = g.overlay(200, 120, s, &mut RngStream::new(4)).unwrap();
            o.alpha.plane().values().iter().sum::<f64>()
        };
        assert!(coverage(Severity::Light) < coverage(Severity::Heavy));
    }

    #[test]
    fn texture_fit_covers_frame() {
        let tex = ScratchTexture::new(
            [
                Plane::constant(4, 2, 255.0),
                Plane::constant(4, 2, 0.0),
                Plane::constant(4, 2, 0.0),
            ],
            Plane::constant(4, 2, 0.5),
        )
        .unwrap();
        let o = fit_texture(&tex, 10, 10, &mut RngStream::new(1)).unwrap();
        assert_eq!(o.dims(), (10, 10));
        assert!(o
            .alpha
            .plane()
            .values()
            .iter()
            .all(|&a| (a - 0.5).abs() < 1e-12));
        assert_eq!(o.color.pixel(9, 9), [255, 0, 0]);
    }

    #[test]
    fn buckets_partition_textures() {
        assert_eq!(severity_bucket(9, Severity::Light), 0..3);
        assert_eq!(severity_bucket(9, Severity::Heavy), 6..9);
        assert_eq!(severity_bucket(2, Severity::Moderate), 0..2);
    }
}
