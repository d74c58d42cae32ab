//! Patch shapes and their placement on a raster.
//!
//! Shapes are sampled in local coordinates `(u, v)` in `[-1, 1]^2`; a
//! [`Placement`] maps that square onto the image with a center, half extents
//! and a rotation.

use std::sync::Arc;

use super::buffer::Plane;
use crate::rng::RngStream;

fn smoothstep(edge0: f64, edge1: f64, x: f64) -> f64 {
    let t = ((x - edge0) / (edge1 - edge0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatchShape {
    /// Irregular blob: a sum of Gaussian bumps, thresholded with a soft edge.
    Blob { bumps: Vec<(f64, f64, f64)> },
    /// Disc that is opaque inside `inner` and fades to zero at the unit circle.
    SoftDisc { inner: f64 },
    /// Externally supplied alpha texture with values in `[0, 1]`.
    Texture(Arc<Plane>),
}

impl PatchShape {
    /// Procedural dirt blob with 3-6 bumps.
    pub fn random_blob(rng: &mut RngStream) -> Self {
        let n = 3 + rng.below(4) as usize;
        let bumps = (0..n)
            .map(|_| {
                let r = rng.uniform_range(0.0, 0.45);
                let t = rng.uniform_range(0.0, std::f64::consts::TAU);
                (r * t.cos(), r * t.sin(), rng.uniform_range(0.25, 0.5))
            })
            .collect();
        PatchShape::Blob { bumps }
    }

    pub fn sample(&self, u: f64, v: f64) -> f64 {
        match self {
            PatchShape::Blob { bumps } => {
                let field: f64 = bumps
                    .iter()
                    .map(|&(cx, cy, r)| {
                        let d2 = (u - cx).powi(2) + (v - cy).powi(2);
                        (-d2 / (r * r)).exp()
                    })
                    .sum();
                let edge = 1.0 - smoothstep(0.85, 1.0, u.abs().max(v.abs()));
                smoothstep(0.45, 0.75, field) * edge
            }
            PatchShape::SoftDisc { inner } => {
                let r = (u * u + v * v).sqrt();
                1.0 - smoothstep(*inner, 1.0, r)
            }
            PatchShape::Texture(tex) => {
                let (tw, th) = tex.dims();
                let x = (u + 1.0) * 0.5 * tw as f64 - 0.5;
                let y = (v + 1.0) * 0.5 * th as f64 - 0.5;
                tex.sample_bilinear(x, y).clamp(0.0, 1.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub cx: f64,
    pub cy: f64,
    pub half_w: f64,
    pub half_h: f64,
    /// Radians, counter-clockwise in image coordinates.
    pub angle: f64,
}

impl Placement {
    /// Calls `f(x, y, alpha)` for every pixel the shape covers with nonzero weight.
    pub fn rasterize(
        &self,
        shape: &PatchShape,
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize, f64),
    ) {
        if self.half_w <= 0.0 || self.half_h <= 0.0 {
            return;
        }
        let reach = self.half_w.hypot(self.half_h);
        let x0 = (self.cx - reach).floor().max(0.0) as usize;
        let y0 = (self.cy - reach).floor().max(0.0) as usize;
        let x1 = ((self.cx + reach).ceil() + 1.0).clamp(0.0, width as f64) as usize;
        let y1 = ((self.cy + reach).ceil() + 1.0).clamp(0.0, height as f64) as usize;
        let (sin, cos) = self.angle.sin_cos();
        for y in y0..y1 {
            for x in x0..x1 {
                let dx = x as f64 - self.cx;
                let dy = y as f64 - self.cy;
                let u = (dx * cos + dy * sin) / self.half_w;
                let v = (-dx * sin + dy * cos) / self.half_h;
                if u.abs() > 1.0 || v.abs() > 1.0 {
                    continue;
                }
                let a = shape.sample(u, v);
                if a > 0.0 {
                    f(x, y, a);
                }
            }
        }
    }
}
