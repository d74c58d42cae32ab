//! Structural similarity on the luma plane.

use crate::camera::{ImageBuffer, Plane};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    /// Side of the Gaussian window; odd.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range of the pixel values.
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::param(
                "window",
                format!("{} must be odd", self.window),
            ));
        }
        if !(self.sigma > 0.0 && self.k1 > 0.0 && self.k2 > 0.0 && self.dynamic_range > 0.0) {
            return Err(Error::param("ssim", "sigma, K1, K2 and L must be positive"));
        }
        Ok(())
    }

    fn window_1d(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - r;
                (-(d * d) / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }
}

/// Weighted window sums over every position where the window fits entirely.
fn filter_valid(values: &[f64], w: usize, h: usize, g: &[f64]) -> Vec<f64> {
    let k = g.len();
    let (ow, oh) = (w + 1 - k, h + 1 - k);
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let src = &values[y * w..(y + 1) * w];
        for x in 0..ow {
            rows[y * ow + x] = g.iter().zip(&src[x..x + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (i, gw) in g.iter().enumerate() {
            let src = &rows[(y + i) * ow..(y + i + 1) * ow];
            for (dst, s) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *dst += gw * s;
            }
        }
    }
    out
}

/// Mean SSIM over the valid region of two luma planes.
pub fn ssim_planes(a: &Plane, b: &Plane, params: &SsimParams) -> Result<f64> {
    params.validate()?;
    if a.dims() != b.dims() {
        return Err(Error::Shape {
            expected: format!("{}x{}", a.width(), a.height()),
            actual: format!("{}x{}", b.width(), b.height()),
        });
    }
    let (w, h) = a.dims();
    if w < params.window || h < params.window {
        return Err(Error::Input(format!(
            "{w}x{h} image is smaller than the {0}x{0} SSIM window",
            params.window
        )));
    }
    let g = params.window_1d();
    let (x, y) = (a.values(), b.values());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let mu_x = filter_valid(x, w, h, &g);
    let mu_y = filter_valid(y, w, h, &g);
    let e_xx = filter_valid(&xx, w, h, &g);
    let e_yy = filter_valid(&yy, w, h, &g);
    let e_xy = filter_valid(&xy, w, h, &g);
    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total +=
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}

/// Mean SSIM between two RGB images, evaluated on luma.
pub fn ssim(clean: &ImageBuffer, degraded: &ImageBuffer, params: &SsimParams) -> Result<f64> {
    if clean.dims() != degraded.dims() {
        return Err(Error::Shape {
            expected: format!("{}x{}", clean.width(), clean.height()),
            actual: format!("{}x{}", degraded.width(), degraded.height()),
        });
    }
    ssim_planes(&clean.luma(), &degraded.luma(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn noisy(w: usize, h: usize, seed: u64) -> ImageBuffer {
        let mut rng = RngStream::new(seed);
        ImageBuffer::from_fn(w, h, |x, y| {
            let base = (x * 7 + y * 3) as f64 % 200.0;
            let v = (base + rng.uniform_range(0.0, 40.0)) as u8;
            [v, v / 2, 255 - v]
        })
        .unwrap()
    }

    #[test]
    fn self_similarity_and_symmetry() {
        let a = noisy(40, 30, 1);
        let b = noisy(40, 30, 2);
        let p = SsimParams::default();
        assert!((ssim(&a, &a, &p).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(ssim(&a, &b, &p).unwrap(), ssim(&b, &a, &p).unwrap());
    }

    #[test]
    fn inverted_image_scores_low() {
        let a = noisy(40, 30, 3);
        let inv = ImageBuffer::new(40, 30, a.as_bytes().iter().map(|v| 255 - v).collect()).unwrap();
        assert!(ssim(&a, &inv, &SsimParams::default()).unwrap() < 0.5);
    }

    #[test]
    fn shape_and_size_errors() {
        let p = SsimParams::default();
        assert!(matches!(
            ssim(&noisy(20, 20, 1), &noisy(21, 20, 1), &p),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            ssim(&noisy(10, 20, 1), &noisy(10, 20, 1), &p),
            Err(Error::Input(_))
        ));
    }
}
