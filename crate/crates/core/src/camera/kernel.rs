//! Normalized convolution kernels and replicate-padded 2-D convolution.

use rayon::prelude::*;

use super::buffer::Plane;
use crate::error::{Error, Result};

/// Odd-sized square kernel whose weights sum to one.
///
/// `weights[(v + r) * size + (u + r)]` holds `K(u, v)` for offsets
/// `u, v` in `[-r, r]`, `u` along x.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    size: usize,
    weights: Vec<f64>,
    /// 1-D factor `g` with `K(u, v) = g(u) g(v)`, when the kernel is separable.
    factor: Option<Vec<f64>>,
}

impl ConvKernel {
    /// Builds a kernel from raw nonnegative weights and normalizes it.
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::param("kernel_size", format!("{size} must be odd")));
        }
        if weights.len() != size * size {
            return Err(Error::Shape {
                expected: format!("{} weights", size * size),
                actual: format!("{}", weights.len()),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::param(
                "kernel",
                "weights must be finite and nonnegative",
            ));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::param("kernel", "weights sum to zero"));
        }
        Ok(Self {
            size,
            weights: weights.into_iter().map(|w| w / sum).collect(),
            factor: None,
        })
    }

    /// Single unit weight at the center.
    pub fn identity(size: usize) -> Result<Self> {
        let mut w = vec![0.0; size * size];
        if size % 2 == 1 {
            w[size * size / 2] = 1.0;
        }
        Self::new(size, w)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `K(u, v)` for signed offsets.
    pub fn at(&self, u: isize, v: isize) -> f64 {
        let r = self.radius() as isize;
        self.weights[((v + r) as usize) * self.size + (u + r) as usize]
    }

    pub fn is_separable(&self) -> bool {
        self.factor.is_some()
    }
}

/// Sampled 2-D Gaussian with standard deviation `sigma` pixels, normalized.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<ConvKernel> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(Error::param(
            "kernel_size",
            format!("{size} must be odd and at least 3"),
        ));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", format!("{sigma} must be positive")));
    }
    let r = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    let g: Vec<f64> = raw.into_iter().map(|v| v / sum).collect();
    let mut weights = Vec::with_capacity(size * size);
    for gv in &g {
        for gu in &g {
            weights.push(gu * gv);
        }
    }
    Ok(ConvKernel {
        size,
        weights,
        factor: Some(g),
    })
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// `out(x, y) = sum_{u,v} src(x - u, y - v) K(u, v)` with replicate-edge padding.
pub fn convolve(src: &Plane, kernel: &ConvKernel) -> Plane {
    match &kernel.factor {
        Some(g) => convolve_separable(src, g),
        None => convolve_dense(src, kernel),
    }
}

fn convolve_dense(src: &Plane, kernel: &ConvKernel) -> Plane {
    let (w, h) = src.dims();
    let r = kernel.radius() as isize;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, dst) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for v in -r..=r {
                let sy = clamp_index(y as isize - v, h);
                for u in -r..=r {
                    let k = kernel.at(u, v);
                    if k != 0.0 {
                        acc += src.get(clamp_index(x as isize - u, w), sy) * k;
                    }
                }
            }
            *dst = acc;
        }
    });
    Plane::new(w, h, out).expect("dimensions preserved")
}

fn convolve_separable(src: &Plane, g: &[f64]) -> Plane {
    let (w, h) = src.dims();
    let r = (g.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    tmp.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, dst) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, gw) in g.iter().enumerate() {
                let u = i as isize - r;
                acc += src.get(clamp_index(x as isize - u, w), y) * gw;
            }
            *dst = acc;
        }
    });
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (i, gw) in g.iter().enumerate() {
            let v = i as isize - r;
            let sy = clamp_index(y as isize - v, h);
            let src_row = &tmp[sy * w..(sy + 1) * w];
            for (dst, s) in row.iter_mut().zip(src_row) {
                *dst += s * gw;
            }
        }
    });
    Plane::new(w, h, out).expect("dimensions preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_normalized_and_symmetric() {
        for (size, sigma) in [(3, 0.5), (5, 1.0), (15, 2.5), (51, 8.5), (251, 251.0 / 6.0)] {
            let k = gaussian_kernel(size, sigma).unwrap();
            let sum: f64 = k.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "size {size}: {sum}");
            let r = k.radius() as isize;
            for v in -r..=r {
                for u in -r..=r {
                    let w = k.at(u, v);
                    assert!((w - k.at(v, -u)).abs() < 1e-15);
                    assert!((w - k.at(-u, v)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn tiny_sigma_collapses_to_center() {
        let k = gaussian_kernel(3, 1e-3).unwrap();
        assert!((k.at(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn center_dominates() {
        let k = gaussian_kernel(5, 1.0).unwrap();
        let c = k.at(0, 0);
        for v in -2..=2isize {
            for u in -2..=2isize {
                if (u, v) != (0, 0) {
                    assert!(c > k.at(u, v));
                }
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(1, 1.0).is_err());
        assert!(gaussian_kernel(5, 0.0).is_err());
        assert!(ConvKernel::new(3, vec![0.0; 9]).is_err());
    }

    #[test]
    fn identity_convolution() {
        let p = Plane::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(convolve(&p, &ConvKernel::identity(5).unwrap()), p);
    }

    #[test]
    fn constants_preserved() {
        let p = Plane::constant(7, 5, 42.0);
        let k = gaussian_kernel(9, 2.0).unwrap();
        assert!(convolve(&p, &k)
            .values()
            .iter()
            .all(|v| (v - 42.0).abs() < 1e-9));
    }

    #[test]
    fn true_convolution_orientation() {
        // K(1, 0) = 1 shifts content right: out(x) = src(x - 1).
        let mut w = vec![0.0; 9];
        w[5] = 1.0;
        let k = ConvKernel::new(3, w).unwrap();
        let p = Plane::new(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(convolve(&p, &k).values(), &[1.0, 1.0, 2.0]);
    }

    #[test]
    fn separable_matches_dense() {
        let p = Plane::new(9, 6, (0..54).map(|i| ((i * 37) % 11) as f64).collect()).unwrap();
        let k = gaussian_kernel(5, 1.3).unwrap();
        let dense = ConvKernel::new(5, k.weights().to_vec()).unwrap();
        let a = convolve(&p, &k);
        let b = convolve(&p, &dense);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
