use crate::error::{Error, Result};

/// Converts a real intensity to a stored pixel: round half away from zero, then clip.
#[inline]
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Shape {
            expected: "non-empty image".into(),
            actual: format!("{width}x{height}"),
        });
    }
    Ok(())
}

/// 8-bit interleaved RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::Shape {
                expected: format!("{} bytes for {width}x{height} RGB", width * height * 3),
                actual: format!("{} bytes", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// One color channel as a real-valued plane.
    pub fn channel(&self, c: usize) -> Plane {
        assert!(c < 3);
        Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .skip(c)
                .step_by(3)
                .map(|&v| f64::from(v))
                .collect(),
        }
    }

    pub fn channels(&self) -> [Plane; 3] {
        [self.channel(0), self.channel(1), self.channel(2)]
    }

    /// Quantizes three real planes back into an image.
    pub fn from_planes(planes: &[Plane; 3]) -> Result<Self> {
        let (w, h) = planes[0].dims();
        for p in &planes[1..] {
            p.expect_dims(w, h)?;
        }
        check_dims(w, h)?;
        let mut data = Vec::with_capacity(w * h * 3);
        for i in 0..w * h {
            for p in planes {
                data.push(quantize(p.data[i]));
            }
        }
        Ok(Self {
            width: w,
            height: h,
            data,
        })
    }

    /// Mean of (R+G+B)/3 over the half-open pixel rectangle.
    pub fn mean_luminance(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in y0..y1 {
            for x in x0..x1 {
                let [r, g, b] = self.pixel(x, y);
                sum += (f64::from(r) + f64::from(g) + f64::from(b)) / 3.0;
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Rec. 601 luma plane.
    pub fn luma(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .chunks_exact(3)
                .map(|p| {
                    0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])
                })
                .collect(),
        }
    }
}

/// Real-valued single-channel raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    pub(crate) data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape {
                expected: format!("{} samples", width * height),
                actual: format!("{}", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0)
    }

    pub fn constant(width: usize, height: usize, v: f64) -> Self {
        Self {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn expect_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.dims() != (width, height) {
            return Err(Error::Shape {
                expected: format!("{width}x{height}"),
                actual: format!("{}x{}", self.width, self.height),
            });
        }
        Ok(())
    }

    /// Bilinear sample at fractional pixel coordinates; zero outside the raster.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        if !(x > -1.0 && y > -1.0 && x < self.width as f64 && y < self.height as f64) {
            return 0.0;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let at = |xi: f64, yi: f64| -> f64 {
            if xi < 0.0 || yi < 0.0 || xi >= self.width as f64 || yi >= self.height as f64 {
                0.0
            } else {
                self.get(xi as usize, yi as usize)
            }
        };
        let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1.0, y0) * fx;
        let bottom = at(x0, y0 + 1.0) * (1.0 - fx) + at(x0 + 1.0, y0 + 1.0) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Per-pixel blend weight in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMask(Plane);

impl AlphaMask {
    pub fn new(plane: Plane) -> Result<Self> {
        if let Some(bad) = plane.data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(
                "alpha",
                format!("weight {bad} outside [0, 1]"),
            ));
        }
        Ok(Self(plane))
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self(Plane::zeros(width, height))
    }

    pub fn constant(width: usize, height: usize, a: f64) -> Result<Self> {
        Self::new(Plane::constant(width, height, a))
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    /// Raises the weight at a pixel to `a` if it is larger (union of shapes).
    pub(crate) fn raise(&mut self, x: usize, y: usize, a: f64) {
        let a = a.clamp(0.0, 1.0);
        let i = y * self.0.width + x;
        if a > self.0.data[i] {
            self.0.data[i] = a;
        }
    }
}

/// Nonnegative intensity contribution on the 0-255 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveLayer(Plane);

impl AdditiveLayer {
    pub fn new(plane: Plane) -> Result<Self> {
        if let Some(bad) = plane.data.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::param(
                "layer",
                format!("value {bad} is negative or non-finite"),
            ));
        }
        Ok(Self(plane))
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self(Plane::zeros(width, height))
    }

    pub fn plane(&self) -> &Plane {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub(crate) fn raise(&mut self, x: usize, y: usize, v: f64) {
        let i = y * self.0.width + x;
        if v > self.0.data[i] {
            self.0.data[i] = v;
        }
    }
}

/// Binary occlusion mask; `true` marks occluded pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape {
                expected: format!("{} mask cells", width * height),
                actual: format!("{}", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    /// Thresholds 8-bit gray values: `>= threshold` is occluded.
    pub fn from_gray(width: usize, height: usize, gray: &[u8], threshold: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            gray.iter().map(|&g| g >= threshold).collect(),
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn to_plane(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Nearest-neighbour resample to a new raster size.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Self {
        let mut out = Self::empty(width, height);
        for y in 0..height {
            let sy = (y * self.height) / height;
            for x in 0..width {
                let sx = (x * self.width) / width;
                out.data[y * width + x] = self.get(sx, sy);
            }
        }
        out
    }
}

/// Color layer with its own alpha: the droplet layer or a scratch texture.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayLayer {
    pub color: ImageBuffer,
    pub alpha: AlphaMask,
}

impl OverlayLayer {
    pub fn new(color: ImageBuffer, alpha: AlphaMask) -> Result<Self> {
        if color.dims() != alpha.dims() {
            return Err(Error::Shape {
                expected: format!("{}x{}", color.width(), color.height()),
                actual: format!("{}x{}", alpha.dims().0, alpha.dims().1),
            });
        }
        Ok(Self { color, alpha })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.color.dims()
    }
}
