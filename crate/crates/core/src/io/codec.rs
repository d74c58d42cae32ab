use std::io::Cursor;
use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};

use crate::camera::ImageBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_JPEG_QUALITY: u8 = 95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Jpeg,
    Png,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Jpeg => "jpg",
            OutputFormat::Png => "png",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jpeg" | "jpg" => Ok(OutputFormat::Jpeg),
            "png" => Ok(OutputFormat::Png),
            other => Err(Error::param(
                "format",
                format!("unknown image format `{other}`"),
            )),
        }
    }
}

/// Decodes JPEG or PNG into 8-bit RGB.
pub fn read_image(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.is_empty() {
        return Err(Error::Decode("empty input".into()));
    }
    let rgb = image::load_from_memory(bytes)
        .map_err(|e| Error::Decode(e.to_string()))?
        .into_rgb8();
    let (w, h) = rgb.dimensions();
    ImageBuffer::new(w as usize, h as usize, rgb.into_raw())
}

pub fn read_image_file(path: &Path) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_image(&bytes).map_err(|e| match e {
        Error::Decode(m) => Error::Decode(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_image(img: &ImageBuffer, format: OutputFormat, jpeg_quality: u8) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let mut out = Cursor::new(Vec::new());
    let res = match format {
        OutputFormat::Jpeg => {
            if !(1..=100).contains(&jpeg_quality) {
                return Err(Error::param(
                    "jpeg_quality",
                    format!("{jpeg_quality} is outside [1, 100]"),
                ));
            }
            JpegEncoder::new_with_quality(&mut out, jpeg_quality).write_image(
                img.as_bytes(),
                w,
                h,
                ExtendedColorType::Rgb8,
            )
        }
        OutputFormat::Png => {
            PngEncoder::new(&mut out).write_image(img.as_bytes(), w, h, ExtendedColorType::Rgb8)
        }
    };
    res.map_err(|e| Error::Encode(e.to_string()))?;
    Ok(out.into_inner())
}
