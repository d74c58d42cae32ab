//! Camera degradations on in-memory RGB images: dirt, water blur, scratches
//! and soiling.

mod buffer;
pub mod dirt;
pub mod kernel;
pub mod patch;
pub mod scratch;
pub mod soiling;
pub mod water;

pub use buffer::{
    quantize, AdditiveLayer, AlphaMask, BinaryMask, ImageBuffer, OverlayLayer, Plane,
};
pub use dirt::{
    apply_dirt, apply_dirt_layers, generate_dirt_layers, DirtConfig, DirtGenerator, DirtLayers,
};
pub use kernel::{convolve, gaussian_kernel, ConvKernel};
pub use scratch::{apply_scratch, ScratchConfig, ScratchGenerator, ScratchTexture};
pub use soiling::{apply_soiling, generate_soiling_mask, soiling_sigma};
pub use water::{
    apply_water_blur, apply_water_blur_with, convex_blend, WaterBlurConfig, WaterBlurGenerator,
};
