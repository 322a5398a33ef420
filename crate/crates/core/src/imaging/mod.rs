//! Pixel-level primitives shared by every recipe.
//!
//! Filters replicate edge pixels at borders; geometric transforms fill
//! vacated pixels with black.

mod buffer;
mod filter;
mod geometry;
mod quantize;

pub use buffer::{ImageBuffer, Rect};
pub use filter::{adaptive_threshold, gaussian_blur, gaussian_kernel, luma, median_filter, to_grayscale};
pub use geometry::{
    adjust_contrast, hflip, invert, resize_bilinear, resize_region_bilinear, rotate, translate,
};
pub use quantize::{kmeans_quantize, Quantized, DEFAULT_MAX_ITERS};
