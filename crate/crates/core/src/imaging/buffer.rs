use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Owned 8-bit raster, row-major, 1 or 3 interleaved channels.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for ImageBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImageBuffer")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish()
    }
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!("zero-sized image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::param(format!("unsupported channel count {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::param(format!(
                "buffer length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image filled with one color; `color.len()` selects the channel count.
    pub fn filled(width: usize, height: usize, color: &[u8]) -> Result<Self> {
        let data = color
            .iter()
            .copied()
            .cycle()
            .take(width * height * color.len())
            .collect();
        Self::new(width, height, color.len(), data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn full_rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    /// Copies out a sub-rectangle.
    pub fn crop(&self, r: Rect) -> Result<ImageBuffer> {
        r.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(r.w * r.h * self.channels);
        for y in r.y..r.y + r.h {
            let start = (y * self.width + r.x) * self.channels;
            data.extend_from_slice(&self.data[start..start + r.w * self.channels]);
        }
        Ok(Self::from_parts_unchecked(r.w, r.h, self.channels, data))
    }

    /// Splits into single-channel planes.
    pub fn planes(&self) -> Vec<ImageBuffer> {
        (0..self.channels)
            .map(|c| {
                let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
                Self::from_parts_unchecked(self.width, self.height, 1, data)
            })
            .collect()
    }

    /// Inverse of [`planes`](Self::planes).
    pub fn merge_planes(planes: &[ImageBuffer]) -> Result<ImageBuffer> {
        let first = planes
            .first()
            .ok_or_else(|| Error::param("no planes to merge"))?;
        let (w, h) = (first.width, first.height);
        if planes.iter().any(|p| p.width != w || p.height != h || p.channels != 1) {
            return Err(Error::param("planes must be single-channel and equally sized"));
        }
        let n = planes.len();
        let mut data = vec![0u8; w * h * n];
        for (c, p) in planes.iter().enumerate() {
            for (i, &v) in p.data.iter().enumerate() {
                data[i * n + c] = v;
            }
        }
        Self::new(w, h, n, data)
    }

    /// Replicates a gray plane into three channels; 3-channel input is cloned.
    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        Self::from_parts_unchecked(self.width, self.height, 3, data)
    }

    pub fn distinct_colors(&self) -> usize {
        let mut seen: Vec<&[u8]> = self.data.chunks_exact(self.channels).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ImageBuffer> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::Codec {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_dynamic(img))
    }

    pub fn decode(bytes: &[u8]) -> Result<ImageBuffer> {
        let img = image::load_from_memory(bytes).map_err(|source| Error::Codec {
            path: "<memory>".into(),
            source,
        })?;
        Ok(Self::from_dynamic(img))
    }

    fn from_dynamic(img: image::DynamicImage) -> ImageBuffer {
        use image::DynamicImage::*;
        match img {
            ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                Self::from_parts_unchecked(w as usize, h as usize, 1, g.into_raw())
            }
            other if other.color().has_color() => {
                let rgb = other.into_rgb8();
                let (w, h) = rgb.dimensions();
                Self::from_parts_unchecked(w as usize, h as usize, 3, rgb.into_raw())
            }
            other => {
                let g = other.into_luma8();
                let (w, h) = g.dimensions();
                Self::from_parts_unchecked(w as usize, h as usize, 1, g.into_raw())
            }
        }
    }

    /// PNG bytes. Deterministic for identical buffers.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        use image::codecs::png::PngEncoder;
        use image::{ExtendedColorType, ImageEncoder};
        let mut out = Vec::new();
        let color = if self.channels == 1 {
            ExtendedColorType::L8
        } else {
            ExtendedColorType::Rgb8
        };
        PngEncoder::new(&mut out)
            .write_image(&self.data, self.width as u32, self.height as u32, color)
            .map_err(|source| Error::Codec {
                path: "<png>".into(),
                source,
            })?;
        Ok(out)
    }

    /// Writes PNG or JPEG depending on the extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("jpg") | Some("jpeg") => {
                let color = if self.channels == 1 {
                    image::ExtendedColorType::L8
                } else {
                    image::ExtendedColorType::Rgb8
                };
                image::save_buffer(path, &self.data, self.width as u32, self.height as u32, color)
                    .map_err(|source| Error::Codec {
                        path: path.to_path_buf(),
                        source,
                    })
            }
            _ => {
                let bytes = self.encode_png()?;
                std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
            }
        }
    }
}

/// Axis-aligned pixel rectangle; `x + w` and `y + h` are exclusive ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn contains_point(&self, px: f64, py: f64) -> bool {
        px >= self.x as f64 && px < self.right() as f64 && py >= self.y as f64 && py < self.bottom() as f64
    }

    pub fn intersection_area(&self, other: &Rect) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        x1.saturating_sub(x0) * y1.saturating_sub(y0)
    }

    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 || self.right() > width || self.bottom() > height {
            return Err(Error::param(format!(
                "rect {self:?} does not fit a {width}x{height} image"
            )));
        }
        Ok(())
    }
}
