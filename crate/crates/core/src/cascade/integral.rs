use crate::error::{Error, Result};
use crate::imaging::{ImageBuffer, Rect};

/// Summed-area tables of pixel values and squared pixel values, each
/// `(width+1) x (height+1)` with a zero first row and column.
#[derive(Debug, Clone)]
pub struct IntegralPair {
    width: usize,
    height: usize,
    sat: Vec<u64>,
    sqsat: Vec<u64>,
}

impl IntegralPair {
    pub fn new(img: &ImageBuffer) -> Result<Self> {
        if img.channels() != 1 {
            return Err(Error::param("integral images need a grayscale image"));
        }
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut sat = vec![0u64; stride * (h + 1)];
        let mut sqsat = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let (mut row, mut sqrow) = (0u64, 0u64);
            for x in 0..w {
                let v = img.get(x, y, 0) as u64;
                row += v;
                sqrow += v * v;
                let i = (y + 1) * stride + x + 1;
                sat[i] = sat[i - stride] + row;
                sqsat[i] = sqsat[i - stride] + sqrow;
            }
        }
        Ok(Self {
            width: w,
            height: h,
            sat,
            sqsat,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of all pixels strictly above and left of `(x, y)`.
    pub fn sat(&self, x: usize, y: usize) -> u64 {
        self.sat[y * (self.width + 1) + x]
    }

    #[inline]
    fn lookup(table: &[u64], stride: usize, x: usize, y: usize, w: usize, h: usize) -> u64 {
        let a = table[y * stride + x];
        let b = table[y * stride + x + w];
        let c = table[(y + h) * stride + x];
        let d = table[(y + h) * stride + x + w];
        d + a - b - c
    }

    /// Pixel sum over `r` in four lookups. `r` must lie inside the image.
    #[inline]
    pub fn rect_sum(&self, r: Rect) -> u64 {
        Self::lookup(&self.sat, self.width + 1, r.x, r.y, r.w, r.h)
    }

    #[inline]
    pub fn rect_sq_sum(&self, r: Rect) -> u64 {
        Self::lookup(&self.sqsat, self.width + 1, r.x, r.y, r.w, r.h)
    }
}

pub fn integral_images(img: &ImageBuffer) -> Result<IntegralPair> {
    IntegralPair::new(img)
}
