use crate::error::Result;

use super::{to_grayscale, ImageBuffer, Rect};

/// Bilinear resize with half-pixel centers.
pub fn resize_bilinear(img: &ImageBuffer, out_w: usize, out_h: usize) -> Result<ImageBuffer> {
    resize_region_bilinear(img, img.full_rect(), out_w, out_h)
}

struct Tap {
    i0: usize,
    i1: usize,
    frac: f64,
}

fn taps(src_len: usize, dst_len: usize) -> Vec<Tap> {
    let scale = src_len as f64 / dst_len as f64;
    let max = (src_len - 1) as f64;
    (0..dst_len)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let i0 = s.floor() as usize;
            Tap {
                i0,
                i1: (i0 + 1).min(src_len - 1),
                frac: s - i0 as f64,
            }
        })
        .collect()
}

/// Resamples the `region` of `img` to `out_w`×`out_h`, reading only pixels
/// inside the region (equivalent to crop followed by [`resize_bilinear`]).
pub fn resize_region_bilinear(
    img: &ImageBuffer,
    region: Rect,
    out_w: usize,
    out_h: usize,
) -> Result<ImageBuffer> {
    region.check_within(img.width(), img.height())?;
    if out_w == 0 || out_h == 0 {
        return Err(crate::Error::param(format!("resize target {out_w}x{out_h}")));
    }
    let ch = img.channels();
    let xs = taps(region.w, out_w);
    let ys = taps(region.h, out_h);
    let mut out = Vec::with_capacity(out_w * out_h * ch);
    for ty in &ys {
        for tx in &xs {
            for c in 0..ch {
                let p = |x: usize, y: usize| img.get(region.x + x, region.y + y, c) as f64;
                let top = (1.0 - tx.frac) * p(tx.i0, ty.i0) + tx.frac * p(tx.i1, ty.i0);
                let bot = (1.0 - tx.frac) * p(tx.i0, ty.i1) + tx.frac * p(tx.i1, ty.i1);
                let v = (1.0 - ty.frac) * top + ty.frac * bot;
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(ImageBuffer::from_parts_unchecked(out_w, out_h, ch, out))
}

/// Shifted copy; vacated pixels are black.
pub fn translate(img: &ImageBuffer, dx: i64, dy: i64) -> ImageBuffer {
    let (w, h, ch) = (img.width() as i64, img.height() as i64, img.channels());
    let mut out = vec![0u8; img.data().len()];
    for y in 0..h {
        let sy = y - dy;
        if sy < 0 || sy >= h {
            continue;
        }
        for x in 0..w {
            let sx = x - dx;
            if sx < 0 || sx >= w {
                continue;
            }
            let d = ((y * w + x) as usize) * ch;
            let s = ((sy * w + sx) as usize) * ch;
            out[d..d + ch].copy_from_slice(&img.data()[s..s + ch]);
        }
    }
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), ch, out)
}

pub fn invert(img: &ImageBuffer) -> ImageBuffer {
    let data = img.data().iter().map(|&v| 255 - v).collect();
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), img.channels(), data)
}

/// Scales distance from the grayscale mean by `factor`.
pub fn adjust_contrast(img: &ImageBuffer, factor: f64) -> ImageBuffer {
    let g = to_grayscale(img);
    let mean = g.data().iter().map(|&v| v as u64).sum::<u64>() as f64 / g.data().len() as f64;
    let data = img
        .data()
        .iter()
        .map(|&v| (mean + factor * (v as f64 - mean)).round().clamp(0.0, 255.0) as u8)
        .collect();
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), img.channels(), data)
}

pub fn hflip(img: &ImageBuffer) -> ImageBuffer {
    let (w, ch) = (img.width(), img.channels());
    let mut data = Vec::with_capacity(img.data().len());
    for row in img.data().chunks_exact(w * ch) {
        for px in row.chunks_exact(ch).rev() {
            data.extend_from_slice(px);
        }
    }
    ImageBuffer::from_parts_unchecked(w, img.height(), ch, data)
}

/// Rotation about the image center (counter-clockwise for positive degrees on
/// a y-down raster), bilinear sampling, zero fill outside the source.
pub fn rotate(img: &ImageBuffer, degrees: f64) -> ImageBuffer {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let fetch = |x: i64, y: i64, c: usize| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            img.get(x as usize, y as usize, c) as f64
        }
    };
    let mut out = Vec::with_capacity(img.data().len());
    for y in 0..h {
        for x in 0..w {
            let (ox, oy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            // inverse map into the source
            let sx = cos * ox - sin * oy + cx - 0.5;
            let sy = sin * ox + cos * oy + cy - 0.5;
            let (x0, y0) = (sx.floor(), sy.floor());
            let (fx, fy) = (sx - x0, sy - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            for c in 0..ch {
                let top = (1.0 - fx) * fetch(x0, y0, c) + fx * fetch(x0 + 1, y0, c);
                let bot = (1.0 - fx) * fetch(x0, y0 + 1, c) + fx * fetch(x0 + 1, y0 + 1, c);
                out.push(((1.0 - fy) * top + fy * bot).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageBuffer::from_parts_unchecked(w, h, ch, out)
}
