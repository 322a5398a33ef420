use crate::error::{Error, Result};

use super::ImageBuffer;

/// Rec. 601 luma, rounded half-up in exact integer arithmetic.
pub fn to_grayscale(img: &ImageBuffer) -> ImageBuffer {
    if img.channels() == 1 {
        return img.clone();
    }
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| luma(p[0], p[1], p[2]))
        .collect();
    ImageBuffer::from_parts_unchecked(img.width(), img.height(), 1, data)
}

#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

fn check_kernel(kernel: usize, what: &str) -> Result<()> {
    if kernel < 3 || kernel.is_multiple_of(2) {
        return Err(Error::param(format!("{what} must be odd and >= 3, got {kernel}")));
    }
    Ok(())
}

fn require_gray(img: &ImageBuffer, op: &str) -> Result<()> {
    if img.channels() != 1 {
        return Err(Error::param(format!(
            "{op} expects a single-channel image, got {} channels",
            img.channels()
        )));
    }
    Ok(())
}

/// Normalized 1-D Gaussian taps of odd length `kernel`.
pub fn gaussian_kernel(sigma: f64, kernel: usize) -> Result<Vec<f64>> {
    check_kernel(kernel, "blur kernel")?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("blur sigma must be positive, got {sigma}")));
    }
    let r = (kernel / 2) as f64;
    let mut taps: Vec<f64> = (0..kernel)
        .map(|i| {
            let d = i as f64 - r;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Separable Gaussian blur with edge-replicate borders, applied per channel.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64, kernel: usize) -> Result<ImageBuffer> {
    let taps = gaussian_kernel(sigma, kernel)?;
    let r = (kernel / 2) as isize;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let src = img.data();

    let mut tmp = vec![0f64; w * h * ch];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                    acc += t * src[(y * w + sx) * ch + c] as f64;
                }
                tmp[(y * w + x) * ch + c] = acc;
            }
        }
    }

    let mut out = vec![0u8; w * h * ch];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                    acc += t * tmp[(sy * w + x) * ch + c];
                }
                out[(y * w + x) * ch + c] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Ok(ImageBuffer::from_parts_unchecked(w, h, ch, out))
}

/// Square-window median with edge-replicate borders. Grayscale only.
pub fn median_filter(img: &ImageBuffer, kernel: usize) -> Result<ImageBuffer> {
    check_kernel(kernel, "median kernel")?;
    require_gray(img, "median_filter")?;
    let (w, h) = (img.width(), img.height());
    let r = (kernel / 2) as isize;
    let src = img.data();
    let mid = kernel * kernel / 2;
    let mut window = Vec::with_capacity(kernel * kernel);
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            window.clear();
            for dy in -r..=r {
                let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                let row = &src[sy * w..(sy + 1) * w];
                for dx in -r..=r {
                    let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    window.push(row[sx]);
                }
            }
            let (_, m, _) = window.select_nth_unstable(mid);
            out[y * w + x] = *m;
        }
    }
    Ok(ImageBuffer::from_parts_unchecked(w, h, 1, out))
}

/// Local-mean adaptive threshold: 255 where `p > mean(block) - c`, else 0.
///
/// Block sums come from a summed-area table over the edge-replicated image, so
/// cost is independent of `block`.
pub fn adaptive_threshold(img: &ImageBuffer, block: usize, c: f64) -> Result<ImageBuffer> {
    check_kernel(block, "adaptive threshold block")?;
    require_gray(img, "adaptive_threshold")?;
    let (w, h) = (img.width(), img.height());
    let r = block / 2;
    let (pw, ph) = (w + 2 * r, h + 2 * r);
    let src = img.data();

    // sat has a zero row and column in front.
    let mut sat = vec![0i64; (pw + 1) * (ph + 1)];
    for py in 0..ph {
        let sy = (py as isize - r as isize).clamp(0, h as isize - 1) as usize;
        let mut row_sum = 0i64;
        for px in 0..pw {
            let sx = (px as isize - r as isize).clamp(0, w as isize - 1) as usize;
            row_sum += src[sy * w + sx] as i64;
            sat[(py + 1) * (pw + 1) + px + 1] = sat[py * (pw + 1) + px + 1] + row_sum;
        }
    }

    let n = (block * block) as f64;
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            // padded window spans [x, x+block) x [y, y+block)
            let a = sat[y * (pw + 1) + x];
            let b = sat[y * (pw + 1) + x + block];
            let cc = sat[(y + block) * (pw + 1) + x];
            let d = sat[(y + block) * (pw + 1) + x + block];
            let sum = d - b - cc + a;
            let mean = sum as f64 / n;
            out[y * w + x] = if (src[y * w + x] as f64) > mean - c { 255 } else { 0 };
        }
    }
    Ok(ImageBuffer::from_parts_unchecked(w, h, 1, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, data: &[u8]) -> ImageBuffer {
        ImageBuffer::new(w, h, 1, data.to_vec()).unwrap()
    }

    #[test]
    fn grayscale_examples() {
        let c = ImageBuffer::filled(4, 3, &[100, 100, 100]).unwrap();
        let g = to_grayscale(&c);
        assert_eq!(g.channels(), 1);
        assert!(g.data().iter().all(|&v| v == 100));
        assert_eq!(luma(255, 0, 0), 76);
        let one = gray(2, 1, &[3, 9]);
        assert_eq!(to_grayscale(&one), one);
        assert_eq!(luma(255, 255, 255), 255);
    }

    #[test]
    fn blur_rejects_bad_kernels() {
        let img = gray(3, 3, &[0; 9]);
        assert!(gaussian_blur(&img, 1.0, 4).is_err());
        assert!(gaussian_blur(&img, 1.0, 1).is_err());
        assert!(gaussian_blur(&img, 0.0, 3).is_err());
    }

    #[test]
    fn blur_keeps_constants() {
        for v in [0u8, 1, 77, 254, 255] {
            let img = ImageBuffer::filled(9, 7, &[v, v / 2, 255 - v]).unwrap();
            assert_eq!(gaussian_blur(&img, 6.0, 21).unwrap(), img);
        }
    }

    #[test]
    fn blur_bright_pixel_is_symmetric_bump() {
        let mut img = ImageBuffer::filled(9, 9, &[0]).unwrap();
        img.set(4, 4, 0, 255);
        let out = gaussian_blur(&img, 1.0, 5).unwrap();
        let center = out.get(4, 4, 0);
        for y in 0..9 {
            for x in 0..9 {
                assert!(out.get(x, y, 0) <= center);
                assert_eq!(out.get(x, y, 0), out.get(8 - x, y, 0));
                assert_eq!(out.get(x, y, 0), out.get(y, x, 0));
            }
        }
        assert!(out.get(3, 4, 0) > 0);
    }

    #[test]
    fn tiny_sigma_is_near_identity() {
        let img = ImageBuffer::from_fn(6, 5, 1, |x, y, _| (x * 40 + y * 9) as u8).unwrap();
        let out = gaussian_blur(&img, 0.1, 3).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn median_examples() {
        let img = gray(3, 3, &[7, 1, 9, 3, 5, 2, 8, 4, 6]);
        assert_eq!(median_filter(&img, 3).unwrap().get(1, 1, 0), 5);

        let mut salt = ImageBuffer::filled(5, 5, &[40]).unwrap();
        salt.set(2, 2, 0, 255);
        assert!(median_filter(&salt, 3).unwrap().data().iter().all(|&v| v == 40));

        let rgb = ImageBuffer::filled(3, 3, &[1, 2, 3]).unwrap();
        assert!(median_filter(&rgb, 3).is_err());
        assert!(median_filter(&salt, 4).is_err());
    }

    #[test]
    fn adaptive_threshold_examples() {
        let flat = ImageBuffer::filled(6, 6, &[90]).unwrap();
        assert!(adaptive_threshold(&flat, 3, 2.0).unwrap().data().iter().all(|&v| v == 255));
        assert!(adaptive_threshold(&flat, 3, 255.0).unwrap().data().iter().all(|&v| v == 255));
        assert!(adaptive_threshold(&flat, 3, -255.0).unwrap().data().iter().all(|&v| v == 0));
        assert!(adaptive_threshold(&flat, 4, 2.0).is_err());

        // 0|255 step between columns 2 and 3
        let step = ImageBuffer::from_fn(6, 4, 1, |x, _, _| if x < 3 { 0 } else { 255 }).unwrap();
        let out = adaptive_threshold(&step, 3, 2.0).unwrap();
        for y in 0..4 {
            assert_eq!(out.get(2, y, 0), 0);
            assert_eq!(out.get(3, y, 0), 255);
            assert_eq!(out.get(0, y, 0), 255);
        }
    }
}
