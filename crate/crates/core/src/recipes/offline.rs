use serde_json::json;

use crate::error::{Error, Result};
use crate::imaging::{
    adaptive_threshold, gaussian_blur, kmeans_quantize, median_filter, resize_region_bilinear,
    to_grayscale, ImageBuffer, Rect,
};
use crate::landmarks::{region_bbox, LandmarkSet, RegionName, RegionTable};
use crate::rng::DeterministicRng;

use super::params::*;
use super::{GeneratedSample, Recipe};

fn sample(recipe: Recipe, image: ImageBuffer, rng: &DeterministicRng, params: serde_json::Value) -> GeneratedSample {
    GeneratedSample::new(recipe, image, rng.master_seed(), params)
}

/// Draws the per-region erase mask. With `force` set the whole mask is
/// redrawn until at least one entry is selected.
pub fn draw_region_selection(
    n: usize,
    prob: f64,
    force: bool,
    rng: &mut DeterministicRng,
) -> Result<Vec<bool>> {
    if force && (n == 0 || prob <= 0.0) {
        return Err(Error::param("forced selection needs n > 0 and prob > 0"));
    }
    loop {
        let mask: Vec<bool> = (0..n).map(|_| rng.bernoulli(prob)).collect();
        if !force || mask.iter().any(|&m| m) {
            return Ok(mask);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErasedRegion {
    pub name: RegionName,
    pub rect: Rect,
    pub color: Vec<u8>,
}

/// Fills randomly selected facial-region boxes with random flat colors,
/// using the default region table.
pub fn cutout_facial_regions(
    img: &ImageBuffer,
    lms: &LandmarkSet,
    params: &CutoutParams,
    rng: &mut DeterministicRng,
) -> Result<GeneratedSample> {
    cutout_with_table(img, lms, &RegionTable::default(), params, rng)
}

pub fn cutout_with_table(
    img: &ImageBuffer,
    lms: &LandmarkSet,
    table: &RegionTable,
    params: &CutoutParams,
    rng: &mut DeterministicRng,
) -> Result<GeneratedSample> {
    let (out, erased) = cutout_regions(img, lms, table, params, rng)?;
    let regions: Vec<_> = erased
        .iter()
        .map(|e| json!({ "region": e.name, "rect": e.rect, "color": e.color }))
        .collect();
    Ok(sample(
        Recipe::Cutout,
        out,
        rng,
        json!({ "per_region_prob": params.per_region_prob, "pad": params.pad, "erased": regions }),
    ))
}

/// Core of the cutout recipe; returns the erased boxes in fill order.
pub fn cutout_regions(
    img: &ImageBuffer,
    lms: &LandmarkSet,
    table: &RegionTable,
    params: &CutoutParams,
    rng: &mut DeterministicRng,
) -> Result<(ImageBuffer, Vec<ErasedRegion>)> {
    let boxes: Vec<(RegionName, Rect)> = table
        .regions()
        .iter()
        .filter_map(|r| {
            region_bbox(lms, r, params.pad, img.width(), img.height())
                .ok()
                .map(|b| (r.name, b))
        })
        .collect();
    if boxes.is_empty() {
        return Err(Error::Inapplicable {
            recipe: Recipe::Cutout.name(),
            reason: "every facial region box is degenerate".into(),
        });
    }
    let mask = draw_region_selection(
        boxes.len(),
        params.per_region_prob,
        params.force_at_least_one,
        rng,
    )?;
    let ch = img.channels();
    let mut out = img.clone();
    let mut erased = Vec::new();
    for ((name, rect), _) in boxes.into_iter().zip(mask).filter(|(_, m)| *m) {
        let color: Vec<u8> = (0..ch).map(|_| rng.byte()).collect();
        let w = out.width();
        let data = out.data_mut();
        for y in rect.y..rect.bottom() {
            for x in rect.x..rect.right() {
                let i = (y * w + x) * ch;
                data[i..i + ch].copy_from_slice(&color);
            }
        }
        erased.push(ErasedRegion { name, rect, color });
    }
    Ok((out, erased))
}

/// Picks the crop window for [`local_crop_enlarge`].
pub fn draw_crop_rect(w: usize, h: usize, crop: usize, rng: &mut DeterministicRng) -> Result<Rect> {
    if crop == 0 || w < crop || h < crop {
        return Err(Error::Inapplicable {
            recipe: Recipe::Crop.name(),
            reason: format!("{w}x{h} source is smaller than the {crop}px crop"),
        });
    }
    let x = rng.range(0..=w - crop);
    let y = rng.range(0..=h - crop);
    Ok(Rect::new(x, y, crop, crop))
}

/// Random square crop upscaled to `out_size`.
pub fn local_crop_enlarge(
    img: &ImageBuffer,
    params: &CropParams,
    rng: &mut DeterministicRng,
) -> Result<GeneratedSample> {
    let rect = draw_crop_rect(img.width(), img.height(), params.crop_size, rng)?;
    let out = resize_region_bilinear(img, rect, params.out_size, params.out_size)?;
    Ok(sample(
        Recipe::Crop,
        out,
        rng,
        json!({ "crop_size": params.crop_size, "out_size": params.out_size, "rect": rect }),
    ))
}

/// Draws `n` non-zero shifts with components in `[-max, max]`.
pub fn draw_shifts(n: usize, max: i64, rng: &mut DeterministicRng) -> Result<Vec<(i64, i64)>> {
    if max < 1 {
        return Err(Error::param("max_shift must be >= 1"));
    }
    Ok((0..n)
        .map(|_| loop {
            let d = (rng.range(-max..=max), rng.range(-max..=max));
            if d != (0, 0) {
                break d;
            }
        })
        .collect())
}

/// Rounded mean of zero-filled shifted copies of a grayscale image.
pub fn overlay_shifted(gray: &ImageBuffer, shifts: &[(i64, i64)]) -> ImageBuffer {
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let mut acc = vec![0u32; gray.data().len()];
    let src = gray.data();
    for &(dx, dy) in shifts {
        for y in 0.max(dy)..h.min(h + dy) {
            let sy = y - dy;
            let row = &src[(sy * w) as usize..((sy + 1) * w) as usize];
            let dst = &mut acc[(y * w) as usize..((y + 1) * w) as usize];
            for x in 0.max(dx)..w.min(w + dx) {
                dst[x as usize] += row[(x - dx) as usize] as u32;
            }
        }
    }
    let n = shifts.len() as u32;
    let data = acc.into_iter().map(|s| ((s + n / 2) / n) as u8).collect();
    ImageBuffer::from_parts_unchecked(gray.width(), gray.height(), 1, data)
}

/// Grayscale, translate `num_shifts` times at random, average the copies.
pub fn gray_translate_overlay(
    img: &ImageBuffer,
    params: &OverlayParams,
    rng: &mut DeterministicRng,
) -> Result<GeneratedSample> {
    let shifts = draw_shifts(params.num_shifts, params.max_shift, rng)?;
    let out = overlay_shifted(&to_grayscale(img), &shifts);
    Ok(sample(
        Recipe::Overlay,
        out,
        rng,
        json!({ "num_shifts": params.num_shifts, "max_shift": params.max_shift, "shifts": shifts }),
    ))
}

/// Intermediate layers of the cartoon effect.
#[derive(Debug, Clone)]
pub struct CartoonLayers {
    pub edges: ImageBuffer,
    pub quantized: ImageBuffer,
    pub smoothed: ImageBuffer,
    pub output: ImageBuffer,
    pub palette: Vec<Vec<u8>>,
    pub iterations: usize,
}

pub fn cartoon_layers(
    img: &ImageBuffer,
    params: &CartoonParams,
    rng: &mut DeterministicRng,
) -> Result<CartoonLayers> {
    if img.channels() != 3 {
        return Err(Error::Inapplicable {
            recipe: Recipe::Cartoon.name(),
            reason: "cartoonization needs a 3-channel image".into(),
        });
    }
    let edges = adaptive_threshold(&to_grayscale(img), params.block, params.c)?;
    let q = kmeans_quantize(img, params.k_colors, params.max_iters, rng)?;
    let smoothed_planes = q
        .image
        .planes()
        .iter()
        .map(|p| median_filter(p, params.median_kernel))
        .collect::<Result<Vec<_>>>()?;
    let smoothed = ImageBuffer::merge_planes(&smoothed_planes)?;
    let mut output = smoothed.clone();
    for (px, &e) in output.data_mut().chunks_exact_mut(3).zip(edges.data()) {
        if e != 255 {
            px.fill(0);
        }
    }
    Ok(CartoonLayers {
        edges,
        quantized: q.image,
        smoothed,
        output,
        palette: q.palette,
        iterations: q.iterations,
    })
}

/// Edge mask over a median-smoothed k-means quantization; edges are drawn black.
pub fn cartoonize(
    img: &ImageBuffer,
    params: &CartoonParams,
    rng: &mut DeterministicRng,
) -> Result<GeneratedSample> {
    let layers = cartoon_layers(img, params, rng)?;
    Ok(sample(
        Recipe::Cartoon,
        layers.output,
        rng,
        json!({
            "k_colors": params.k_colors,
            "block": params.block,
            "c": params.c,
            "median_kernel": params.median_kernel,
            "palette": layers.palette,
            "kmeans_iterations": layers.iterations,
        }),
    ))
}

/// Color-dodge of the grayscale image against its blurred negative.
pub fn sketch_image(img: &ImageBuffer, params: &SketchParams) -> Result<ImageBuffer> {
    let g = to_grayscale(img);
    let inv = crate::imaging::invert(&g);
    let blur = gaussian_blur(&inv, params.blur_sigma, params.blur_kernel)?;
    let data = g
        .data()
        .iter()
        .zip(blur.data())
        .map(|(&gv, &bv)| {
            let d = (255 - bv as u32).max(1);
            // round(g*255/d) in integers
            ((gv as u32 * 255 * 2 + d) / (2 * d)).min(255) as u8
        })
        .collect();
    Ok(ImageBuffer::from_parts_unchecked(g.width(), g.height(), 1, data))
}

pub fn sketch(img: &ImageBuffer, params: &SketchParams, rng: &mut DeterministicRng) -> Result<GeneratedSample> {
    let out = sketch_image(img, params)?;
    Ok(sample(
        Recipe::Sketch,
        out,
        rng,
        json!({ "blur_sigma": params.blur_sigma, "blur_kernel": params.blur_kernel }),
    ))
}

pub fn draw_threshold(params: &BinarizeParams, rng: &mut DeterministicRng) -> u8 {
    rng.range(params.center - params.jitter..=params.center + params.jitter)
        .clamp(0, 255) as u8
}

/// 255 where luma is strictly above `t`, else 0.
pub fn binarize_at(img: &ImageBuffer, t: u8) -> ImageBuffer {
    let g = to_grayscale(img);
    let data = g.data().iter().map(|&v| if v > t { 255 } else { 0 }).collect();
    ImageBuffer::from_parts_unchecked(g.width(), g.height(), 1, data)
}

pub fn binarize_random(
    img: &ImageBuffer,
    params: &BinarizeParams,
    rng: &mut DeterministicRng,
) -> Result<GeneratedSample> {
    let t = draw_threshold(params, rng);
    Ok(sample(
        Recipe::Binarize,
        binarize_at(img, t),
        rng,
        json!({ "center": params.center, "jitter": params.jitter, "threshold": t }),
    ))
}
