#![allow(dead_code)]

pub mod cascade;

use std::path::{Path, PathBuf};

use forgery_kit::landmarks::LandmarkStore;
use forgery_kit::synth::{face_like, noise_rgb};
use forgery_kit::{DeterministicRng, ImageBuffer};

pub const REFERENCE_CASCADE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/haarcascade_frontalface_default.xml");

pub struct Corpus {
    pub images: PathBuf,
    pub labels: PathBuf,
    pub landmarks: PathBuf,
}

/// `n` labelled images of `size`×`size` under `root`. Every fifth image is
/// grayscale noise (no landmarks); of the faces, two in three get a sidecar.
pub fn build_corpus(root: &Path, n: usize, size: usize, seed: u64) -> Corpus {
    let images = root.join("images");
    let landmarks = root.join("landmarks");
    std::fs::create_dir_all(&images).unwrap();
    std::fs::create_dir_all(&landmarks).unwrap();
    let mut labels = String::from("image_id,label\n");
    for i in 0..n {
        let mut rng = DeterministicRng::new(seed, i as u64);
        let name = format!("img_{i:05}.png");
        if i % 5 == 4 {
            let g = forgery_kit::imaging::to_grayscale(&noise_rgb(size, size, &mut rng));
            g.save(images.join(&name)).unwrap();
        } else {
            let (img, lms) = face_like(size, size, &name, &mut rng);
            img.save(images.join(&name)).unwrap();
            if i % 3 != 2 {
                let mut store = LandmarkStore::default();
                store.insert(lms);
                store.save(landmarks.join(format!("img_{i:05}.txt"))).unwrap();
            }
        }
        labels.push_str(&format!("{name},{}\n", if i % 2 == 0 { "real" } else { "fake" }));
    }
    let labels_path = root.join("labels.csv");
    std::fs::write(&labels_path, labels).unwrap();
    Corpus {
        images,
        labels: labels_path,
        landmarks,
    }
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = walkdir::WalkDir::new(dir)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            (rel, std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

pub fn random_gray(w: usize, h: usize, rng: &mut DeterministicRng) -> ImageBuffer {
    ImageBuffer::new(w, h, 1, (0..w * h).map(|_| rng.byte()).collect()).unwrap()
}

use forgery_kit::imaging::to_grayscale;
use forgery_kit::landmarks::{LandmarkSet, RegionTable};
use forgery_kit::recipes::{
    binarize_random, cartoon_layers, cutout_regions, local_crop_enlarge, sketch_image, CartoonParams, CropParams,
    CutoutParams, SketchParams, BinarizeParams,
};
use forgery_kit::Rect;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The analytic recipe identities on one source image; `Err` names the first
/// that fails.
pub fn check_recipe_identities(img: &ImageBuffer, lms: &LandmarkSet, seed: u64) -> Result<(), String> {
    let e = |e: forgery_kit::Error| e.to_string();

    // sketch of the flat image at this image's mean gray is all 255
    let g = to_grayscale(img);
    let mean = (g.data().iter().map(|&v| v as u64).sum::<u64>() / g.data().len() as u64).max(1) as u8;
    let flat = ImageBuffer::filled(img.width(), img.height(), &[mean]).unwrap();
    let sk = sketch_image(&flat, &SketchParams::default()).map_err(e)?;
    ensure(sk.data().iter().all(|&v| v == 255), || format!("sketch of flat {mean} is not all 255"))?;

    let b = binarize_random(img, &BinarizeParams::default(), &mut DeterministicRng::new(seed, 1)).map_err(e)?;
    ensure(b.image.data().iter().all(|&v| v == 0 || v == 255), || "binarize produced a gray value".into())?;

    let (out, erased) = cutout_regions(
        img,
        lms,
        &RegionTable::default(),
        &CutoutParams::default(),
        &mut DeterministicRng::new(seed, 2),
    )
    .map_err(e)?;
    ensure(!erased.is_empty(), || "cutout erased nothing".into())?;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let last = erased.iter().rev().find(|r| r.rect.contains_point(x as f64 + 0.5, y as f64 + 0.5));
            match last {
                None => ensure(out.pixel(x, y) == img.pixel(x, y), || format!("cutout touched ({x},{y})"))?,
                Some(r) => ensure(out.pixel(x, y) == r.color.as_slice(), || format!("cutout box not constant at ({x},{y})"))?,
            }
        }
    }

    let crop = CropParams {
        crop_size: img.width().min(img.height()) * 3 / 4,
        out_size: 96,
    };
    let s = local_crop_enlarge(img, &crop, &mut DeterministicRng::new(seed, 3)).map_err(e)?;
    let r: Rect = serde_json::from_value(s.params_used["rect"].clone()).map_err(|x| x.to_string())?;
    let oracle = oracle_resize(&img.crop(r).map_err(e)?, crop.out_size, crop.out_size);
    ensure(s.image == oracle, || "crop-enlarge differs from crop-then-resize".into())?;

    if img.channels() == 3 {
        let params = CartoonParams::default();
        let layers = cartoon_layers(img, &params, &mut DeterministicRng::new(seed, 4)).map_err(e)?;
        for (c, plane) in layers.quantized.planes().iter().enumerate() {
            let n = plane.distinct_colors();
            ensure(n <= params.k_colors, || format!("quantized channel {c} has {n} values"))?;
        }
        ensure(layers.quantized.distinct_colors() <= params.k_colors, || "quantized colors exceed k".into())?;
    }
    Ok(())
}

/// Bilinear with half-pixel centers written against a pre-cropped buffer.
pub fn oracle_resize(src: &ImageBuffer, ow: usize, oh: usize) -> ImageBuffer {
    let (sw, sh) = (src.width(), src.height());
    let coord = |d: usize, s_len: usize, d_len: usize| {
        let s = ((d as f64 + 0.5) * (s_len as f64 / d_len as f64) - 0.5).clamp(0.0, (s_len - 1) as f64);
        let i0 = s.floor() as usize;
        (i0, (i0 + 1).min(s_len - 1), s - i0 as f64)
    };
    ImageBuffer::from_fn(ow, oh, src.channels(), |x, y, c| {
        let (x0, x1, fx) = coord(x, sw, ow);
        let (y0, y1, fy) = coord(y, sh, oh);
        let p = |x: usize, y: usize| src.get(x, y, c) as f64;
        let top = (1.0 - fx) * p(x0, y0) + fx * p(x1, y0);
        let bot = (1.0 - fx) * p(x0, y1) + fx * p(x1, y1);
        ((1.0 - fy) * top + fy * bot).round().clamp(0.0, 255.0) as u8
    })
    .unwrap()
}

