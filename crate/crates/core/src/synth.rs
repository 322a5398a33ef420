//! Synthetic face-like images and matching 68-point landmarks for demos,
//! fixtures and benchmarks.

use std::f64::consts::PI;

use crate::imaging::ImageBuffer;
use crate::landmarks::{LandmarkSet, Point};
use crate::rng::DeterministicRng;

/// 68 landmarks laid out on a canonical face centred at `(cx, cy)` with
/// half-width `r`, following the usual iBUG ordering.
pub fn template_landmarks(cx: f64, cy: f64, r: f64) -> Vec<Point> {
    let mut pts = Vec::with_capacity(68);
    let mut push = |u: f64, v: f64| pts.push(Point { x: cx + u * r, y: cy + v * r });
    // jaw 0..=16
    for i in 0..17 {
        let a = PI * (i as f64 / 16.0);
        push(-a.cos() * 0.95, 0.05 + a.sin() * 0.9);
    }
    // brows 17..=26
    for side in [-1.0, 1.0] {
        for i in 0..5 {
            let t = i as f64 / 4.0;
            let u = if side < 0.0 { -0.75 + 0.55 * t } else { 0.2 + 0.55 * t };
            push(u, -0.5 - 0.08 * (PI * t).sin());
        }
    }
    // nose bridge 27..=30, base 31..=35
    for i in 0..4 {
        push(0.0, -0.35 + 0.12 * i as f64);
    }
    for i in 0..5 {
        push(-0.18 + 0.09 * i as f64, 0.15 + 0.03 * (1.0 - ((i as f64 - 2.0) / 2.0).powi(2)));
    }
    // eyes 36..=47, six points each
    for ecx in [-0.42, 0.42] {
        for i in 0..6 {
            let a = PI + 2.0 * PI * i as f64 / 6.0;
            push(ecx + 0.16 * a.cos(), -0.3 - 0.07 * a.sin());
        }
    }
    // outer lip 48..=59, inner lip 60..=67
    for i in 0..12 {
        let a = PI + 2.0 * PI * i as f64 / 12.0;
        push(0.38 * a.cos(), 0.45 - 0.14 * a.sin());
    }
    for i in 0..8 {
        let a = PI + 2.0 * PI * i as f64 / 8.0;
        push(0.25 * a.cos(), 0.45 - 0.06 * a.sin());
    }
    pts
}

/// An RGB image with a lit oval face, dark eyes, brows and mouth on a noisy
/// background. Returns the image and its landmarks (named `image_ref`).
pub fn face_like(width: usize, height: usize, image_ref: &str, rng: &mut DeterministicRng) -> (ImageBuffer, LandmarkSet) {
    let (w, h) = (width as f64, height as f64);
    let cx = w * (0.45 + 0.1 * rng.unit());
    let cy = h * (0.45 + 0.1 * rng.unit());
    let r = w.min(h) * (0.28 + 0.08 * rng.unit());
    let skin = [170 + rng.byte() / 4, 120 + rng.byte() / 5, 90 + rng.byte() / 5];
    let bg = [rng.byte() / 3, rng.byte() / 3, 60 + rng.byte() / 3];
    let points = template_landmarks(cx, cy, r);
    let noise_seed = rng.range(0..u64::MAX);

    let dark = |px: f64, py: f64| -> bool {
        let (u, v) = ((px - cx) / r, (py - cy) / r);
        let eye = |ex: f64| ((u - ex) / 0.18).powi(2) + ((v + 0.3) / 0.09).powi(2) < 1.0;
        let brow = (v + 0.52).abs() < 0.05 && (0.2..0.75).contains(&u.abs());
        let mouth = (u / 0.38).powi(2) + ((v - 0.45) / 0.1).powi(2) < 1.0;
        eye(-0.42) || eye(0.42) || brow || mouth
    };
    let img = ImageBuffer::from_fn(width, height, 3, |x, y, c| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        let (u, v) = ((px - cx) / r, (py - cy) / (1.25 * r));
        let n = (crate::rng::mix_seed(&[noise_seed, (y * width + x) as u64]) % 17) as u8;
        if u * u + v * v < 1.0 {
            if dark(px, py) {
                25 + n
            } else {
                skin[c].saturating_add(n)
            }
        } else {
            bg[c].saturating_add(n)
        }
    })
    .expect("valid dimensions");
    let lms = LandmarkSet::new(image_ref, points).expect("68 points");
    (img, lms)
}

/// Uniform random RGB noise.
pub fn noise_rgb(width: usize, height: usize, rng: &mut DeterministicRng) -> ImageBuffer {
    let data = (0..width * height * 3).map(|_| rng.byte()).collect();
    ImageBuffer::new(width, height, 3, data).expect("valid dimensions")
}
