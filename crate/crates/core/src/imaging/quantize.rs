use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

use super::ImageBuffer;

pub const DEFAULT_MAX_ITERS: usize = 20;

#[derive(Debug, Clone)]
pub struct Quantized {
    pub image: ImageBuffer,
    /// Rounded final centroids, one entry per non-empty seed.
    pub palette: Vec<Vec<u8>>,
    pub iterations: usize,
    /// Sum of squared distances to the assigned centroid, recorded after
    /// seeding and after each Lloyd update.
    pub error_history: Vec<f64>,
}

/// Histogram of distinct colors in a fixed (sorted) order.
struct ColorTable {
    colors: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// color-table index of every pixel
    pixel_index: Vec<u32>,
}

impl ColorTable {
    fn build(img: &ImageBuffer) -> Self {
        let ch = img.channels();
        let mut keyed: Vec<(&[u8], u32)> = img
            .data()
            .chunks_exact(ch)
            .enumerate()
            .map(|(i, p)| (p, i as u32))
            .collect();
        keyed.sort_unstable();
        let mut colors = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut pixel_index = vec![0u32; keyed.len()];
        let mut prev: Option<&[u8]> = None;
        for (p, i) in keyed {
            if prev != Some(p) {
                colors.push(p.iter().map(|&v| v as f64).collect());
                weights.push(0.0);
                prev = Some(p);
            }
            *weights.last_mut().unwrap() += 1.0;
            pixel_index[i as usize] = (colors.len() - 1) as u32;
        }
        Self {
            colors,
            weights,
            pixel_index,
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(color: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(color, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// k-means++ seeding over the weighted color table. Stops early once every
/// remaining color coincides with a chosen seed.
fn seed_plus_plus(table: &ColorTable, k: usize, rng: &mut DeterministicRng) -> Vec<Vec<f64>> {
    let total: f64 = table.weights.iter().sum();
    let pick = |target: f64, w: &[f64]| -> usize {
        let mut acc = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            acc += wi;
            if target < acc {
                return i;
            }
        }
        w.iter().rposition(|&wi| wi > 0.0).unwrap_or(0)
    };
    let first = pick(rng.unit() * total, &table.weights);
    let mut centroids = vec![table.colors[first].clone()];
    let mut d2: Vec<f64> = table.colors.iter().map(|c| dist2(c, &centroids[0])).collect();
    while centroids.len() < k {
        let scores: Vec<f64> = d2.iter().zip(&table.weights).map(|(d, w)| d * w).collect();
        let mass: f64 = scores.iter().sum();
        if mass <= 0.0 {
            break;
        }
        let next = pick(rng.unit() * mass, &scores);
        let c = table.colors[next].clone();
        for (d, col) in d2.iter_mut().zip(&table.colors) {
            *d = d.min(dist2(col, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's k-means color quantization with k-means++ seeding.
///
/// Iterates until assignments stop changing or `max_iters` updates have run.
/// Empty clusters keep their previous centroid.
pub fn kmeans_quantize(
    img: &ImageBuffer,
    k: usize,
    max_iters: usize,
    rng: &mut DeterministicRng,
) -> Result<Quantized> {
    let npix = img.width() * img.height();
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if k > npix {
        return Err(Error::param(format!("k = {k} exceeds pixel count {npix}")));
    }
    let ch = img.channels();
    let table = ColorTable::build(img);
    let mut centroids = seed_plus_plus(&table, k, rng);

    let assign = |centroids: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let mut err = 0.0;
        let labels = table
            .colors
            .iter()
            .zip(&table.weights)
            .map(|(c, w)| {
                let (j, d) = nearest(c, centroids);
                err += d * w;
                j
            })
            .collect();
        (labels, err)
    };

    let (mut labels, err) = assign(&centroids);
    let mut history = vec![err];
    let mut iterations = 0;
    while iterations < max_iters {
        let mut sums = vec![vec![0.0; ch]; centroids.len()];
        let mut counts = vec![0.0; centroids.len()];
        for ((c, w), &l) in table.colors.iter().zip(&table.weights).zip(&labels) {
            counts[l] += w;
            for (s, v) in sums[l].iter_mut().zip(c) {
                *s += v * w;
            }
        }
        for ((cent, sum), n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if *n > 0.0 {
                *cent = sum.into_iter().map(|s| s / n).collect();
            }
        }
        iterations += 1;
        let (next, err) = assign(&centroids);
        history.push(err);
        let settled = next == labels;
        labels = next;
        if settled {
            break;
        }
    }

    let palette: Vec<Vec<u8>> = centroids
        .iter()
        .map(|c| c.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect())
        .collect();
    let mut data = Vec::with_capacity(img.data().len());
    for &ci in &table.pixel_index {
        data.extend_from_slice(&palette[labels[ci as usize]]);
    }
    Ok(Quantized {
        image: ImageBuffer::from_parts_unchecked(img.width(), img.height(), ch, data),
        palette,
        iterations,
        error_history: history,
    })
}
