use forgery_kit::cascade::CascadeModel;
use forgery_kit::imaging::{ImageBuffer, Rect};

pub fn naive_sum(img: &ImageBuffer, r: Rect) -> u64 {
    let mut s = 0u64;
    for y in r.y..r.bottom() {
        for x in r.x..r.right() {
            s += img.get(x, y, 0) as u64;
        }
    }
    s
}

pub fn naive_sq_sum(img: &ImageBuffer, r: Rect) -> u64 {
    let mut s = 0u64;
    for y in r.y..r.bottom() {
        for x in r.x..r.right() {
            s += (img.get(x, y, 0) as u64).pow(2);
        }
    }
    s
}
pub fn round_len(v: usize, s: f64) -> usize {
    (v as f64 * s).round() as usize
}

/// Straight-line evaluator over raw pixels: rescales the model itself and
/// sums every rect pixel by pixel.
pub fn naive_eval(model: &CascadeModel, img: &ImageBuffer, ox: usize, oy: usize, s: f64) -> bool {
    let ww = round_len(model.window_w, s).max(1);
    let wh = round_len(model.window_h, s).max(1);
    let inset = s.round() as usize;
    let norm = Rect::new(
        ox + inset,
        oy + inset,
        round_len(model.window_w - 2, s).max(1),
        round_len(model.window_h - 2, s).max(1),
    );
    let area = norm.area() as i128;
    let sum = naive_sum(img, norm) as i128;
    let sq = naive_sq_sum(img, norm) as i128;
    let var = (area * sq - sum * sum) as f64;
    let nf = if var > 0.0 { var.sqrt() } else { area as f64 };

    let feature_value = |fi: usize| -> f64 {
        let mut rects = Vec::new();
        for hr in &model.features[fi].rects {
            let x = round_len(hr.rect.x, s).min(ww - 1);
            let y = round_len(hr.rect.y, s).min(wh - 1);
            let w = round_len(hr.rect.w, s).clamp(1, ww - x);
            let h = round_len(hr.rect.h, s).clamp(1, wh - y);
            rects.push((Rect::new(ox + x, oy + y, w, h), hr.weight));
        }
        let mut tail = 0.0;
        for (r, w) in &rects[1..] {
            tail += w * r.area() as f64;
        }
        rects[0].1 = -tail / rects[0].0.area() as f64;
        let mut v = 0.0;
        for (r, w) in &rects {
            v += w * naive_sum(img, *r) as f64;
        }
        v
    };

    for stage in &model.stages {
        let mut total = 0.0;
        for wc in &stage.weak {
            let mut node = 0i32;
            let leaf = loop {
                let n = &wc.nodes[node as usize];
                let next = if feature_value(n.feature) < n.threshold * nf { n.left } else { n.right };
                if next <= 0 {
                    break wc.leaves[(-next) as usize];
                }
                node = next;
            };
            total += leaf;
        }
        if total < stage.threshold - 1e-5 {
            return false;
        }
    }
    true
}
