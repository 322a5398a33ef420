//! Viola-Jones face detection over a boosted Haar cascade.
//!
//! Windows are scanned over a pyramid of *feature* scales against a single
//! pair of integral images. Each window is variance-normalized, then passed
//! through the stages in order; the first stage whose vote sum falls below
//! its threshold rejects it.

mod detect;
mod integral;
mod parse;
mod report;

use std::path::Path;

use thiserror::Error;

use crate::imaging::Rect;

pub use detect::{detect_multiscale, group_hits, DetectParams, Detection};
pub use integral::{integral_images, IntegralPair};
pub use parse::parse_cascade;
pub use report::{DetectionReport, REPORT_HEADER};

/// Subtracted from every stage threshold before comparison, matching the
/// reference detector's float tolerance.
pub const STAGE_THRESHOLD_EPS: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("cascade xml is not well formed: {0}")]
    Xml(String),
    #[error("malformed cascade: {0}")]
    Malformed(String),
    #[error("unsupported stage type `{0}` (only BOOST)")]
    UnsupportedStageType(String),
    #[error("unsupported feature type `{0}` (only HAAR)")]
    UnsupportedFeatureType(String),
    #[error("feature {0} is tilted; tilted Haar features are not supported")]
    TiltedFeature(usize),
    #[error("feature {feature} rect {rect:?} lies outside the detection window")]
    RectOutOfWindow { feature: usize, rect: Rect },
    #[error("cannot read cascade {path}: {msg}")]
    Read { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarRect {
    pub rect: Rect,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarFeature {
    pub rects: Vec<HaarRect>,
}

/// Split node; a child `<= 0` names leaf `-child`, `> 0` another node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub left: i32,
    pub right: i32,
    pub feature: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakClassifier {
    pub nodes: Vec<TreeNode>,
    pub leaves: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub threshold: f64,
    pub weak: Vec<WeakClassifier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeModel {
    pub window_w: usize,
    pub window_h: usize,
    pub stages: Vec<Stage>,
    pub features: Vec<HaarFeature>,
}

impl CascadeModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CascadeError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| CascadeError::Read {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        parse_cascade(&bytes)
    }

    /// Precomputes rect geometry and weights for one pyramid scale.
    pub fn scaled(&self, scale: f64) -> ScaledCascade<'_> {
        ScaledCascade::new(self, scale)
    }
}

#[derive(Debug, Clone)]
struct ScaledFeature {
    rects: Vec<(Rect, f64)>,
}

/// A cascade with every feature rect mapped to one scale.
///
/// Rects are scaled with round-to-nearest and clipped to the scaled window.
/// The first rect's weight is then recomputed so the weighted areas sum to
/// zero, keeping features blind to flat brightness after rounding.
#[derive(Debug, Clone)]
pub struct ScaledCascade<'m> {
    model: &'m CascadeModel,
    scale: f64,
    win_w: usize,
    win_h: usize,
    norm: Rect,
    features: Vec<ScaledFeature>,
}

pub(crate) fn scale_len(v: usize, scale: f64) -> usize {
    (v as f64 * scale).round() as usize
}

impl<'m> ScaledCascade<'m> {
    fn new(model: &'m CascadeModel, scale: f64) -> Self {
        let win_w = scale_len(model.window_w, scale).max(1);
        let win_h = scale_len(model.window_h, scale).max(1);
        // normalization area excludes a one-pixel (scaled) border
        let inset = scale.round() as usize;
        let norm = Rect::new(
            inset,
            inset,
            scale_len(model.window_w - 2, scale).max(1),
            scale_len(model.window_h - 2, scale).max(1),
        );
        let features = model
            .features
            .iter()
            .map(|f| {
                let mut rects: Vec<(Rect, f64)> = f
                    .rects
                    .iter()
                    .map(|hr| {
                        let x = scale_len(hr.rect.x, scale).min(win_w - 1);
                        let y = scale_len(hr.rect.y, scale).min(win_h - 1);
                        let w = scale_len(hr.rect.w, scale).clamp(1, win_w - x);
                        let h = scale_len(hr.rect.h, scale).clamp(1, win_h - y);
                        (Rect::new(x, y, w, h), hr.weight)
                    })
                    .collect();
                let rest: f64 = rects[1..].iter().map(|(r, w)| w * r.area() as f64).sum();
                rects[0].1 = -rest / rects[0].0.area() as f64;
                ScaledFeature { rects }
            })
            .collect();
        Self {
            model,
            scale,
            win_w,
            win_h,
            norm,
            features,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn window_size(&self) -> (usize, usize) {
        (self.win_w, self.win_h)
    }

    /// Normalization rect relative to the window origin.
    pub fn norm_rect(&self) -> Rect {
        self.norm
    }

    /// Scaled rects and weights of feature `i`, relative to the window origin.
    pub fn feature_rects(&self, i: usize) -> &[(Rect, f64)] {
        &self.features[i].rects
    }

    /// Whether the window at `(x, y)` passes every stage.
    pub fn eval(&self, ints: &IntegralPair, x: usize, y: usize) -> bool {
        let at = |r: Rect| Rect::new(x + r.x, y + r.y, r.w, r.h);
        let norm = at(self.norm);
        let s = ints.rect_sum(norm) as i128;
        let q = ints.rect_sq_sum(norm) as i128;
        let area_i = norm.area() as i128;
        // area^2 * variance, exact in integers
        let var = (area_i * q - s * s) as f64;
        let area = area_i as f64;
        // scaled stddev; flat windows fall back to stddev 1 (times area)
        let nf = if var > 0.0 { var.sqrt() } else { area };

        for stage in &self.model.stages {
            let mut sum = 0.0;
            for wc in &stage.weak {
                let mut idx = 0usize;
                let leaf = loop {
                    let node = &wc.nodes[idx];
                    let mut value = 0.0;
                    for &(r, w) in &self.features[node.feature].rects {
                        value += w * ints.rect_sum(at(r)) as f64;
                    }
                    let next = if value < node.threshold * nf { node.left } else { node.right };
                    if next <= 0 {
                        break wc.leaves[(-next) as usize];
                    }
                    idx = next as usize;
                };
                sum += leaf;
            }
            if sum < stage.threshold - STAGE_THRESHOLD_EPS {
                return false;
            }
        }
        true
    }
}

/// Evaluates one window at `origin` and `scale`. The scaled window must lie
/// inside the integral image.
pub fn eval_window(model: &CascadeModel, ints: &IntegralPair, origin: (usize, usize), scale: f64) -> bool {
    model.scaled(scale).eval(ints, origin.0, origin.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ImageBuffer;

    fn tiny() -> CascadeModel {
        parse_cascade(include_str!("../../data/tiny_cascade.xml").as_bytes()).unwrap()
    }

    #[test]
    fn flat_window_uses_unit_stddev() {
        // the single feature is zero-mean, so value 0 vs threshold 0.1*area -> left leaf -1
        let m = tiny();
        let flat = ImageBuffer::filled(4, 4, &[77]).unwrap();
        let ii = IntegralPair::new(&flat).unwrap();
        assert!(!eval_window(&m, &ii, (0, 0), 1.0));
    }

    #[test]
    fn bright_left_half_passes() {
        let m = tiny();
        let img = ImageBuffer::from_fn(4, 4, 1, |x, _, _| if x < 2 { 200 } else { 10 }).unwrap();
        let ii = IntegralPair::new(&img).unwrap();
        assert!(eval_window(&m, &ii, (0, 0), 1.0));
        let swapped = ImageBuffer::from_fn(4, 4, 1, |x, _, _| if x < 2 { 10 } else { 200 }).unwrap();
        let ii = IntegralPair::new(&swapped).unwrap();
        assert!(!eval_window(&m, &ii, (0, 0), 1.0));
    }

    #[test]
    fn weights_rebalanced_at_every_scale() {
        let m = tiny();
        for s in [1.0, 1.1, 1.37, 2.0, 3.3] {
            let sc = m.scaled(s);
            let total: f64 = sc.feature_rects(0).iter().map(|(r, w)| w * r.area() as f64).sum();
            assert!(total.abs() < 1e-9, "scale {s}: {total}");
        }
    }
}
