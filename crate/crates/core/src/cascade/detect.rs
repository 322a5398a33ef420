use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{scale_len, CascadeModel, IntegralPair};
use crate::error::{Error, Result};
use crate::imaging::{to_grayscale, ImageBuffer, Rect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectParams {
    pub scale_factor: f64,
    pub min_neighbors: usize,
    pub min_size: usize,
    /// Two hits join a group when their IoU reaches this.
    pub group_iou: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            scale_factor: 1.1,
            min_neighbors: 3,
            min_size: 30,
            group_iou: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub rect: Rect,
    pub neighbors: usize,
}

/// Multi-scale sliding-window detection.
///
/// Scales run `1, f, f^2, ...` until the scaled window no longer fits; the
/// stride at scale `s` is `max(1, round(s))`. With `min_neighbors == 0` the
/// raw hits are returned ungrouped.
pub fn detect_multiscale(model: &CascadeModel, img: &ImageBuffer, params: &DetectParams) -> Result<Vec<Detection>> {
    if !(params.scale_factor > 1.0) || !params.scale_factor.is_finite() {
        return Err(Error::param(format!("scale_factor must be > 1, got {}", params.scale_factor)));
    }
    let gray = to_grayscale(img);
    let (iw, ih) = (gray.width(), gray.height());
    if iw < model.window_w || ih < model.window_h {
        return Ok(Vec::new());
    }
    let ints = IntegralPair::new(&gray)?;

    let mut scales = Vec::new();
    let mut s = 1.0f64;
    loop {
        let (w, h) = (scale_len(model.window_w, s), scale_len(model.window_h, s));
        if w > iw || h > ih {
            break;
        }
        if w >= params.min_size && h >= params.min_size {
            scales.push(s);
        }
        s *= params.scale_factor;
    }

    let mut hits: Vec<Rect> = scales
        .par_iter()
        .flat_map_iter(|&s| {
            let sc = model.scaled(s);
            let (w, h) = sc.window_size();
            let step = (s.round() as usize).max(1);
            let mut found = Vec::new();
            for y in (0..=ih - h).step_by(step) {
                for x in (0..=iw - w).step_by(step) {
                    if sc.eval(&ints, x, y) {
                        found.push(Rect::new(x, y, w, h));
                    }
                }
            }
            found
        })
        .collect();
    hits.sort_by_key(|r| (r.y, r.x, r.w, r.h));

    if params.min_neighbors == 0 {
        return Ok(hits.into_iter().map(|rect| Detection { rect, neighbors: 1 }).collect());
    }
    Ok(group_hits(&hits, params.group_iou, params.min_neighbors))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Union-find grouping of overlapping hits; each group with at least
/// `min_neighbors` members becomes one detection whose edges are the
/// rounded means of its members' edges.
pub fn group_hits(hits: &[Rect], min_iou: f64, min_neighbors: usize) -> Vec<Detection> {
    let n = hits.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if hits[i].iou(&hits[j]) >= min_iou {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups
        .into_iter()
        .filter(|g| !g.is_empty() && g.len() >= min_neighbors.max(1))
        .map(|g| {
            let k = g.len() as f64;
            let mean = |f: &dyn Fn(&Rect) -> usize| (g.iter().map(|&i| f(&hits[i]) as f64).sum::<f64>() / k).round() as usize;
            let x = mean(&|r| r.x);
            let y = mean(&|r| r.y);
            let right = mean(&|r| r.right());
            let bottom = mean(&|r| r.bottom());
            Detection {
                rect: Rect::new(x, y, right - x, bottom - y),
                neighbors: g.len(),
            }
        })
        .collect()
}
