use serde::Serialize;

use crate::error::Result;
use crate::imaging::{adjust_contrast, hflip, invert, resize_bilinear, rotate, ImageBuffer};
use crate::rng::DeterministicRng;

use super::OnlinePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum PolicyOp {
    /// `applied` is false when the invert coin came up tails.
    Invert { applied: bool },
    Contrast { factor: f64 },
    Rotate { degrees: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnlineDraw {
    pub flip: bool,
    pub op: PolicyOp,
}

/// All random choices of one online augmentation, in draw order:
/// flip coin, op index, op parameter.
pub fn draw_online(policy: &OnlinePolicy, rng: &mut DeterministicRng) -> OnlineDraw {
    let flip = rng.bernoulli(policy.flip_prob);
    let op = match rng.range(0..3u8) {
        0 => PolicyOp::Invert {
            applied: rng.bernoulli(policy.invert_prob),
        },
        1 => {
            let (lo, hi) = policy.contrast_range;
            PolicyOp::Contrast {
                factor: lo + (hi - lo) * rng.unit(),
            }
        }
        _ => {
            let m = policy.max_rotation_deg;
            PolicyOp::Rotate {
                degrees: -m + 2.0 * m * rng.unit(),
            }
        }
    };
    OnlineDraw { flip, op }
}

/// Resize, flip and one policy op, as decided by `draw`.
pub fn apply_online(img: &ImageBuffer, policy: &OnlinePolicy, draw: &OnlineDraw) -> Result<ImageBuffer> {
    let mut out = resize_bilinear(img, policy.size, policy.size)?;
    if draw.flip {
        out = hflip(&out);
    }
    Ok(match draw.op {
        PolicyOp::Invert { applied: true } => invert(&out),
        PolicyOp::Invert { applied: false } => out,
        PolicyOp::Contrast { factor } => adjust_contrast(&out, factor),
        PolicyOp::Rotate { degrees } => rotate(&out, degrees),
    })
}

pub fn online_augment(img: &ImageBuffer, rng: &mut DeterministicRng, policy: &OnlinePolicy) -> Result<ImageBuffer> {
    let draw = draw_online(policy, rng);
    apply_online(img, policy, &draw)
}
