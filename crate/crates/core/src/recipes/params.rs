use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmarks::DEFAULT_PAD;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoutParams {
    pub per_region_prob: f64,
    pub pad: f64,
    /// Redraw the selection until at least one region is erased.
    pub force_at_least_one: bool,
}

impl Default for CutoutParams {
    fn default() -> Self {
        Self {
            per_region_prob: 0.5,
            pad: DEFAULT_PAD,
            force_at_least_one: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CropParams {
    pub crop_size: usize,
    pub out_size: usize,
}

impl Default for CropParams {
    fn default() -> Self {
        Self {
            crop_size: 150,
            out_size: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlayParams {
    pub num_shifts: usize,
    pub max_shift: i64,
}

impl Default for OverlayParams {
    fn default() -> Self {
        Self {
            num_shifts: 4,
            max_shift: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartoonParams {
    pub k_colors: usize,
    pub block: usize,
    pub c: f64,
    pub median_kernel: usize,
    pub max_iters: usize,
}

impl Default for CartoonParams {
    fn default() -> Self {
        Self {
            k_colors: 8,
            block: 9,
            c: 2.0,
            median_kernel: 7,
            max_iters: crate::imaging::DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SketchParams {
    pub blur_sigma: f64,
    pub blur_kernel: usize,
}

impl Default for SketchParams {
    fn default() -> Self {
        Self {
            blur_sigma: 6.0,
            blur_kernel: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinarizeParams {
    pub center: i32,
    pub jitter: i32,
}

impl Default for BinarizeParams {
    fn default() -> Self {
        Self {
            center: 128,
            jitter: 20,
        }
    }
}

/// Parameters of all six offline recipes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecipeParams {
    pub cutout: CutoutParams,
    pub crop: CropParams,
    pub overlay: OverlayParams,
    pub cartoon: CartoonParams,
    pub sketch: SketchParams,
    pub binarize: BinarizeParams,
}

impl RecipeParams {
    pub fn validate(&self) -> Result<()> {
        let c = &self.cutout;
        if !(0.0..=1.0).contains(&c.per_region_prob) {
            return Err(Error::param(format!("per_region_prob {} not in [0,1]", c.per_region_prob)));
        }
        if !(c.pad >= 0.0) || !c.pad.is_finite() {
            return Err(Error::param("cutout pad must be a finite non-negative number"));
        }
        if c.force_at_least_one && c.per_region_prob == 0.0 {
            return Err(Error::param("cannot force an erased region with per_region_prob = 0"));
        }
        if self.crop.crop_size == 0 || self.crop.out_size == 0 {
            return Err(Error::param("crop sizes must be positive"));
        }
        if self.overlay.num_shifts == 0 || self.overlay.max_shift < 1 {
            return Err(Error::param("overlay needs num_shifts >= 1 and max_shift >= 1"));
        }
        let k = &self.cartoon;
        if k.k_colors < 2 {
            return Err(Error::param("cartoon k_colors must be >= 2"));
        }
        if k.block < 3 || k.block.is_multiple_of(2) || k.median_kernel < 3 || k.median_kernel.is_multiple_of(2) {
            return Err(Error::param("cartoon block and median_kernel must be odd and >= 3"));
        }
        let s = &self.sketch;
        if s.blur_kernel < 3 || s.blur_kernel.is_multiple_of(2) || !(s.blur_sigma > 0.0) {
            return Err(Error::param("sketch blur needs an odd kernel >= 3 and sigma > 0"));
        }
        let b = &self.binarize;
        if b.jitter < 0 || b.center - b.jitter < 0 || b.center + b.jitter > 255 {
            return Err(Error::param(format!(
                "binarize range {}±{} must lie inside [0,255]",
                b.center, b.jitter
            )));
        }
        Ok(())
    }
}

/// Online augmentation policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlinePolicy {
    pub size: usize,
    pub flip_prob: f64,
    /// Applied when the invert op is the one drawn.
    pub invert_prob: f64,
    pub contrast_range: (f64, f64),
    pub max_rotation_deg: f64,
}

impl Default for OnlinePolicy {
    fn default() -> Self {
        Self {
            size: 256,
            flip_prob: 0.5,
            invert_prob: 0.2,
            contrast_range: (0.6, 1.4),
            max_rotation_deg: 30.0,
        }
    }
}
