//! Seeded negative-sample recipes and the online augmentation chain.
//!
//! Every recipe is a pure function of (image, landmarks, params, rng). The
//! random draws each recipe makes are echoed into
//! [`GeneratedSample::params_used`] so a manifest entry fully describes how
//! its image was made.

mod offline;
mod online;
mod params;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::landmarks::LandmarkSet;
use crate::rng::DeterministicRng;

pub use offline::*;
pub use online::*;
pub use params::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" | "0" => Ok(Label::Real),
            "fake" | "1" => Ok(Label::Fake),
            other => Err(Error::Input(format!("unknown label `{other}`"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Real => "real",
            Label::Fake => "fake",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    Cutout,
    Crop,
    Overlay,
    Cartoon,
    Sketch,
    Binarize,
}

impl Recipe {
    pub const ALL: [Recipe; 6] = [
        Recipe::Cutout,
        Recipe::Crop,
        Recipe::Overlay,
        Recipe::Cartoon,
        Recipe::Sketch,
        Recipe::Binarize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Cutout => "cutout",
            Recipe::Crop => "crop",
            Recipe::Overlay => "overlay",
            Recipe::Cartoon => "cartoon",
            Recipe::Sketch => "sketch",
            Recipe::Binarize => "binarize",
        }
    }

    pub fn requires_landmarks(self) -> bool {
        matches!(self, Recipe::Cutout)
    }

    /// Cheap shape check so batch planners can filter source pools up front.
    pub fn accepts(self, width: usize, height: usize, channels: usize, params: &RecipeParams) -> bool {
        match self {
            Recipe::Crop => width >= params.crop.crop_size && height >= params.crop.crop_size,
            Recipe::Cartoon => channels == 3 && width * height >= params.cartoon.k_colors,
            _ => true,
        }
    }

    pub fn apply(
        self,
        input: &RecipeInput<'_>,
        params: &RecipeParams,
        rng: &mut DeterministicRng,
    ) -> Result<GeneratedSample> {
        let img = input.image;
        let mut s = match self {
            Recipe::Cutout => {
                let lms = input.landmarks.ok_or_else(|| Error::Inapplicable {
                    recipe: self.name(),
                    reason: format!("no landmarks for `{}`", input.source_id),
                })?;
                cutout_facial_regions(img, lms, &params.cutout, rng)?
            }
            Recipe::Crop => local_crop_enlarge(img, &params.crop, rng)?,
            Recipe::Overlay => gray_translate_overlay(img, &params.overlay, rng)?,
            Recipe::Cartoon => cartoonize(img, &params.cartoon, rng)?,
            Recipe::Sketch => sketch(img, &params.sketch, rng)?,
            Recipe::Binarize => binarize_random(img, &params.binarize, rng)?,
        };
        s.source_id = input.source_id.to_string();
        Ok(s)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown recipe `{s}`")))
    }
}

pub struct RecipeInput<'a> {
    pub source_id: &'a str,
    pub image: &'a ImageBuffer,
    pub landmarks: Option<&'a LandmarkSet>,
}

#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub image: ImageBuffer,
    pub recipe: Recipe,
    pub source_id: String,
    pub seed: u64,
    pub label: Label,
    pub params_used: serde_json::Value,
}

impl GeneratedSample {
    fn new(recipe: Recipe, image: ImageBuffer, seed: u64, params_used: serde_json::Value) -> Self {
        Self {
            image,
            recipe,
            source_id: String::new(),
            seed,
            label: Label::Fake,
            params_used,
        }
    }
}
