use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::recipes::{Label, Recipe, RecipeParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFilter {
    Real,
    Fake,
    #[default]
    Any,
}

impl SourceFilter {
    /// Unlabeled sources only match `Any`.
    pub fn matches(self, label: Option<Label>) -> bool {
        match self {
            SourceFilter::Any => true,
            SourceFilter::Real => label == Some(Label::Real),
            SourceFilter::Fake => label == Some(Label::Fake),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub recipe: Recipe,
    pub count: usize,
    #[serde(default)]
    pub source: SourceFilter,
    /// Training stage tag, carried through to the manifest only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<u8>,
    /// Overrides for this entry's recipe, e.g. `{ per_region_prob = 0.3 }` for cutout.
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub params: toml::Table,
}

impl PlanEntry {
    pub fn new(recipe: Recipe, count: usize) -> Self {
        Self {
            recipe,
            count,
            source: SourceFilter::Any,
            stage: None,
            params: toml::Table::new(),
        }
    }
}

/// A batch job: which recipes to run, how many times, on which sources.
///
/// ```toml
/// master_seed = 7
/// root = "images"
/// labels = "labels.csv"
/// landmarks = "landmarks"
///
/// [params.binarize]
/// jitter = 10
///
/// [[entry]]
/// recipe = "cutout"
/// count = 400
/// source = "fake"
/// [entry.params]
/// per_region_prob = 0.4
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationPlan {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmarks: Option<PathBuf>,
    /// Plan-wide recipe parameters; entry overrides sit on top.
    #[serde(default)]
    pub params: RecipeParams,
    #[serde(default, rename = "entry")]
    pub entries: Vec<PlanEntry>,
}

impl GenerationPlan {
    pub fn parse(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Input(format!("plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    /// Loads a plan; relative `root`, `labels` and `landmarks` resolve against
    /// the plan file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let mut plan = Self::parse(&text).map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut plan.root, &mut plan.labels, &mut plan.landmarks].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(plan)
    }

    /// The training-set mix: 40K cutout, 10K each of crop, overlay and
    /// cartoon, 5K each of sketch and binarize; every count divided by `divisor`.
    pub fn default_mix(master_seed: u64, divisor: usize) -> Self {
        let divisor = divisor.max(1);
        let counts = [
            (Recipe::Cutout, 40_000),
            (Recipe::Crop, 10_000),
            (Recipe::Overlay, 10_000),
            (Recipe::Cartoon, 10_000),
            (Recipe::Sketch, 5_000),
            (Recipe::Binarize, 5_000),
        ];
        Self {
            master_seed,
            entries: counts.iter().map(|&(r, n)| PlanEntry::new(r, n / divisor)).collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for i in 0..self.entries.len() {
            self.entry_params(i)?;
        }
        Ok(())
    }

    /// Effective params for entry `i`: built-in defaults, then plan-wide
    /// params, then the entry's own overrides.
    pub fn entry_params(&self, i: usize) -> Result<RecipeParams> {
        let entry = &self.entries[i];
        if entry.params.is_empty() {
            return Ok(self.params.clone());
        }
        let mut all = toml::Table::try_from(&self.params).map_err(|e| Error::Input(e.to_string()))?;
        let slot = all
            .get_mut(entry.recipe.name())
            .and_then(toml::Value::as_table_mut)
            .expect("every recipe has a params table");
        for (k, v) in &entry.params {
            slot.insert(k.clone(), v.clone());
        }
        let params: RecipeParams = toml::Value::Table(all)
            .try_into()
            .map_err(|e| Error::Input(format!("entry {i} ({}) params: {e}", entry.recipe)))?;
        params.validate()?;
        Ok(params)
    }

    pub fn total_count(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// sha256 over the canonical JSON form of the plan.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("plan serializes");
        hex::encode(Sha256::digest(json))
    }
}
