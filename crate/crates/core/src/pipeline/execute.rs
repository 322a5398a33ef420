use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::plan::GenerationPlan;
use super::scan::{SourceEntry, SourceIndex};
use crate::error::{Error, Result};
use crate::landmarks::{LandmarkSet, LandmarkStore};
use crate::recipes::{Label, Recipe, RecipeInput, RecipeParams};
use crate::rng::{item_seed, DeterministicRng};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Attempts per item before an entry is declared unfulfillable.
pub const MAX_ATTEMPTS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub entry: usize,
    pub recipe: Recipe,
    pub pool_size: usize,
    pub excluded: usize,
}

/// First line of the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub tool: String,
    pub version: String,
    pub plan_hash: String,
    pub master_seed: u64,
    pub plan: GenerationPlan,
    /// Resolved params, one per plan entry.
    pub effective_params: Vec<RecipeParams>,
    pub pools: Vec<PoolSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Sample,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub kind: RecordKind,
    pub entry: usize,
    pub item: usize,
    pub attempt: u64,
    pub recipe: Recipe,
    pub source_id: String,
    pub item_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<u8>,
    /// Output path relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
    /// Source already used by an earlier item of the same entry.
    #[serde(default)]
    pub reused: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub header: ManifestHeader,
    pub records: Vec<ManifestRecord>,
}

impl RunManifest {
    pub fn samples(&self) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::Sample)
    }

    pub fn skips(&self) -> impl Iterator<Item = &ManifestRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::Skip)
    }

    pub fn counts_by_recipe(&self) -> BTreeMap<Recipe, usize> {
        let mut m = BTreeMap::new();
        for r in self.samples() {
            *m.entry(r.recipe).or_insert(0) += 1;
        }
        m
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = serde_json::to_string(&self.header).expect("header serializes");
        s.push('\n');
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    pub fn parse_jsonl(text: &str, origin: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: line as u64,
            msg,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| perr(1, "empty manifest".into()))?;
        let header = serde_json::from_str(first).map_err(|e| perr(1, e.to_string()))?;
        let records = lines
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| perr(i + 1, e.to_string())))
            .collect::<Result<_>>()?;
        Ok(Self { header, records })
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::parse_jsonl(&text, &path)
    }
}

fn landmarks_for<'a>(store: &'a LandmarkStore, src: &SourceEntry) -> Option<&'a LandmarkSet> {
    store.get(&src.id).or_else(|| store.get(src.file_name()))
}

struct Job<'a> {
    entry: usize,
    recipe: Recipe,
    stage: Option<u8>,
    params: &'a RecipeParams,
    pool: &'a [&'a SourceEntry],
}

/// Runs every plan entry and writes outputs plus `manifest.jsonl` into `out_dir`.
///
/// Item `i` of entry `e` derives all of its randomness from
/// `item_seed(master_seed, e, i)`: attempt `a` picks its source on stream
/// `2a` and runs the recipe on stream `2a + 1`. A recipe that turns out to be
/// inapplicable to the chosen source leaves a skip record and the item moves
/// to its next attempt. Results therefore do not depend on `workers`.
pub fn execute_plan(
    plan: &GenerationPlan,
    index: &SourceIndex,
    landmarks: &LandmarkStore,
    out_dir: &Path,
    workers: usize,
) -> Result<RunManifest> {
    plan.validate()?;
    if workers == 0 {
        return Err(Error::param("workers must be at least 1"));
    }
    let params: Vec<RecipeParams> = (0..plan.entries.len())
        .map(|i| plan.entry_params(i))
        .collect::<Result<_>>()?;

    let mut pools: Vec<Vec<&SourceEntry>> = Vec::new();
    let mut pool_summaries = Vec::new();
    for (i, entry) in plan.entries.iter().enumerate() {
        let pool: Vec<&SourceEntry> = index
            .entries
            .iter()
            .filter(|s| entry.source.matches(s.label))
            .filter(|s| entry.recipe.accepts(s.width, s.height, s.channels, &params[i]))
            .filter(|s| !entry.recipe.requires_landmarks() || landmarks_for(landmarks, s).is_some())
            .collect();
        if pool.is_empty() && entry.count > 0 {
            return Err(Error::Unfulfillable {
                entry: i,
                recipe: entry.recipe.name().to_string(),
                reason: format!(
                    "no {:?} source among {} indexed images fits the recipe{}",
                    entry.source,
                    index.len(),
                    if entry.recipe.requires_landmarks() { " and has landmarks" } else { "" }
                ),
            });
        }
        pool_summaries.push(PoolSummary {
            entry: i,
            recipe: entry.recipe,
            pool_size: pool.len(),
            excluded: index.len() - pool.len(),
        });
        pools.push(pool);
    }

    prepare_out_dir(out_dir)?;
    for entry in &plan.entries {
        let d = out_dir.join(entry.recipe.name());
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let jobs: Vec<Job> = plan
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| Job {
            entry: i,
            recipe: e.recipe,
            stage: e.stage,
            params: &params[i],
            pool: &pools[i],
        })
        .collect();
    let items: Vec<(usize, usize)> = jobs
        .iter()
        .flat_map(|j| (0..plan.entries[j.entry].count).map(move |k| (j.entry, k)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    let per_item: Vec<Vec<ManifestRecord>> = pool.install(|| {
        items
            .par_iter()
            .map(|&(e, k)| run_item(plan.master_seed, &jobs[e], k, landmarks, out_dir))
            .collect::<Result<_>>()
    })?;

    let mut records: Vec<ManifestRecord> = per_item.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.entry, r.item, r.attempt));
    let mut seen: BTreeSet<(usize, String)> = BTreeSet::new();
    for r in records.iter_mut().filter(|r| r.kind == RecordKind::Sample) {
        r.reused = !seen.insert((r.entry, r.source_id.clone()));
    }

    let manifest = RunManifest {
        header: ManifestHeader {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            plan_hash: plan.hash(),
            master_seed: plan.master_seed,
            plan: plan.clone(),
            effective_params: params,
            pools: pool_summaries,
        },
        records,
    };
    write_atomic(&out_dir.join(MANIFEST_FILE), manifest.to_jsonl().as_bytes())?;
    Ok(manifest)
}

fn prepare_out_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut it = std::fs::read_dir(out_dir).map_err(|e| Error::io(out_dir, e))?;
    if it.next().is_some() {
        return Err(Error::Input(format!(
            "output directory {} is not empty",
            out_dir.display()
        )));
    }
    Ok(())
}

fn run_item(
    master_seed: u64,
    job: &Job<'_>,
    item: usize,
    landmarks: &LandmarkStore,
    out_dir: &Path,
) -> Result<Vec<ManifestRecord>> {
    let seed = item_seed(master_seed, job.entry as u64, item as u64);
    let mut records = Vec::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut pick = DeterministicRng::new(seed, 2 * attempt);
        let src = job.pool[pick.range(0..job.pool.len())];
        let image = src.load()?;
        let input = RecipeInput {
            source_id: &src.id,
            image: &image,
            landmarks: landmarks_for(landmarks, src),
        };
        let mut rng = DeterministicRng::new(seed, 2 * attempt + 1);
        let mut rec = ManifestRecord {
            kind: RecordKind::Skip,
            entry: job.entry,
            item,
            attempt,
            recipe: job.recipe,
            source_id: src.id.clone(),
            item_seed: seed,
            stage: job.stage,
            output: None,
            sha256: None,
            label: None,
            params: serde_json::Value::Null,
            reused: false,
            reason: None,
        };
        match job.recipe.apply(&input, job.params, &mut rng) {
            Ok(sample) => {
                let rel = format!("{}/{:02}_{:06}.png", job.recipe.name(), job.entry, item);
                let bytes = sample.image.encode_png()?;
                let path = out_dir.join(&rel);
                std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
                rec.kind = RecordKind::Sample;
                rec.output = Some(rel);
                rec.sha256 = Some(hex::encode(Sha256::digest(&bytes)));
                rec.label = Some(sample.label);
                rec.params = sample.params_used;
                records.push(rec);
                return Ok(records);
            }
            Err(Error::Inapplicable { reason, .. }) => {
                rec.reason = Some(reason);
                records.push(rec);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Unfulfillable {
        entry: job.entry,
        recipe: job.recipe.name().to_string(),
        reason: format!("item {item}: no applicable source after {MAX_ATTEMPTS} attempts"),
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestCheck {
    pub samples: usize,
    pub skips: usize,
}

/// Checks that `out_dir` holds exactly the files its manifest lists, each
/// with the recorded digest.
pub fn verify_manifest(out_dir: &Path) -> Result<ManifestCheck> {
    let m = RunManifest::load(out_dir)?;
    let mut listed = BTreeSet::new();
    for r in m.samples() {
        let rel = r
            .output
            .as_deref()
            .ok_or_else(|| Error::Input(format!("sample record {}/{} has no output", r.entry, r.item)))?;
        let path = out_dir.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if r.sha256.as_deref() != Some(hex::encode(Sha256::digest(&bytes)).as_str()) {
            return Err(Error::Input(format!("{rel}: digest mismatch")));
        }
        if !listed.insert(PathBuf::from(rel)) {
            return Err(Error::Input(format!("{rel} listed twice")));
        }
    }
    for entry in walkdir::WalkDir::new(out_dir) {
        let entry = entry.map_err(|e| Error::Input(e.to_string()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(out_dir).unwrap_or(entry.path());
        if rel == Path::new(MANIFEST_FILE) {
            continue;
        }
        if !listed.contains(rel) {
            return Err(Error::Input(format!("{} is not in the manifest", rel.display())));
        }
    }
    let samples = listed.len();
    let expected = m.header.plan.total_count();
    if samples != expected {
        return Err(Error::Input(format!("manifest has {samples} samples, plan asks for {expected}")));
    }
    Ok(ManifestCheck {
        samples,
        skips: m.skips().count(),
    })
}
