//! Batch orchestration: dataset scans, generation plans, seeded parallel
//! recipe execution with a JSONL manifest, detection runs, score correction
//! and online-augmentation previews.

mod execute;
mod plan;
mod scan;

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::cascade::{detect_multiscale, CascadeModel, DetectParams, DetectionReport};
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::landmarks::LandmarkStore;
use crate::postprocess::{batch_correct, load_scores, write_corrected, CorrectionPolicy, CorrectionSummary};
use crate::recipes::{apply_online, draw_online, OnlineDraw, OnlinePolicy};
use crate::rng::{mix_seed, DeterministicRng};

pub use execute::{
    execute_plan, verify_manifest, ManifestCheck, ManifestHeader, ManifestRecord, PoolSummary, RecordKind,
    RunManifest, MANIFEST_FILE, MAX_ATTEMPTS, TOOL_NAME, TOOL_VERSION,
};
pub use plan::{GenerationPlan, PlanEntry, SourceFilter};
pub use scan::{list_images, load_labels, scan_dataset, ScanIssue, SourceEntry, SourceIndex};

/// Detects faces in every image under `dir`; one report row per image.
/// Undecodable files are an input error.
pub fn run_detect(dir: &Path, cascade: &CascadeModel, params: &DetectParams) -> Result<DetectionReport> {
    let files = list_images(dir)?;
    let rows: Vec<_> = files
        .par_iter()
        .map(|(id, path)| {
            let img = ImageBuffer::load(path)?;
            let dets = detect_multiscale(cascade, &img, params)?;
            Ok((id.clone(), dets))
        })
        .collect::<Result<_>>()?;
    let mut report = DetectionReport::default();
    for (id, dets) in rows {
        report.insert(id, dets);
    }
    Ok(report)
}

/// Corrects a score table against a detection report and landmark sidecars,
/// writing `image_id,raw_score,corrected_score,evidence` to `out`.
pub fn run_postprocess(
    scores: &Path,
    report: &Path,
    landmarks: Option<&Path>,
    policy: &CorrectionPolicy,
    out: &Path,
) -> Result<CorrectionSummary> {
    policy.validate()?;
    let rows = load_scores(scores)?;
    let report = DetectionReport::load(report)?;
    let store = match landmarks {
        Some(p) => LandmarkStore::load(p)?,
        None => LandmarkStore::default(),
    };
    let table = batch_correct(&rows, &report, &store, policy)?;
    let f = std::fs::File::create(out).map_err(|e| Error::io(out, e))?;
    write_corrected(std::io::BufWriter::new(f), &table)?;
    Ok(table.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentRecord {
    pub image_id: String,
    pub output: String,
    pub draw: OnlineDraw,
}

/// Runs the online chain once per image under `in_dir`. Image `i` (in id
/// order) uses stream `i` of `seed`; outputs mirror the input tree as PNG.
pub fn run_augment(in_dir: &Path, out_dir: &Path, seed: u64, policy: &OnlinePolicy) -> Result<Vec<AugmentRecord>> {
    let files = list_images(in_dir)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    files
        .par_iter()
        .enumerate()
        .map(|(i, (id, path))| {
            let img = ImageBuffer::load(path)?;
            let mut rng = DeterministicRng::new(mix_seed(&[seed, 0x6175_676d]), i as u64);
            let draw = draw_online(policy, &mut rng);
            let out = apply_online(&img, policy, &draw)?;
            let rel = Path::new(id).with_extension("png");
            let dest = out_dir.join(&rel);
            if let Some(parent) = dest.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            out.save(&dest)?;
            Ok(AugmentRecord {
                image_id: id.clone(),
                output: rel.to_string_lossy().replace('\\', "/"),
                draw,
            })
        })
        .collect()
}
