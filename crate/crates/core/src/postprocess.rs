//! Detector-driven correction of borderline classifier scores.
//!
//! A score `s` near 0.5 is nudged by `e * w(s)` where the evidence `e` comes
//! from the Haar detector and the landmark sidecars, and
//! `w(s) = max(0, 1 - |s - 0.5| / tau)` fades the nudge out at the band edges.
//! For `|delta| <= tau` the map stays monotone in `s`.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cascade::{Detection, DetectionReport};
use crate::error::{Error, Result};
use crate::landmarks::{LandmarkSet, LandmarkStore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionPolicy {
    /// Half-width of the band around 0.5 that may be modified.
    pub tau: f64,
    /// Signed push toward "fake" applied at the band center.
    pub delta: f64,
}

impl Default for CorrectionPolicy {
    fn default() -> Self {
        Self { tau: 0.15, delta: 0.10 }
    }
}

impl CorrectionPolicy {
    pub fn new(tau: f64, delta: f64) -> Result<Self> {
        let p = Self { tau, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::param(format!("tau must be in (0, 0.5), got {}", self.tau)));
        }
        if !self.delta.is_finite() || self.delta.abs() > self.tau {
            return Err(Error::param(format!(
                "|delta| must not exceed tau ({}), got {}",
                self.tau, self.delta
            )));
        }
        Ok(())
    }

    pub fn weight(&self, s: f64) -> f64 {
        (1.0 - (s - 0.5).abs() / self.tau).max(0.0)
    }

    pub fn push(&self, evidence: Evidence) -> f64 {
        match evidence {
            Evidence::NoFace => self.delta,
            Evidence::ConsistentFace => -self.delta,
            Evidence::Mixed | Evidence::Missing => 0.0,
        }
    }

    /// `clamp(s + e * w(s), 0, 1)`, evaluated per half-band as
    /// `(0.5 + e) ± d * (1 ∓ e / tau)` with `d = |s - 0.5|`. Each half is then
    /// a nonnegative multiple of `d` added to a constant, so rounding cannot
    /// break monotonicity where the exact map is flat (`|delta| = tau`).
    /// In-band results are held between the outermost untouched scores.
    pub fn apply(&self, s: f64, evidence: Evidence) -> f64 {
        if self.weight(s) == 0.0 {
            return s;
        }
        let e = self.push(evidence);
        let center = 0.5 + e;
        let d = (s - 0.5).abs();
        let c = if s >= 0.5 {
            center + d * (1.0 - e / self.tau)
        } else {
            center - d * (1.0 + e / self.tau)
        };
        let (lo, hi) = self.band_edges();
        c.clamp(lo, hi).clamp(0.0, 1.0)
    }

    /// Largest score below 0.5 and smallest above it with zero weight.
    fn band_edges(&self) -> (f64, f64) {
        let mut lo = 0.5 - self.tau;
        while self.weight(lo) > 0.0 {
            lo = lo.next_down();
        }
        while self.weight(lo.next_up()) == 0.0 {
            lo = lo.next_up();
        }
        let mut hi = 0.5 + self.tau;
        while self.weight(hi) > 0.0 {
            hi = hi.next_up();
        }
        while self.weight(hi.next_down()) == 0.0 {
            hi = hi.next_down();
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Neither detector found a face.
    NoFace,
    /// A Haar box contains the landmark centroid.
    ConsistentFace,
    /// Any other combination.
    Mixed,
    /// The image has no row in the detection report.
    Missing,
}

impl Evidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Evidence::NoFace => "no_face",
            Evidence::ConsistentFace => "consistent_face",
            Evidence::Mixed => "mixed",
            Evidence::Missing => "missing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub image_id: String,
    pub raw_score: f64,
    pub haar_faces: usize,
    pub landmarks_present: bool,
    pub landmarks_inside_haar: bool,
    pub detection_missing: bool,
    pub corrected_score: f64,
}

impl ScoreRecord {
    /// Joins one score with its detector and landmark evidence.
    pub fn from_evidence(
        image_id: &str,
        raw_score: f64,
        detections: Option<&[Detection]>,
        landmarks: Option<&LandmarkSet>,
    ) -> Self {
        let dets = detections.unwrap_or(&[]);
        let inside = landmarks.is_some_and(|l| {
            let c = l.centroid();
            dets.iter().any(|d| d.rect.contains_point(c.x, c.y))
        });
        Self {
            image_id: image_id.to_string(),
            raw_score,
            haar_faces: dets.len(),
            landmarks_present: landmarks.is_some(),
            landmarks_inside_haar: inside,
            detection_missing: detections.is_none(),
            corrected_score: raw_score,
        }
    }

    pub fn evidence(&self) -> Evidence {
        if self.detection_missing {
            Evidence::Missing
        } else if self.haar_faces == 0 && !self.landmarks_present {
            Evidence::NoFace
        } else if self.landmarks_inside_haar {
            Evidence::ConsistentFace
        } else {
            Evidence::Mixed
        }
    }
}

pub fn correct_score(rec: &ScoreRecord, policy: &CorrectionPolicy) -> f64 {
    policy.apply(rec.raw_score, rec.evidence())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub image_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorrectionSummary {
    pub raised: usize,
    pub lowered: usize,
    pub untouched: usize,
    /// Rows without a detection-report entry.
    pub missing_evidence: usize,
}

impl std::fmt::Display for CorrectionSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "raised={} lowered={} untouched={} missing_evidence={}",
            self.raised, self.lowered, self.untouched, self.missing_evidence
        )
    }
}

#[derive(Debug, Clone)]
pub struct CorrectedTable {
    pub records: Vec<ScoreRecord>,
    pub summary: CorrectionSummary,
}

/// Applies one correction pass to every row, preserving input order.
pub fn batch_correct(
    scores: &[ScoreRow],
    detections: &DetectionReport,
    landmarks: &LandmarkStore,
    policy: &CorrectionPolicy,
) -> Result<CorrectedTable> {
    policy.validate()?;
    let mut seen = BTreeSet::new();
    for r in scores {
        if !seen.insert(r.image_id.as_str()) {
            return Err(Error::Input(format!("duplicate image id `{}` in scores", r.image_id)));
        }
    }
    let mut summary = CorrectionSummary::default();
    let records = scores
        .iter()
        .map(|row| {
            let lms = landmarks.get(&row.image_id).or_else(|| {
                Path::new(&row.image_id)
                    .file_name()
                    .and_then(|n| n.to_str())
                    .and_then(|n| landmarks.get(n))
            });
            let mut rec = ScoreRecord::from_evidence(&row.image_id, row.score, detections.get(&row.image_id), lms);
            rec.corrected_score = correct_score(&rec, policy);
            if rec.detection_missing {
                summary.missing_evidence += 1;
            }
            match rec.corrected_score.partial_cmp(&rec.raw_score) {
                Some(std::cmp::Ordering::Greater) => summary.raised += 1,
                Some(std::cmp::Ordering::Less) => summary.lowered += 1,
                _ => summary.untouched += 1,
            }
            rec
        })
        .collect();
    Ok(CorrectedTable { records, summary })
}

/// Reads `image_id,score` rows. Scores must be finite and within `[0, 1]`.
pub fn read_scores<R: Read>(r: R, origin: &Path) -> Result<Vec<ScoreRow>> {
    let perr = |line: u64, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["image_id", "score"] {
        return Err(perr(1, "expected header image_id,score".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| perr(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let score: f64 = rec[1]
            .parse()
            .ok()
            .filter(|s: &f64| (0.0..=1.0).contains(s))
            .ok_or_else(|| perr(line, format!("score `{}` is not a probability", &rec[1])))?;
        rows.push(ScoreRow {
            image_id: rec[0].to_string(),
            score,
        });
    }
    Ok(rows)
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_scores(f, path)
}

/// Writes `image_id,raw_score,corrected_score,evidence`.
pub fn write_corrected<W: Write>(w: W, table: &CorrectedTable) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::Input(format!("writing scores: {e}"));
    wr.write_record(["image_id", "raw_score", "corrected_score", "evidence"])
        .map_err(err)?;
    for r in &table.records {
        wr.write_record([
            r.image_id.as_str(),
            &r.raw_score.to_string(),
            &r.corrected_score.to_string(),
            r.evidence().as_str(),
        ])
        .map_err(err)?;
    }
    wr.flush().map_err(|e| Error::io("<scores>", e))?;
    Ok(())
}
