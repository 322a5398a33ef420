//! 68-point facial landmark sidecars and the named regions built on them.
//!
//! A sidecar holds one record per line: the image file name followed by 136
//! numbers `x0 y0 x1 y1 ... x67 y67`. Blank lines and lines starting with `#`
//! are ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::Rect;

pub const NUM_POINTS: usize = 68;
pub const DEFAULT_PAD: f64 = 4.0;

#[derive(Debug, Error)]
pub enum LandmarkError {
    #[error("landmark file not found: {0}")]
    MissingFile(PathBuf),
    #[error("cannot read landmark file {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed landmark record: {msg}")]
    Malformed { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{line}: expected 68 points, found {found_values} values")]
    WrongPointCount {
        path: PathBuf,
        line: usize,
        found_values: usize,
    },
    #[error("{path}:{line}: duplicate landmark record for `{image}`")]
    Duplicate { path: PathBuf, line: usize, image: String },
    #[error("region `{0}` has no area inside the image")]
    DegenerateBox(RegionName),
    #[error("invalid region table: {0}")]
    RegionTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    image_ref: String,
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(image_ref: impl Into<String>, points: Vec<Point>) -> Result<Self, LandmarkError> {
        let image_ref = image_ref.into();
        if points.len() != NUM_POINTS {
            return Err(LandmarkError::WrongPointCount {
                path: PathBuf::new(),
                line: 0,
                found_values: points.len() * 2,
            });
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(LandmarkError::Malformed {
                path: PathBuf::new(),
                line: 0,
                msg: "non-finite coordinate".into(),
            });
        }
        Ok(Self { image_ref, points })
    }

    pub fn image_ref(&self) -> &str {
        &self.image_ref
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(ax, ay), p| (ax + p.x, ay + p.y));
        Point { x: sx / n, y: sy / n }
    }

    /// One sidecar line. Coordinates use the shortest round-tripping decimal form.
    pub fn to_record(&self) -> String {
        let mut s = self.image_ref.clone();
        for p in &self.points {
            s.push(' ');
            s.push_str(&p.x.to_string());
            s.push(' ');
            s.push_str(&p.y.to_string());
        }
        s
    }

    fn parse_record(path: &Path, line_no: usize, line: &str) -> Result<Self, LandmarkError> {
        let mut tokens = line.split_whitespace();
        let image_ref = tokens.next().unwrap_or_default().to_string();
        let values: Vec<&str> = tokens.collect();
        if values.len() != NUM_POINTS * 2 {
            return Err(LandmarkError::WrongPointCount {
                path: path.to_path_buf(),
                line: line_no,
                found_values: values.len(),
            });
        }
        let mut nums = Vec::with_capacity(values.len());
        for v in values {
            let x = f64::from_str(v).ok().filter(|x| x.is_finite()).ok_or_else(|| {
                LandmarkError::Malformed {
                    path: path.to_path_buf(),
                    line: line_no,
                    msg: format!("bad coordinate `{v}`"),
                }
            })?;
            nums.push(x);
        }
        let points = nums.chunks_exact(2).map(|c| Point { x: c[0], y: c[1] }).collect();
        Ok(Self { image_ref, points })
    }
}

/// All landmark records keyed by image file name.
#[derive(Debug, Clone, Default)]
pub struct LandmarkStore {
    sets: BTreeMap<String, LandmarkSet>,
}

impl LandmarkStore {
    pub fn get(&self, image_ref: &str) -> Option<&LandmarkSet> {
        self.sets.get(image_ref)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LandmarkSet> {
        self.sets.values()
    }

    pub fn insert(&mut self, set: LandmarkSet) -> Option<LandmarkSet> {
        self.sets.insert(set.image_ref.clone(), set)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, LandmarkError> {
        let mut store = Self::default();
        store.extend_from_text(path, text)?;
        Ok(store)
    }

    fn extend_from_text(&mut self, path: &Path, text: &str) -> Result<(), LandmarkError> {
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let set = LandmarkSet::parse_record(path, i + 1, trimmed)?;
            if self.sets.contains_key(&set.image_ref) {
                return Err(LandmarkError::Duplicate {
                    path: path.to_path_buf(),
                    line: i + 1,
                    image: set.image_ref,
                });
            }
            self.insert(set);
        }
        Ok(())
    }

    /// Loads a sidecar file, or every `*.txt` file (sorted) in a directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LandmarkError> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(LandmarkError::MissingFile(path.to_path_buf()));
        }
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| LandmarkError::Read {
                path: p.to_path_buf(),
                source,
            })
        };
        let mut store = Self::default();
        if path.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|source| LandmarkError::Read {
                    path: path.to_path_buf(),
                    source,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "txt"))
                .collect();
            files.sort();
            for f in files {
                store.extend_from_text(&f, &read(&f)?)?;
            }
        } else {
            store.extend_from_text(path, &read(path)?)?;
        }
        Ok(store)
    }

    pub fn to_text(&self) -> String {
        self.sets.values().map(|s| s.to_record() + "\n").collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }
}

/// Loads the single record of a one-image sidecar.
pub fn load_landmarks(path: impl AsRef<Path>) -> Result<LandmarkSet, LandmarkError> {
    let path = path.as_ref();
    let store = LandmarkStore::load(path)?;
    let mut it = store.sets.into_values();
    match (it.next(), it.next()) {
        (Some(s), None) => Ok(s),
        (None, _) => Err(LandmarkError::Malformed {
            path: path.to_path_buf(),
            line: 0,
            msg: "no landmark record".into(),
        }),
        (Some(_), Some(_)) => Err(LandmarkError::Malformed {
            path: path.to_path_buf(),
            line: 0,
            msg: "more than one record; use LandmarkStore".into(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionName {
    LeftEyebrow,
    RightEyebrow,
    LeftEye,
    RightEye,
    Nose,
    Lips,
}

impl RegionName {
    pub const ALL: [RegionName; 6] = [
        RegionName::RightEyebrow,
        RegionName::LeftEyebrow,
        RegionName::Nose,
        RegionName::RightEye,
        RegionName::LeftEye,
        RegionName::Lips,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionName::LeftEyebrow => "left_eyebrow",
            RegionName::RightEyebrow => "right_eyebrow",
            RegionName::LeftEye => "left_eye",
            RegionName::RightEye => "right_eye",
            RegionName::Nose => "nose",
            RegionName::Lips => "lips",
        }
    }
}

impl fmt::Display for RegionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionName {
    type Err = LandmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegionName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| LandmarkError::RegionTable(format!("unknown region `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacialRegion {
    pub name: RegionName,
    pub indices: Vec<usize>,
}

/// Region name → landmark indices. Regions are disjoint and never touch the
/// jaw line (indices 0..=16).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionTable {
    regions: Vec<FacialRegion>,
}

/// iBUG 68-point layout; left/right are from the subject's point of view.
pub const DEFAULT_REGION_TABLE: &str = "\
right_eyebrow: 17-21
left_eyebrow: 22-26
nose: 27-35
right_eye: 36-41
left_eye: 42-47
lips: 48-67
";

impl Default for RegionTable {
    fn default() -> Self {
        Self::parse(DEFAULT_REGION_TABLE).expect("built-in region table is valid")
    }
}

impl RegionTable {
    /// Parses lines of `name: a-b, c, d-e`.
    pub fn parse(text: &str) -> Result<Self, LandmarkError> {
        let mut regions = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (name, spec) = line
                .split_once(':')
                .ok_or_else(|| LandmarkError::RegionTable(format!("missing `:` in `{line}`")))?;
            let name: RegionName = name.trim().parse()?;
            let mut indices = Vec::new();
            for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let bad = || LandmarkError::RegionTable(format!("bad index range `{part}`"));
                let (lo, hi) = match part.split_once('-') {
                    Some((a, b)) => (
                        a.trim().parse::<usize>().map_err(|_| bad())?,
                        b.trim().parse::<usize>().map_err(|_| bad())?,
                    ),
                    None => {
                        let v = part.parse::<usize>().map_err(|_| bad())?;
                        (v, v)
                    }
                };
                if lo > hi {
                    return Err(bad());
                }
                indices.extend(lo..=hi);
            }
            regions.push(FacialRegion { name, indices });
        }
        let table = Self { regions };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), LandmarkError> {
        let mut owner = [None::<RegionName>; NUM_POINTS];
        let mut names = Vec::new();
        for r in &self.regions {
            if names.contains(&r.name) {
                return Err(LandmarkError::RegionTable(format!("region `{}` listed twice", r.name)));
            }
            names.push(r.name);
            if r.indices.is_empty() {
                return Err(LandmarkError::RegionTable(format!("region `{}` is empty", r.name)));
            }
            for &i in &r.indices {
                if !(17..NUM_POINTS).contains(&i) {
                    return Err(LandmarkError::RegionTable(format!(
                        "index {i} of `{}` is outside 17..=67",
                        r.name
                    )));
                }
                if let Some(prev) = owner[i] {
                    return Err(LandmarkError::RegionTable(format!(
                        "index {i} shared by `{prev}` and `{}`",
                        r.name
                    )));
                }
                owner[i] = Some(r.name);
            }
        }
        Ok(())
    }

    pub fn regions(&self) -> &[FacialRegion] {
        &self.regions
    }

    pub fn get(&self, name: RegionName) -> Option<&FacialRegion> {
        self.regions.iter().find(|r| r.name == name)
    }
}

/// Padded bounding box of a region, clamped to the image.
///
/// Extents use continuous coordinates: the box spans
/// `[floor(min - pad), ceil(max + pad))` on each axis.
pub fn region_bbox(
    lms: &LandmarkSet,
    region: &FacialRegion,
    pad: f64,
    img_w: usize,
    img_h: usize,
) -> Result<Rect, LandmarkError> {
    let pts = region.indices.iter().map(|&i| lms.points[i]);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let x0 = (x0 - pad).floor().clamp(0.0, img_w as f64);
    let y0 = (y0 - pad).floor().clamp(0.0, img_h as f64);
    let x1 = (x1 + pad).ceil().clamp(0.0, img_w as f64);
    let y1 = (y1 + pad).ceil().clamp(0.0, img_h as f64);
    if x1 <= x0 || y1 <= y0 {
        return Err(LandmarkError::DegenerateBox(region.name));
    }
    Ok(Rect::new(x0 as usize, y0 as usize, (x1 - x0) as usize, (y1 - y0) as usize))
}
