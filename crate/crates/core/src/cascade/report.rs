use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::Detection;
use crate::error::{Error, Result};
use crate::imaging::Rect;

/// Per-image detections, one CSV row per image:
/// `image_id,faces,boxes` where `boxes` is `x y w h neighbors` groups
/// joined by `;`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectionReport {
    rows: BTreeMap<String, Vec<Detection>>,
}

pub const REPORT_HEADER: [&str; 3] = ["image_id", "faces", "boxes"];

impl DetectionReport {
    pub fn insert(&mut self, image_id: impl Into<String>, dets: Vec<Detection>) {
        self.rows.insert(image_id.into(), dets);
    }

    pub fn get(&self, image_id: &str) -> Option<&[Detection]> {
        self.rows.get(image_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Detection])> {
        self.rows.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| Error::Input(format!("writing report: {e}"));
        wr.write_record(REPORT_HEADER).map_err(err)?;
        for (id, dets) in &self.rows {
            let boxes = dets
                .iter()
                .map(|d| format!("{} {} {} {} {}", d.rect.x, d.rect.y, d.rect.w, d.rect.h, d.neighbors))
                .collect::<Vec<_>>()
                .join(";");
            wr.write_record([id.as_str(), &dets.len().to_string(), &boxes])
                .map_err(err)?;
        }
        wr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(r: R, origin: &Path) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let perr = |line: u64, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let headers = rd.headers().map_err(|e| perr(1, e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != REPORT_HEADER {
            return Err(perr(1, format!("expected header {}", REPORT_HEADER.join(","))));
        }
        let mut report = Self::default();
        for rec in rd.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                perr(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let id = rec[0].to_string();
            let faces: usize = rec[1]
                .parse()
                .map_err(|_| perr(line, format!("bad face count `{}`", &rec[1])))?;
            let mut dets = Vec::new();
            for b in rec[2].split(';').map(str::trim).filter(|b| !b.is_empty()) {
                let v: Vec<usize> = b
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| perr(line, format!("bad box `{b}`")))?;
                if v.len() != 5 {
                    return Err(perr(line, format!("box `{b}` needs 5 integers")));
                }
                dets.push(Detection {
                    rect: Rect::new(v[0], v[1], v[2], v[3]),
                    neighbors: v[4],
                });
            }
            if dets.len() != faces {
                return Err(perr(line, format!("face count {faces} but {} boxes", dets.len())));
            }
            if report.rows.insert(id.clone(), dets).is_some() {
                return Err(perr(line, format!("duplicate image id `{id}`")));
            }
        }
        Ok(report)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f, path)
    }
}
