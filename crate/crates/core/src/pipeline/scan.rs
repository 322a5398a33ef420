use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::recipes::Label;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Image files under `root`, as `(id, path)` sorted by id. Ids are
/// `/`-separated paths relative to `root`.
pub fn list_images(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !root.is_dir() {
        return Err(Error::Input(format!("{} is not a directory", root.display())));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| Error::Input(format!("walking {}: {e}", root.display())))?;
        if entry.file_type().is_file() && is_image(entry.path()) {
            let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
            let id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            out.push((id, entry.path().to_path_buf()));
        }
    }
    out.sort();
    Ok(out)
}

/// Reads a `image_id,label` CSV. Duplicate ids are an input error.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, Label>> {
    let f = std::fs::File::open(path)
        .map_err(|e| Error::Input(format!("labels file {}: {e}", path.display())))?;
    let perr = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f);
    let headers = rd.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["image_id", "label"] {
        return Err(perr(1, "expected header image_id,label".into()));
    }
    let mut labels = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| perr(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let label: Label = rec[1].parse().map_err(|_| perr(line, format!("bad label `{}`", &rec[1])))?;
        if labels.insert(rec[0].to_string(), label).is_some() {
            return Err(Error::Input(format!(
                "{}:{line}: duplicate image id `{}` in labels",
                path.display(),
                &rec[0]
            )));
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceEntry {
    pub id: String,
    #[serde(skip)]
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub label: Option<Label>,
}

impl SourceEntry {
    pub fn file_name(&self) -> &str {
        self.id.rsplit('/').next().unwrap_or(&self.id)
    }

    pub fn load(&self) -> Result<ImageBuffer> {
        ImageBuffer::load(&self.path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanIssue {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SourceIndex {
    pub entries: Vec<SourceEntry>,
    /// Files that failed to decode.
    pub undecodable: Vec<ScanIssue>,
    /// Decodable images with no row in the labels file.
    pub unlabeled: Vec<String>,
}

impl SourceIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SourceEntry> {
        self.entries
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// `image_id,label,width,height,channels`, then one `#undecodable` line per failure.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut s = String::from("image_id,label,width,height,channels\n");
        for e in &self.entries {
            let label = e.label.map(|l| l.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{}\n", e.id, label, e.width, e.height, e.channels));
        }
        for u in &self.undecodable {
            s.push_str(&format!("#undecodable,{},{}\n", u.id, u.reason.replace(['\n', ','], " ")));
        }
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }
}

/// Indexes every decodable image under `root` with its label.
pub fn scan_dataset(root: &Path, labels_path: &Path) -> Result<SourceIndex> {
    let labels = load_labels(labels_path)?;
    let files = list_images(root)?;
    let decoded: Vec<std::result::Result<SourceEntry, ScanIssue>> = files
        .par_iter()
        .map(|(id, path)| match ImageBuffer::load(path) {
            Ok(img) => Ok(SourceEntry {
                id: id.clone(),
                path: path.clone(),
                width: img.width(),
                height: img.height(),
                channels: img.channels(),
                label: labels.get(id).copied(),
            }),
            Err(e) => Err(ScanIssue {
                id: id.clone(),
                reason: e.to_string(),
            }),
        })
        .collect();
    let mut index = SourceIndex::default();
    for d in decoded {
        match d {
            Ok(e) => {
                if e.label.is_none() {
                    index.unlabeled.push(e.id.clone());
                }
                index.entries.push(e);
            }
            Err(issue) => index.undecodable.push(issue),
        }
    }
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dir_gives_empty_index() {
        let dir = tempfile::tempdir().unwrap();
        let labels = dir.path().join("labels.csv");
        std::fs::write(&labels, "image_id,label\n").unwrap();
        let idx = scan_dataset(dir.path(), &labels).unwrap();
        assert!(idx.is_empty());
    }

    #[test]
    fn corrupt_image_is_reported_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageBuffer::filled(4, 4, &[1, 2, 3]).unwrap();
        img.save(dir.path().join("a.png")).unwrap();
        img.save(dir.path().join("b.png")).unwrap();
        std::fs::write(dir.path().join("c.png"), b"not a png").unwrap();
        let labels = dir.path().join("labels.csv");
        std::fs::write(&labels, "image_id,label\na.png,real\nc.png,fake\n").unwrap();
        let idx = scan_dataset(dir.path(), &labels).unwrap();
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.undecodable.len(), 1);
        assert_eq!(idx.unlabeled, vec!["b.png".to_string()]);
        assert_eq!(idx.get("a.png").unwrap().label, Some(Label::Real));
    }

    #[test]
    fn duplicate_and_missing_labels_are_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let labels = dir.path().join("labels.csv");
        std::fs::write(&labels, "image_id,label\na.png,real\na.png,fake\n").unwrap();
        assert!(matches!(scan_dataset(dir.path(), &labels), Err(Error::Input(_))));
        assert!(scan_dataset(dir.path(), &dir.path().join("nope.csv")).is_err());
    }
}
