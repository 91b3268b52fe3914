use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub clip_id: String,
    pub path: PathBuf,
    pub label: u8,
}

/// Labeled clip list. Extra CSV columns (demographics and the like) are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusManifest {
    pub rows: Vec<ManifestRow>,
}

#[derive(Deserialize)]
struct RawRow {
    clip_id: String,
    path: String,
    label: String,
}

impl CorpusManifest {
    /// Reads `clip_id,path,label`. Relative paths are resolved against the
    /// manifest's directory. Duplicate ids and non-binary labels are errors.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let mut rows = Vec::new();
        let mut problems = Vec::new();
        for (i, rec) in reader.deserialize::<RawRow>().enumerate() {
            let raw = rec?;
            let label = match raw.label.trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    problems.push(format!(
                        "row {} ({}): label {other:?} is not 0 or 1",
                        i + 1,
                        raw.clip_id
                    ));
                    continue;
                }
            };
            let p = PathBuf::from(raw.path.trim());
            rows.push(ManifestRow {
                clip_id: raw.clip_id.trim().to_string(),
                path: if p.is_relative() { base.join(p) } else { p },
                label,
            });
        }
        let mut seen = BTreeSet::new();
        for r in &rows {
            if !seen.insert(r.clip_id.as_str()) {
                problems.push(format!("clip_id {} appears more than once", r.clip_id));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Schema(problems.join("; ")));
        }
        Ok(Self { rows })
    }

    /// Writes the manifest with paths relative to `dir` when possible.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["clip_id", "path", "label"])?;
        for r in &self.rows {
            let p = r.path.strip_prefix(base).unwrap_or(&r.path);
            w.write_record([r.clip_id.as_str(), &p.to_string_lossy(), &r.label.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn clip_ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.clip_id.clone()).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.rows.iter().filter(|r| r.label == 1).count();
        [self.rows.len() - pos, pos]
    }
}
