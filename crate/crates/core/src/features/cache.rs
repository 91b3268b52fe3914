//! On-disk feature records and per-condition feature tables.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{FeatureSetId, FeatureVector};
use crate::error::{Error, Result};

/// Content-addressed store of extracted vectors, one CSV file per key.
#[derive(Debug, Clone)]
pub struct FeatureCache {
    dir: PathBuf,
}

impl FeatureCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Key over the audio content hash, set and catalog version.
    pub fn key(audio_hash: &str, set: FeatureSetId, catalog_version: &str) -> String {
        let mut h = Sha256::new();
        for part in [audio_hash, set.as_str(), catalog_version] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, set: FeatureSetId, key: &str) -> PathBuf {
        self.dir.join(set.as_str()).join(format!("{key}.csv"))
    }

    /// A cached vector, or `None` if absent or written under another catalog.
    pub fn get(
        &self,
        set: FeatureSetId,
        key: &str,
        names: &Arc<[String]>,
        catalog_version: &str,
    ) -> Option<FeatureVector> {
        let text = std::fs::read_to_string(self.path(set, key)).ok()?;
        let v = parse_record(&text, set, names).ok()?;
        (v.catalog_version == catalog_version).then_some(v)
    }

    /// Writes through a temporary file and a rename so readers never see a
    /// partial record.
    pub fn put(&self, key: &str, v: &FeatureVector) -> Result<()> {
        let path = self.path(v.set_id, key);
        let dir = path.parent().expect("cache path has a parent");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        static NEXT: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
        let n = NEXT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let tmp = dir.join(format!(".{key}.{}.{n}.tmp", std::process::id()));
        std::fs::write(&tmp, format_record(v)?).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}

fn format_record(v: &FeatureVector) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# set_id={}", v.set_id).unwrap();
    writeln!(out, "# catalog_version={}", v.catalog_version).unwrap();
    writeln!(out, "# flags={}", v.flags.join(";")).unwrap();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["name", "value"])?;
    for (n, x) in v.names.iter().zip(&v.values) {
        w.write_record([n.as_str(), &x.to_string()])?;
    }
    w.flush().expect("in-memory write");
    drop(w);
    Ok(out)
}

fn parse_record(text: &str, set: FeatureSetId, names: &Arc<[String]>) -> Result<FeatureVector> {
    let mut version = None;
    let mut flags = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix("# ") {
            if let Some(v) = meta.strip_prefix("catalog_version=") {
                version = Some(v.to_string());
            } else if let Some(f) = meta.strip_prefix("flags=") {
                flags = f.split(';').filter(|s| !s.is_empty()).map(str::to_string).collect();
            } else if let Some(s) = meta.strip_prefix("set_id=") {
                if s != set.as_str() {
                    return Err(Error::Schema(format!("record is for {s}")));
                }
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut values = Vec::with_capacity(names.len());
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if names.get(i).map(String::as_str) != Some(&rec[0]) {
            return Err(Error::Schema(format!("unexpected feature {} at position {i}", &rec[0])));
        }
        values.push(rec[1].parse::<f64>().map_err(|e| Error::Schema(e.to_string()))?);
    }
    let v = FeatureVector {
        set_id: set,
        names: names.clone(),
        values,
        catalog_version: version.ok_or_else(|| Error::Schema("record lacks a catalog version".into()))?,
        flags,
    };
    v.validate()?;
    Ok(v)
}

/// One row per clip: `clip_id,label,<feature names...>`.
pub fn write_feature_table(path: &Path, rows: &[(String, u8, &FeatureVector)]) -> Result<()> {
    let Some(first) = rows.first() else {
        return Err(Error::Report(format!("no rows for {}", path.display())));
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut out = Vec::new();
    writeln!(out, "# set_id={}", first.2.set_id).unwrap();
    writeln!(out, "# catalog_version={}", first.2.catalog_version).unwrap();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let mut header = vec!["clip_id".to_string(), "label".to_string()];
        header.extend(first.2.names.iter().cloned());
        w.write_record(&header)?;
        for (clip, label, v) in rows {
            let mut rec = vec![clip.clone(), label.to_string()];
            rec.extend(v.values.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().expect("in-memory write");
    }
    let tmp = path.with_extension("csv.tmp");
    std::fs::write(&tmp, out).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub set_id: FeatureSetId,
    pub catalog_version: String,
    pub names: Arc<[String]>,
    pub clip_ids: Vec<String>,
    pub labels: Vec<u8>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    /// Column of feature `name`, if present.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut set = None;
    let mut version = String::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(s) = line.strip_prefix("# set_id=") {
            set = Some(s.parse::<FeatureSetId>()?);
        } else if let Some(v) = line.strip_prefix("# catalog_version=") {
            version = v.to_string();
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let set_id = set.ok_or_else(|| Error::Schema(format!("{} lacks a set_id line", path.display())))?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers()?.clone();
    if header.len() < 3 || &header[0] != "clip_id" || &header[1] != "label" {
        return Err(Error::Schema(format!("{} has an unexpected header", path.display())));
    }
    let names: Arc<[String]> = header.iter().skip(2).map(str::to_string).collect();
    let mut t = FeatureTable {
        set_id,
        catalog_version: version,
        names,
        clip_ids: Vec::new(),
        labels: Vec::new(),
        rows: Vec::new(),
    };
    for rec in reader.records() {
        let rec = rec?;
        t.clip_ids.push(rec[0].to_string());
        t.labels.push(
            rec[1]
                .parse()
                .map_err(|_| Error::Schema(format!("bad label {}", &rec[1])))?,
        );
        let row = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
        t.rows.push(row);
    }
    Ok(t)
}
