//! Externally computed utterance embeddings.
//!
//! CSV sidecar:
//! ```text
//! # pooling=mean,layer=last_hidden
//! clip_id,condition_id,dim,v0,v1,...,v767
//! S001,clean,768,0.0132,...
//! ```
//! JSONL sidecar: one `{"clip_id":..,"condition_id":..,"values":[..]}` object
//! per line; an optional line `{"pooling":"mean","layer":"last_hidden"}`
//! carries the metadata.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CatalogEntry, CatalogManifest, FeatureSetId, FeatureVector};
use crate::error::{Error, Result};

pub const EMBEDDING_DIM: usize = 768;
const REVISION: u32 = 1;

pub fn embedding_manifest() -> &'static CatalogManifest {
    static M: std::sync::OnceLock<CatalogManifest> = std::sync::OnceLock::new();
    M.get_or_init(|| {
        let entries = (0..EMBEDDING_DIM)
            .map(|i| CatalogEntry {
                name: format!("v{i}"),
                primitive: "last hidden state".into(),
                functional: "mean over time".into(),
            })
            .collect();
        CatalogManifest::new(FeatureSetId::Embedding, REVISION, entries).expect("embedding catalog is well formed")
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub clip_id: String,
    pub condition_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    /// `key=value` pairs from the sidecar header.
    pub metadata: BTreeMap<String, String>,
    rows: BTreeMap<(String, String), Vec<f64>>,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn conditions(&self) -> Vec<String> {
        let mut c: Vec<String> = self.rows.keys().map(|k| k.0.clone()).collect();
        c.dedup();
        c
    }

    pub fn get(&self, condition_id: &str, clip_id: &str) -> Option<&[f64]> {
        self.rows
            .get(&(condition_id.to_string(), clip_id.to_string()))
            .map(|v| v.as_slice())
    }

    fn to_vector(&self, values: &[f64]) -> FeatureVector {
        let manifest = embedding_manifest();
        let names: Arc<[String]> = if self.dim == EMBEDDING_DIM {
            manifest.names()
        } else {
            (0..self.dim).map(|i| format!("v{i}")).collect()
        };
        FeatureVector {
            set_id: FeatureSetId::Embedding,
            names,
            values: values.to_vec(),
            catalog_version: manifest.version(),
            flags: Vec::new(),
        }
    }

    /// Vectors for `clip_ids` under one condition, in the given order.
    pub fn vectors_for(&self, condition_id: &str, clip_ids: &[String]) -> Result<Vec<FeatureVector>> {
        let missing: Vec<String> = clip_ids
            .iter()
            .filter(|c| self.get(condition_id, c).is_none())
            .map(|c| format!("{c}@{condition_id}"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Coverage { missing });
        }
        Ok(clip_ids
            .iter()
            .map(|c| self.to_vector(self.get(condition_id, c).unwrap()))
            .collect())
    }

    fn insert(&mut self, row: EmbeddingRow, what: &str) -> Result<()> {
        if row.values.len() != self.dim {
            return Err(Error::Schema(format!(
                "{what} ({}@{}) has {} values, expected {}",
                row.clip_id,
                row.condition_id,
                row.values.len(),
                self.dim
            )));
        }
        if let Some(i) = row.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Schema(format!(
                "{what} ({}) value v{i} is not finite",
                row.clip_id
            )));
        }
        let key = (row.condition_id, row.clip_id);
        if self.rows.contains_key(&key) {
            return Err(Error::Schema(format!("{what} duplicates {}@{}", key.1, key.0)));
        }
        self.rows.insert(key, row.values);
        Ok(())
    }
}

fn parse_metadata(line: &str, into: &mut BTreeMap<String, String>) {
    for pair in line.trim_start_matches('#').split(',') {
        if let Some((k, v)) = pair.split_once('=') {
            into.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
}

/// Loads a CSV or JSONL (by `.jsonl`/`.json` extension) sidecar.
pub fn load_embeddings(path: &Path, expected_dim: usize) -> Result<EmbeddingTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = EmbeddingTable {
        dim: expected_dim,
        metadata: BTreeMap::new(),
        rows: BTreeMap::new(),
    };
    let jsonl = matches!(path.extension().and_then(|e| e.to_str()), Some("jsonl" | "json"));
    if jsonl {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| Error::Schema(format!("line {}: {e}", i + 1)))?;
            if value.get("values").is_none() {
                if let Some(obj) = value.as_object() {
                    for (k, v) in obj {
                        let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                        table.metadata.insert(k.clone(), v);
                    }
                }
                continue;
            }
            let row: EmbeddingRow =
                serde_json::from_value(value).map_err(|e| Error::Schema(format!("line {}: {e}", i + 1)))?;
            table.insert(row, &format!("line {}", i + 1))?;
        }
    } else {
        let mut body = String::new();
        for line in text.lines() {
            if line.starts_with('#') && body.is_empty() {
                parse_metadata(line, &mut table.metadata);
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(body.as_bytes());
        let header = reader.headers()?.clone();
        if header.len() < 3 || &header[0] != "clip_id" || &header[1] != "condition_id" || &header[2] != "dim" {
            return Err(Error::Schema(
                "sidecar header must start with clip_id,condition_id,dim".into(),
            ));
        }
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let what = format!("row {}", i + 1);
            if record.len() < 3 {
                return Err(Error::Schema(format!("{what} has {} fields", record.len())));
            }
            let declared: usize = record[2]
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("{what} has a malformed dim field")))?;
            let values = record
                .iter()
                .skip(3)
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Schema(format!("{what} ({}): {e}", &record[0])))?;
            if declared != values.len() {
                return Err(Error::Schema(format!(
                    "{what} ({}) declares dim {declared} but has {} values",
                    &record[0],
                    values.len()
                )));
            }
            table.insert(
                EmbeddingRow {
                    clip_id: record[0].to_string(),
                    condition_id: record[1].to_string(),
                    values,
                },
                &what,
            )?;
        }
    }
    Ok(table)
}

/// Writes a CSV sidecar with mean pooling metadata.
pub fn write_embeddings_csv(path: &Path, rows: &[EmbeddingRow]) -> Result<()> {
    let dim = rows.first().map(|r| r.values.len()).unwrap_or(EMBEDDING_DIM);
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    writeln!(file, "# pooling=mean,layer=last_hidden").map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(file);
    let mut header = vec!["clip_id".to_string(), "condition_id".into(), "dim".into()];
    header.extend((0..dim).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.clip_id.clone(), r.condition_id.clone(), r.values.len().to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_embeddings_jsonl(path: &Path, rows: &[EmbeddingRow]) -> Result<()> {
    let mut out = String::from("{\"pooling\":\"mean\",\"layer\":\"last_hidden\"}\n");
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
