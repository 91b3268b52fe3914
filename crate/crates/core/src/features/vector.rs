use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSetId {
    #[serde(rename = "convfeat-182")]
    ConvFeat,
    #[serde(rename = "egemaps-88")]
    Egemaps,
    #[serde(rename = "embedding-768")]
    Embedding,
}

impl FeatureSetId {
    pub const ALL: [FeatureSetId; 3] = [FeatureSetId::ConvFeat, FeatureSetId::Egemaps, FeatureSetId::Embedding];

    pub fn dimension(self) -> usize {
        match self {
            FeatureSetId::ConvFeat => 182,
            FeatureSetId::Egemaps => 88,
            FeatureSetId::Embedding => 768,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSetId::ConvFeat => "convfeat-182",
            FeatureSetId::Egemaps => "egemaps-88",
            FeatureSetId::Embedding => "embedding-768",
        }
    }

    /// Display label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            FeatureSetId::ConvFeat => "ConvFeat",
            FeatureSetId::Egemaps => "eGeMAPS",
            FeatureSetId::Embedding => "wav2vec",
        }
    }
}

impl fmt::Display for FeatureSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convfeat-182" | "convfeat" => Ok(FeatureSetId::ConvFeat),
            "egemaps-88" | "egemaps" => Ok(FeatureSetId::Egemaps),
            "embedding-768" | "embedding" | "wav2vec" => Ok(FeatureSetId::Embedding),
            other => Err(Error::Config(format!("unknown feature set {other:?}"))),
        }
    }
}

/// One catalog position: what is measured and how it is summarized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub primitive: String,
    pub functional: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogManifest {
    pub set_id: FeatureSetId,
    pub revision: u32,
    pub entries: Vec<CatalogEntry>,
    /// SHA-256 over the set id, revision and ordered entries.
    pub hash: String,
}

impl CatalogManifest {
    pub fn new(set_id: FeatureSetId, revision: u32, entries: Vec<CatalogEntry>) -> Result<Self> {
        if entries.len() != set_id.dimension() {
            return Err(Error::Schema(format!(
                "{set_id} catalog has {} entries, expected {}",
                entries.len(),
                set_id.dimension()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = entries.iter().find(|e| !seen.insert(e.name.as_str())) {
            return Err(Error::Schema(format!("duplicate feature name {}", dup.name)));
        }
        let hash = Self::compute_hash(set_id, revision, &entries);
        Ok(Self {
            set_id,
            revision,
            entries,
            hash,
        })
    }

    fn compute_hash(set_id: FeatureSetId, revision: u32, entries: &[CatalogEntry]) -> String {
        let mut h = Sha256::new();
        h.update(set_id.as_str().as_bytes());
        h.update(revision.to_le_bytes());
        for e in entries {
            for field in [&e.name, &e.primitive, &e.functional] {
                h.update((field.len() as u64).to_le_bytes());
                h.update(field.as_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Recomputes the hash; fails if the manifest was edited inconsistently.
    pub fn verify(&self) -> Result<()> {
        if Self::compute_hash(self.set_id, self.revision, &self.entries) != self.hash {
            return Err(Error::Schema(format!("{} manifest hash mismatch", self.set_id)));
        }
        Ok(())
    }

    /// `<set>-r<revision>-<hash prefix>`.
    pub fn version(&self) -> String {
        format!("{}-r{}-{}", self.set_id, self.revision, &self.hash[..12])
    }

    pub fn names(&self) -> Arc<[String]> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub set_id: FeatureSetId,
    pub names: Arc<[String]>,
    pub values: Vec<f64>,
    pub catalog_version: String,
    /// Degenerate-input markers such as `unvoiced` or `tempo-undefined`.
    pub flags: Vec<String>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.set_id.dimension();
        if self.values.len() != dim || self.names.len() != dim {
            return Err(Error::Schema(format!(
                "{} vector has {} values and {} names, expected {dim}",
                self.set_id,
                self.values.len(),
                self.names.len()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("{} is not finite", self.names[i])));
        }
        Ok(())
    }
}
