//! The three clip representations: a conventional 182-value set, an
//! 88-value eGeMAPS-style set and imported 768-dimensional embeddings.

mod cache;
mod convfeat;
mod egemaps;
mod embeddings;
pub mod functionals;
mod vector;

pub use cache::{read_feature_table, write_feature_table, FeatureCache, FeatureTable};
pub use convfeat::{convfeat_manifest, extract_convfeat, GAIN_INVARIANT_PREFIXES};
pub use egemaps::{egemaps_manifest, extract_egemaps, hz_to_semitone, semitone_to_hz};
pub use embeddings::{
    embedding_manifest, load_embeddings, write_embeddings_csv, write_embeddings_jsonl, EmbeddingRow, EmbeddingTable,
    EMBEDDING_DIM,
};
pub use vector::{CatalogEntry, CatalogManifest, FeatureSetId, FeatureVector};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub fn manifest(set: FeatureSetId) -> &'static CatalogManifest {
    match set {
        FeatureSetId::ConvFeat => convfeat_manifest(),
        FeatureSetId::Egemaps => egemaps_manifest(),
        FeatureSetId::Embedding => embedding_manifest(),
    }
}

/// Extracts an audio-derived set; embeddings come from a sidecar instead.
pub fn extract(set: FeatureSetId, clip: &AudioClip) -> Result<FeatureVector> {
    match set {
        FeatureSetId::ConvFeat => extract_convfeat(clip),
        FeatureSetId::Egemaps => extract_egemaps(clip),
        FeatureSetId::Embedding => Err(Error::Parameter(
            "embeddings are loaded from a sidecar, not extracted".into(),
        )),
    }
}
