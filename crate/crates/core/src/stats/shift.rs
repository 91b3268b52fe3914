use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tests::{mann_whitney_u, StatResult};
use crate::error::{Error, Result};
use crate::features::{FeatureSetId, FeatureTable, FeatureVector};

/// How strongly noise moved a feature set: per-feature rank tests between
/// the clean and noisy per-clip populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureShift {
    pub set_id: FeatureSetId,
    pub catalog_version: String,
    pub dimension: usize,
    pub significant: usize,
    pub ratio: f64,
    /// Catalog order.
    pub per_feature: Vec<(String, StatResult)>,
}

fn columns(rows: &[&[f64]], dim: usize) -> Vec<Vec<f64>> {
    (0..dim).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

fn shift_from_columns(
    set_id: FeatureSetId,
    catalog_version: &str,
    names: &[String],
    clean: &[&[f64]],
    noisy: &[&[f64]],
    alpha: f64,
) -> FeatureShift {
    let dim = names.len();
    let a = columns(clean, dim);
    let b = columns(noisy, dim);
    let per_feature: Vec<(String, StatResult)> = (0..dim)
        .into_par_iter()
        .map(|j| (names[j].clone(), mann_whitney_u(&a[j], &b[j], alpha)))
        .collect();
    let significant = per_feature.iter().filter(|(_, r)| r.significant).count();
    FeatureShift {
        set_id,
        catalog_version: catalog_version.to_string(),
        dimension: dim,
        significant,
        ratio: significant as f64 / dim as f64,
        per_feature,
    }
}

/// Vectors are matched by position; both sides must describe the same clips.
pub fn significant_feature_ratio(clean: &[FeatureVector], noisy: &[FeatureVector], alpha: f64) -> Result<FeatureShift> {
    let first = clean
        .first()
        .ok_or_else(|| Error::Schema("no clean feature vectors".into()))?;
    if clean.len() != noisy.len() {
        return Err(Error::Schema(format!(
            "clean side has {} clips, noisy side {}",
            clean.len(),
            noisy.len()
        )));
    }
    for v in clean.iter().chain(noisy) {
        if v.set_id != first.set_id || v.catalog_version != first.catalog_version || v.names != first.names {
            return Err(Error::Schema(format!(
                "catalog mismatch: {} vs {}",
                first.catalog_version, v.catalog_version
            )));
        }
    }
    let c: Vec<&[f64]> = clean.iter().map(|v| v.values.as_slice()).collect();
    let n: Vec<&[f64]> = noisy.iter().map(|v| v.values.as_slice()).collect();
    Ok(shift_from_columns(
        first.set_id,
        &first.catalog_version,
        &first.names,
        &c,
        &n,
        alpha,
    ))
}

/// Same test over two persisted feature tables, which must list the same clips.
pub fn feature_shift_tables(clean: &FeatureTable, noisy: &FeatureTable, alpha: f64) -> Result<FeatureShift> {
    if clean.set_id != noisy.set_id || clean.catalog_version != noisy.catalog_version || clean.names != noisy.names {
        return Err(Error::Schema(format!(
            "catalog mismatch: {} vs {}",
            clean.catalog_version, noisy.catalog_version
        )));
    }
    if clean.clip_ids != noisy.clip_ids {
        return Err(Error::Schema("feature tables cover different clips".into()));
    }
    if clean.rows.is_empty() {
        return Err(Error::Schema("empty feature table".into()));
    }
    let c: Vec<&[f64]> = clean.rows.iter().map(Vec::as_slice).collect();
    let n: Vec<&[f64]> = noisy.rows.iter().map(Vec::as_slice).collect();
    Ok(shift_from_columns(
        clean.set_id,
        &clean.catalog_version,
        &clean.names,
        &c,
        &n,
        alpha,
    ))
}
