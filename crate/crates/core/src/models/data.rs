use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSetId, FeatureVector};

/// Row-major feature matrix with binary labels (1 = positive class).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    values: Vec<f64>,
    dim: usize,
    pub labels: Vec<u8>,
    pub clip_ids: Vec<String>,
    pub set_id: Option<FeatureSetId>,
}

impl LabeledMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, clip_ids: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != clip_ids.len() {
            return Err(Error::Schema(format!(
                "{} rows, {} labels, {} clip ids",
                rows.len(),
                labels.len(),
                clip_ids.len()
            )));
        }
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Schema(format!(
                "row {i} has {} values, expected {dim}",
                rows[i].len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Schema(format!("label {l} is not binary")));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Schema("non-finite feature value".into()));
        }
        Ok(Self {
            values: rows.concat(),
            dim,
            labels,
            clip_ids,
            set_id: None,
        })
    }

    /// Stacks vectors of one feature set.
    pub fn from_vectors(vectors: &[&FeatureVector], labels: Vec<u8>, clip_ids: Vec<String>) -> Result<Self> {
        let set = vectors.first().map(|v| v.set_id);
        if vectors.iter().any(|v| Some(v.set_id) != set) {
            return Err(Error::Schema("mixed feature sets in one matrix".into()));
        }
        let mut m = Self::new(vectors.iter().map(|v| v.values.clone()).collect(), labels, clip_ids)?;
        m.set_id = set;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            values,
            dim: self.dim,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            clip_ids: indices.iter().map(|&i| self.clip_ids[i].clone()).collect(),
            set_id: self.set_id,
        }
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - pos, pos]
    }
}

/// Per-feature z-scoring fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Number of rows the statistics were computed from.
    pub fitted_rows: usize,
}

impl Standardizer {
    /// Constant columns get unit scale.
    pub fn fit(data: &LabeledMatrix) -> Self {
        let n = data.len().max(1) as f64;
        let d = data.dim();
        let mut mean = vec![0.0; d];
        for r in data.rows() {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in data.rows() {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m).powi(2);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            mean,
            std,
            fitted_rows: data.len(),
        }
    }

    pub fn transform_row(&self, row: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s));
    }

    pub fn transform(&self, data: &LabeledMatrix) -> LabeledMatrix {
        let mut out = data.clone();
        let d = data.dim();
        for (i, chunk) in out.values.chunks_exact_mut(d.max(1)).enumerate().take(data.len()) {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = (data.values[i * d + j] - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}
