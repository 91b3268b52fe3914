use std::fmt;

use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::tests::f1_score;
use crate::error::{Error, Result};
use crate::features::FeatureSetId;
use crate::models::{train, Hyperparams, LabeledMatrix, ModelKind};
use crate::noise::{NoiseCategory, NoiseMode};
use crate::seeding::derive_seed;

/// The audio a cell was trained on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Condition {
    Clean,
    Noisy {
        category: NoiseCategory,
        subcategory: String,
        mode: NoiseMode,
    },
}

impl Condition {
    pub fn noisy(category: NoiseCategory, subcategory: impl Into<String>, mode: NoiseMode) -> Self {
        Condition::Noisy {
            category,
            subcategory: subcategory.into(),
            mode,
        }
    }

    /// `clean` or `<subcategory>/<mode>`.
    pub fn id(&self) -> String {
        match self {
            Condition::Clean => "clean".to_string(),
            Condition::Noisy { subcategory, mode, .. } => format!("{subcategory}/{mode}"),
        }
    }

    pub fn subcategory(&self) -> Option<&str> {
        match self {
            Condition::Clean => None,
            Condition::Noisy { subcategory, .. } => Some(subcategory),
        }
    }

    pub fn category(&self) -> Option<NoiseCategory> {
        match self {
            Condition::Clean => None,
            Condition::Noisy { category, .. } => Some(*category),
        }
    }

    pub fn mode(&self) -> Option<NoiseMode> {
        match self {
            Condition::Clean => None,
            Condition::Noisy { mode, .. } => Some(*mode),
        }
    }

    pub fn is_clean(&self) -> bool {
        matches!(self, Condition::Clean)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub key: String,
    pub model: ModelKind,
    pub features: FeatureSetId,
    pub condition: Condition,
    pub seed: u64,
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
    /// Pooled out-of-fold predictions, one per row, aligned with `clip_ids`.
    pub clip_ids: Vec<String>,
    pub labels: Vec<u8>,
    pub predictions: Vec<u8>,
}

impl RunResult {
    pub fn check(&self) -> Result<()> {
        let n = self.clip_ids.len();
        if self.labels.len() != n || self.predictions.len() != n {
            return Err(Error::Schema(format!(
                "run {}: {} clips, {} labels, {} predictions",
                self.key,
                n,
                self.labels.len(),
                self.predictions.len()
            )));
        }
        if self.fold_f1.is_empty() {
            return Err(Error::Schema(format!("run {} has no folds", self.key)));
        }
        Ok(())
    }

    /// Predictions and labels reordered by clip id, for pairing two runs.
    pub fn by_clip(&self) -> Vec<(&str, u8, u8)> {
        let mut v: Vec<(&str, u8, u8)> = self
            .clip_ids
            .iter()
            .zip(&self.labels)
            .zip(&self.predictions)
            .map(|((c, &l), &p)| (c.as_str(), l, p))
            .collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

/// A cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub key: String,
    pub model: ModelKind,
    pub features: FeatureSetId,
    pub condition: Condition,
    pub seed: u64,
    pub error: String,
}

/// One line of the run ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum LedgerEntry {
    Ok(RunResult),
    Failed(CellFailure),
}

impl LedgerEntry {
    pub fn key(&self) -> &str {
        match self {
            LedgerEntry::Ok(r) => &r.key,
            LedgerEntry::Failed(f) => &f.key,
        }
    }
}

/// Cross-validated scores for one model on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub fold_f1: Vec<f64>,
    pub mean_f1: f64,
    /// Row order of the input matrix.
    pub predictions: Vec<u8>,
}

/// Trains on `train` rows outside each fold and scores the fold's rows of
/// `test`. Passing the same matrix twice is ordinary cross-validation; a
/// different `test` (same clips, same order) evaluates on other audio.
/// Seeded models get a distinct derived seed per fold.
pub fn cross_validate(
    train_data: &LabeledMatrix,
    test_data: &LabeledMatrix,
    plan: &FoldPlan,
    kind: ModelKind,
    hp: &Hyperparams,
    seed: u64,
) -> Result<CvOutcome> {
    if train_data.clip_ids != test_data.clip_ids || train_data.labels != test_data.labels {
        return Err(Error::Schema("training and test matrices list different clips".into()));
    }
    if plan.n_rows() != train_data.len() {
        return Err(Error::Schema(format!(
            "fold plan covers {} rows, data has {}",
            plan.n_rows(),
            train_data.len()
        )));
    }
    let mut predictions = vec![u8::MAX; train_data.len()];
    let mut fold_f1 = Vec::with_capacity(plan.k);
    for f in 0..plan.k {
        let fold_seed = derive_seed(seed, &["fold", &f.to_string()]);
        let model = train(kind, &train_data.subset(&plan.train_rows(f)), hp, fold_seed)?;
        let test = test_data.subset(plan.test_rows(f));
        let pred = model.predict(&test)?;
        fold_f1.push(f1_score(&test.labels, &pred));
        for (&row, p) in plan.test_rows(f).iter().zip(pred) {
            predictions[row] = p;
        }
    }
    debug_assert!(predictions.iter().all(|&p| p <= 1));
    let mean_f1 = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
    Ok(CvOutcome {
        fold_f1,
        mean_f1,
        predictions,
    })
}
