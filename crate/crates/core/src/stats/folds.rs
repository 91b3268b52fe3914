use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{derive_seed, rng};

/// Stratified k-fold split over row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Test rows per fold, sorted ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    pub fn test_rows(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    /// Every row not held out in `fold`, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }
}

/// Shuffles each class with its own derived seed, then deals rows to folds
/// round-robin. The dealing position carries over from one class to the
/// next so fold sizes stay within one of each other.
pub fn make_folds(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("cross-validation needs k >= 2, got {k}")));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for class in [0u8, 1u8] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if rows.len() < k {
            return Err(Error::Config(format!(
                "class {class} has {} rows, fewer than k = {k}",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng(derive_seed(seed, &["folds", &class.to_string()])));
        for r in rows {
            folds[next].push(r);
            next = (next + 1) % k;
        }
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Config(format!("label {bad} is not binary")));
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { k, seed, folds })
}
