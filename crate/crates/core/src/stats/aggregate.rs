use serde::{Deserialize, Serialize};

use super::results::{Condition, RunResult};
use super::tests::{mcnemar, StatResult};
use crate::error::{Error, Result};
use crate::features::FeatureSetId;
use crate::models::ModelKind;
use crate::noise::{NoiseCategory, NoiseMode};

/// Which cell produced a summary value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: ModelKind,
    pub features: FeatureSetId,
    pub condition: Condition,
    /// Set when the value comes from a single seed.
    pub seed: Option<u64>,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub count: usize,
    /// Mean of every run's mean F1.
    pub mean_f1: f64,
    /// Best single run.
    pub max_f1: f64,
    /// Best (model, features, condition) after averaging over seeds.
    pub best_mean: Provenance,
    pub best_max: Provenance,
}

/// Summarizes a group of runs. Ties keep the earliest run in input order.
/// Returns `None` for an empty group.
pub fn summarize(runs: &[&RunResult]) -> Option<GroupSummary> {
    let first = runs.first()?;
    let mean_f1 = runs.iter().map(|r| r.mean_f1).sum::<f64>() / runs.len() as f64;

    let mut best = first;
    for r in runs {
        if r.mean_f1 > best.mean_f1 {
            best = r;
        }
    }
    let best_max = Provenance {
        model: best.model,
        features: best.features,
        condition: best.condition.clone(),
        seed: Some(best.seed),
        f1: best.mean_f1,
    };

    // seed means per (model, features, condition), in first-seen order
    let mut cells: Vec<(&RunResult, f64, usize)> = Vec::new();
    for r in runs {
        match cells
            .iter_mut()
            .find(|(c, _, _)| c.model == r.model && c.features == r.features && c.condition == r.condition)
        {
            Some(cell) => {
                cell.1 += r.mean_f1;
                cell.2 += 1;
            }
            None => cells.push((r, r.mean_f1, 1)),
        }
    }
    let mut best_mean: Option<Provenance> = None;
    for (r, sum, n) in cells {
        let m = sum / n as f64;
        if best_mean.as_ref().is_none_or(|b| m > b.f1) {
            best_mean = Some(Provenance {
                model: r.model,
                features: r.features,
                condition: r.condition.clone(),
                seed: None,
                f1: m,
            });
        }
    }

    Some(GroupSummary {
        count: runs.len(),
        mean_f1,
        max_f1: best_max.f1,
        best_mean: best_mean.expect("nonempty group"),
        best_max,
    })
}

fn best_run<'a>(runs: &[&'a RunResult]) -> &'a RunResult {
    let mut best = runs[0];
    for r in runs {
        if r.mean_f1 > best.mean_f1 {
            best = r;
        }
    }
    best
}

/// McNemar between two runs' pooled predictions, paired by clip id.
pub fn compare_runs(a: &RunResult, b: &RunResult, alpha: f64) -> Result<StatResult> {
    let pa = a.by_clip();
    let pb = b.by_clip();
    if pa.len() != pb.len() || pa.iter().zip(&pb).any(|(x, y)| x.0 != y.0 || x.1 != y.1) {
        return Err(Error::Schema(format!(
            "runs {} and {} cover different clips",
            a.key, b.key
        )));
    }
    let y: Vec<u8> = pa.iter().map(|x| x.1).collect();
    let ya: Vec<u8> = pa.iter().map(|x| x.2).collect();
    let yb: Vec<u8> = pb.iter().map(|x| x.2).collect();
    mcnemar(&ya, &yb, &y, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    Noise,
    Clean,
}

/// One (subcategory, feature set) row of the noise-versus-clean table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRow {
    pub category: NoiseCategory,
    pub subcategory: String,
    pub features: FeatureSetId,
    pub count: usize,
    pub mean_f1_noise: f64,
    pub max_f1_noise: f64,
    pub best_mean_f1_clean: f64,
    pub best_max_f1_clean: f64,
    /// Best noisy run against best clean run.
    pub mcnemar: StatResult,
    pub significant: bool,
    /// Larger maximum; a tie goes to clean.
    pub winner: Winner,
    pub noise: GroupSummary,
    pub clean: GroupSummary,
}

fn set_rank(s: FeatureSetId) -> usize {
    FeatureSetId::ALL.iter().position(|&x| x == s).unwrap_or(usize::MAX)
}

/// Rows ordered by category, then subcategory in first-seen order, then
/// feature set. A set with noisy runs but no clean runs is an error.
pub fn performance_table(runs: &[RunResult], alpha: f64) -> Result<Vec<PerformanceRow>> {
    let mut keys: Vec<(NoiseCategory, usize, String, FeatureSetId)> = Vec::new();
    let mut subs: Vec<String> = Vec::new();
    for r in runs {
        if let Condition::Noisy {
            category, subcategory, ..
        } = &r.condition
        {
            let pos = match subs.iter().position(|s| s == subcategory) {
                Some(p) => p,
                None => {
                    subs.push(subcategory.clone());
                    subs.len() - 1
                }
            };
            let k = (*category, pos, subcategory.clone(), r.features);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    keys.sort_by_key(|k| (k.0, k.1, set_rank(k.3)));

    let mut rows = Vec::with_capacity(keys.len());
    for (category, _, sub, set) in keys {
        let clean: Vec<&RunResult> = runs
            .iter()
            .filter(|r| r.features == set && r.condition.is_clean())
            .collect();
        let Some(clean_summary) = summarize(&clean) else {
            return Err(Error::Report(format!("no clean baseline runs for {set}")));
        };
        let noisy: Vec<&RunResult> = runs
            .iter()
            .filter(|r| r.features == set && r.condition.subcategory() == Some(sub.as_str()))
            .collect();
        let noise_summary = summarize(&noisy).expect("key came from a run");
        let test = compare_runs(best_run(&noisy), best_run(&clean), alpha)?;
        let winner = if noise_summary.max_f1 > clean_summary.max_f1 {
            Winner::Noise
        } else {
            Winner::Clean
        };
        rows.push(PerformanceRow {
            category,
            subcategory: sub,
            features: set,
            count: noise_summary.count,
            mean_f1_noise: noise_summary.mean_f1,
            max_f1_noise: noise_summary.max_f1,
            best_mean_f1_clean: clean_summary.best_mean.f1,
            best_max_f1_clean: clean_summary.max_f1,
            significant: test.significant,
            mcnemar: test,
            winner,
            noise: noise_summary,
            clean: clean_summary,
        });
    }
    Ok(rows)
}

/// Mean and max over seeds for one (model, features, condition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownCell {
    pub model: ModelKind,
    pub features: FeatureSetId,
    pub condition: Condition,
    pub seeds: usize,
    pub mean_f1: f64,
    pub max_f1: f64,
    /// Strictly above the same model and features on clean audio.
    pub above_clean_mean: bool,
    pub above_clean_max: bool,
}

/// Per-model, per-set scores for one subcategory next to the clean baseline.
/// Order: model, then clean/short/background, then feature set.
pub fn model_breakdown(runs: &[RunResult], subcategory: &str) -> Result<Vec<BreakdownCell>> {
    let category = runs
        .iter()
        .find_map(|r| match &r.condition {
            Condition::Noisy {
                category,
                subcategory: s,
                ..
            } if s == subcategory => Some(*category),
            _ => None,
        })
        .ok_or_else(|| Error::Report(format!("no runs for subcategory {subcategory}")))?;
    let conditions = [
        Condition::Clean,
        Condition::noisy(category, subcategory, NoiseMode::Short),
        Condition::noisy(category, subcategory, NoiseMode::Background),
    ];
    let stats = |model, set, cond: &Condition| -> Option<(usize, f64, f64)> {
        let v: Vec<f64> = runs
            .iter()
            .filter(|r| r.model == model && r.features == set && &r.condition == cond)
            .map(|r| r.mean_f1)
            .collect();
        if v.is_empty() {
            return None;
        }
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((v.len(), v.iter().sum::<f64>() / v.len() as f64, max))
    };
    let mut out = Vec::new();
    for model in ModelKind::ALL {
        for cond in &conditions {
            for set in FeatureSetId::ALL {
                let Some((seeds, mean_f1, max_f1)) = stats(model, set, cond) else {
                    continue;
                };
                let clean = stats(model, set, &Condition::Clean);
                if clean.is_none() {
                    log::warn!("no clean {model:?}/{set} runs to compare {subcategory} against");
                }
                let (above_clean_mean, above_clean_max) = match (cond.is_clean(), clean) {
                    (false, Some((_, m, x))) => (mean_f1 > m, max_f1 > x),
                    _ => (false, false),
                };
                out.push(BreakdownCell {
                    model,
                    features: set,
                    condition: cond.clone(),
                    seeds,
                    mean_f1,
                    max_f1,
                    above_clean_mean,
                    above_clean_max,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureAxis {
    Features,
    Model,
}

/// Best-mean and best-max per feature set and per model, over every condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub axis: FigureAxis,
    pub group: String,
    pub summary: GroupSummary,
}

pub fn figure_data(runs: &[RunResult]) -> Vec<FigureRow> {
    let mut out = Vec::new();
    for set in FeatureSetId::ALL {
        let g: Vec<&RunResult> = runs.iter().filter(|r| r.features == set).collect();
        match summarize(&g) {
            Some(summary) => out.push(FigureRow {
                axis: FigureAxis::Features,
                group: set.label().to_string(),
                summary,
            }),
            None => log::debug!("no runs for {set}"),
        }
    }
    for model in ModelKind::ALL {
        let g: Vec<&RunResult> = runs.iter().filter(|r| r.model == model).collect();
        match summarize(&g) {
            Some(summary) => out.push(FigureRow {
                axis: FigureAxis::Model,
                group: model.as_str().to_string(),
                summary,
            }),
            None => log::debug!("no runs for {}", model.as_str()),
        }
    }
    out
}
