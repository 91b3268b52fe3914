use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{feature_table_path, read_ledger, RunMeta, LEDGER_FILE};
use crate::error::{Error, Result};
use crate::features::{read_feature_table, FeatureSetId};
use crate::noise::{NoiseCategory, NoiseMode};
use crate::stats::{
    feature_shift_tables, figure_data, model_breakdown, performance_table, BreakdownCell, Condition, FigureAxis,
    FigureRow, LedgerEntry, PerformanceRow, RunResult, Winner,
};

pub const REPORTS_DIR: &str = "reports";
pub const FEATURE_SHIFT_CSV: &str = "feature_shift.csv";
pub const PERFORMANCE_CSV: &str = "performance.csv";
pub const BREAKDOWN_CSV: &str = "breakdown.csv";
pub const FIGURE_FEATURES_CSV: &str = "figure_features.csv";
pub const FIGURE_MODELS_CSV: &str = "figure_models.csv";

pub const PERFORMANCE_COLUMNS: [&str; 10] = [
    "category",
    "subcategory",
    "features",
    "count",
    "mean_f1_noise",
    "max_f1_noise",
    "best_mean_f1_clean",
    "best_max_f1_clean",
    "mcnemar_p",
    "significant",
];

/// Ordinal shading of a significant-feature ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shade {
    None,
    High,
    VeryHigh,
}

impl Shade {
    /// Above 80% is very high, above 50% high.
    pub fn of(ratio: f64) -> Self {
        if ratio > 0.8 {
            Shade::VeryHigh
        } else if ratio > 0.5 {
            Shade::High
        } else {
            Shade::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Shade::None => "none",
            Shade::High => "high",
            Shade::VeryHigh => "very-high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftCell {
    pub ratio: f64,
    pub significant: usize,
    pub dimension: usize,
    pub shade: Shade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub category: NoiseCategory,
    pub subcategory: String,
    pub features: FeatureSetId,
    pub short: Option<ShiftCell>,
    pub background: Option<ShiftCell>,
}

fn reports_dir(results: &Path) -> Result<PathBuf> {
    let dir = results.join(REPORTS_DIR);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn notes_block(meta: &RunMeta) -> String {
    let mut s = String::new();
    for n in &meta.notes {
        let _ = writeln!(s, "> {n}");
    }
    s
}

/// Significant-feature ratios per noisy condition, from the persisted
/// feature tables.
pub fn feature_shift_rows(results: &Path) -> Result<Vec<ShiftRow>> {
    let meta = RunMeta::load(results)?;
    let mut rows: Vec<ShiftRow> = Vec::new();
    for &set in &meta.sets {
        let clean_path = feature_table_path(results, set, &Condition::Clean);
        let clean = match read_feature_table(&clean_path) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("{set}: no clean feature table ({e}); skipping");
                continue;
            }
        };
        for cond in &meta.conditions {
            let Condition::Noisy {
                category,
                subcategory,
                mode,
            } = cond
            else {
                continue;
            };
            let cell = match read_feature_table(&feature_table_path(results, set, cond)) {
                Ok(noisy) => {
                    let s = feature_shift_tables(&clean, &noisy, meta.alpha)?;
                    Some(ShiftCell {
                        ratio: s.ratio,
                        significant: s.significant,
                        dimension: s.dimension,
                        shade: Shade::of(s.ratio),
                    })
                }
                Err(e) => {
                    log::warn!("{set} {cond}: {e}");
                    None
                }
            };
            let pos = rows
                .iter()
                .position(|r| r.subcategory == *subcategory && r.features == set);
            let row = match pos {
                Some(p) => &mut rows[p],
                None => {
                    rows.push(ShiftRow {
                        category: *category,
                        subcategory: subcategory.clone(),
                        features: set,
                        short: None,
                        background: None,
                    });
                    rows.last_mut().unwrap()
                }
            };
            match mode {
                NoiseMode::Short => row.short = cell,
                NoiseMode::Background => row.background = cell,
            }
        }
    }
    rows.retain(|r| {
        let keep = r.short.is_some() || r.background.is_some();
        if !keep {
            log::warn!("{} {}: no noisy feature tables; row omitted", r.subcategory, r.features);
        }
        keep
    });
    // category, then subcategory in run order, then feature set
    let order: Vec<&str> = meta.conditions.iter().filter_map(|c| c.subcategory()).collect();
    let rank = |r: &ShiftRow| {
        (
            r.category,
            order.iter().position(|s| *s == r.subcategory),
            FeatureSetId::ALL.iter().position(|s| *s == r.features),
        )
    };
    rows.sort_by_key(|r| rank(r));
    Ok(rows)
}

/// Writes `feature_shift.csv` and `feature_shift.md` under `reports/`.
pub fn report_features(results: &Path) -> Result<Vec<ShiftRow>> {
    let meta = RunMeta::load(results)?;
    let rows = feature_shift_rows(results)?;
    let dir = reports_dir(results)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "category",
        "subcategory",
        "features",
        "short_ratio",
        "short_flag",
        "background_ratio",
        "background_flag",
    ])?;
    let field = |c: &Option<ShiftCell>| match c {
        Some(c) => (c.ratio.to_string(), c.shade.as_str().to_string()),
        None => (String::new(), String::new()),
    };
    for r in &rows {
        let (sr, sf) = field(&r.short);
        let (br, bf) = field(&r.background);
        w.write_record([
            r.category.as_str(),
            &r.subcategory,
            r.features.as_str(),
            &sr,
            &sf,
            &br,
            &bf,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    fs::write(dir.join(FEATURE_SHIFT_CSV), bytes).map_err(|e| Error::io(dir.join(FEATURE_SHIFT_CSV), e))?;

    let mut md = String::new();
    let _ = writeln!(
        md,
        "# Share of features significantly changed by noise (Mann-Whitney U, p < {})\n",
        meta.alpha
    );
    md.push_str("`*` marks ratios above 50%, `**` above 80%.\n\n");
    md.push_str("| Category | Subcategory | Features | Short noise | Background noise |\n");
    md.push_str("|---|---|---|---:|---:|\n");
    let cell = |c: &Option<ShiftCell>| match c {
        None => "n/a".to_string(),
        Some(c) => {
            let mark = match c.shade {
                Shade::None => "",
                Shade::High => "*",
                Shade::VeryHigh => "**",
            };
            format!("{:.2}%{mark}", 100.0 * c.ratio)
        }
    };
    for r in &rows {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} |",
            r.category,
            r.subcategory,
            r.features.label(),
            cell(&r.short),
            cell(&r.background)
        );
    }
    write(&dir.join("feature_shift.md"), &md)?;
    Ok(rows)
}

/// Successful runs from a results directory's ledger.
pub fn load_runs(results: &Path) -> Result<Vec<RunResult>> {
    let path = results.join(LEDGER_FILE);
    if !path.exists() {
        return Err(Error::Report(format!("no ledger at {}", path.display())));
    }
    Ok(read_ledger(&path)?
        .into_iter()
        .filter_map(|e| match e {
            LedgerEntry::Ok(r) => Some(r),
            LedgerEntry::Failed(_) => None,
        })
        .collect())
}

/// Everything the performance report contains.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub rows: Vec<PerformanceRow>,
    pub breakdown_subcategory: Option<String>,
    pub breakdown: Vec<BreakdownCell>,
    pub figures: Vec<FigureRow>,
}

fn performance_csv(rows: &[PerformanceRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PERFORMANCE_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.category.as_str().to_string(),
            r.subcategory.clone(),
            r.features.as_str().to_string(),
            r.count.to_string(),
            r.mean_f1_noise.to_string(),
            r.max_f1_noise.to_string(),
            r.best_mean_f1_clean.to_string(),
            r.best_max_f1_clean.to_string(),
            r.mcnemar.p_value.to_string(),
            r.significant.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Report(e.to_string()))
}

fn performance_md(rows: &[PerformanceRow], meta: &RunMeta) -> String {
    let mut md = String::from("# Classification performance with and without noise\n\n");
    md.push_str(&notes_block(meta));
    let _ = writeln!(
        md,
        "\nBold marks the larger max F1 per row; `*` marks p < {} on McNemar's test between the two best runs.\n",
        meta.alpha
    );
    md.push_str("| Category | Subcategory | Features | Count | Mean F1 w/ noise | Max F1 w/ noise | Best mean F1 w/o noise | Best max F1 w/o noise |\n");
    md.push_str("|---|---|---|---:|---:|---:|---:|---:|\n");
    for r in rows {
        let star = if r.significant { "*" } else { "" };
        let (noise_max, clean_max) = match r.winner {
            Winner::Noise => (
                format!("**{:.4}{star}**", r.max_f1_noise),
                format!("{:.4}", r.best_max_f1_clean),
            ),
            Winner::Clean => (
                format!("{:.4}", r.max_f1_noise),
                format!("**{:.4}{star}**", r.best_max_f1_clean),
            ),
        };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {:.4} | {} | {:.4} | {} |",
            r.category,
            r.subcategory,
            r.features.label(),
            r.count,
            r.mean_f1_noise,
            noise_max,
            r.best_mean_f1_clean,
            clean_max
        );
    }
    md
}

fn breakdown_csv(sub: &str, cells: &[BreakdownCell]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "subcategory",
        "model",
        "features",
        "condition",
        "seeds",
        "mean_f1",
        "max_f1",
        "above_clean_mean",
        "above_clean_max",
    ])?;
    for c in cells {
        let cond = c.condition.mode().map_or("clean", NoiseMode::as_str);
        w.write_record([
            sub.to_string(),
            c.model.as_str().to_string(),
            c.features.as_str().to_string(),
            cond.to_string(),
            c.seeds.to_string(),
            c.mean_f1.to_string(),
            c.max_f1.to_string(),
            c.above_clean_mean.to_string(),
            c.above_clean_max.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Report(e.to_string()))
}

fn breakdown_md(sub: &str, cells: &[BreakdownCell], meta: &RunMeta) -> String {
    let conds: [Option<NoiseMode>; 3] = [None, Some(NoiseMode::Short), Some(NoiseMode::Background)];
    let sets: Vec<FeatureSetId> = FeatureSetId::ALL
        .into_iter()
        .filter(|s| cells.iter().any(|c| c.features == *s))
        .collect();
    let find = |m, s, c: Option<NoiseMode>| {
        cells
            .iter()
            .find(|x| x.model == m && x.features == s && x.condition.mode() == c)
    };
    let mut md = format!("# Per-model scores with {sub} noise\n\n");
    md.push_str(&notes_block(meta));
    md.push_str("\nMean is over seeds, Max is the best seed. `^` marks a score above the same model and features on clean audio; bold marks the best score per audio condition.\n\n");
    md.push_str("| F1 | Model |");
    for c in conds {
        for s in &sets {
            let _ = write!(md, " {} {} |", c.map_or("clean", NoiseMode::as_str), s.label());
        }
    }
    md.push_str("\n|---|---|");
    md.push_str(&"---:|".repeat(conds.len() * sets.len()));
    md.push('\n');
    for block in ["Mean", "Max"] {
        let value = |c: &BreakdownCell| if block == "Mean" { c.mean_f1 } else { c.max_f1 };
        let above = |c: &BreakdownCell| {
            if block == "Mean" {
                c.above_clean_mean
            } else {
                c.above_clean_max
            }
        };
        let best: Vec<f64> = conds
            .iter()
            .map(|&cd| {
                cells
                    .iter()
                    .filter(|c| c.condition.mode() == cd)
                    .map(value)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        for m in meta.models.iter().copied() {
            let _ = write!(md, "| {block} | {} |", m.as_str());
            for (ci, &cd) in conds.iter().enumerate() {
                for &s in &sets {
                    match find(m, s, cd) {
                        None => md.push_str(" n/a |"),
                        Some(c) => {
                            let mut v = format!("{:.4}", value(c));
                            if above(c) {
                                v.push('^');
                            }
                            if value(c) == best[ci] {
                                v = format!("**{v}**");
                            }
                            let _ = write!(md, " {v} |");
                        }
                    }
                }
            }
            md.push('\n');
        }
    }
    md
}

fn figure_csv(rows: &[&FigureRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "group",
        "count",
        "best_mean_f1",
        "best_mean_model",
        "best_mean_features",
        "best_mean_condition",
        "best_max_f1",
        "best_max_model",
        "best_max_features",
        "best_max_condition",
        "best_max_seed",
    ])?;
    for r in rows {
        let (m, x) = (&r.summary.best_mean, &r.summary.best_max);
        w.write_record([
            r.group.clone(),
            r.summary.count.to_string(),
            m.f1.to_string(),
            m.model.as_str().to_string(),
            m.features.as_str().to_string(),
            m.condition.id(),
            x.f1.to_string(),
            x.model.as_str().to_string(),
            x.features.as_str().to_string(),
            x.condition.id(),
            x.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Report(e.to_string()))
}

/// The subcategory for the breakdown table: the configured one, else
/// crying-baby when present, else the first noisy subcategory.
fn pick_breakdown(meta: &RunMeta) -> Option<String> {
    let subs: Vec<&str> = meta.conditions.iter().filter_map(|c| c.subcategory()).collect();
    if let Some(s) = &meta.breakdown_subcategory {
        return Some(s.clone());
    }
    if subs.contains(&"crying-baby") {
        return Some("crying-baby".to_string());
    }
    subs.first().map(|s| s.to_string())
}

/// Writes the performance table, the per-model breakdown and figure data.
pub fn report_performance(results: &Path) -> Result<PerformanceReport> {
    let meta = RunMeta::load(results)?;
    let runs = load_runs(results)?;
    let rows = performance_table(&runs, meta.alpha)?;
    let sub = pick_breakdown(&meta);
    let breakdown = match &sub {
        Some(s) => model_breakdown(&runs, s)?,
        None => Vec::new(),
    };
    let figures = figure_data(&runs);

    let dir = reports_dir(results)?;
    let put = |name: &str, bytes: Vec<u8>| fs::write(dir.join(name), bytes).map_err(|e| Error::io(dir.join(name), e));
    put(PERFORMANCE_CSV, performance_csv(&rows)?)?;
    write(&dir.join("performance.md"), &performance_md(&rows, &meta))?;
    if let Some(s) = &sub {
        put(BREAKDOWN_CSV, breakdown_csv(s, &breakdown)?)?;
        write(&dir.join("breakdown.md"), &breakdown_md(s, &breakdown, &meta))?;
    }
    let by_axis = |a: FigureAxis| figures.iter().filter(|f| f.axis == a).collect::<Vec<_>>();
    put(FIGURE_FEATURES_CSV, figure_csv(&by_axis(FigureAxis::Features))?)?;
    put(FIGURE_MODELS_CSV, figure_csv(&by_axis(FigureAxis::Model))?)?;
    Ok(PerformanceReport {
        rows,
        breakdown_subcategory: sub,
        breakdown,
        figures,
    })
}
