use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, NoiseSection, TestAudio};
use super::manifest::CorpusManifest;
use crate::audio::{read_wav, resample, AudioClip, CANONICAL_RATE};
use crate::error::{Error, Result};
use crate::features::{
    self, load_embeddings, manifest, write_feature_table, EmbeddingTable, FeatureCache, FeatureSetId, FeatureVector,
    EMBEDDING_DIM,
};
use crate::models::{Hyperparams, LabeledMatrix, ModelKind};
use crate::noise::{add_background_noise, add_short_noises, NoiseBank, NoiseMode, NoiseSpec};
use crate::seeding::{content_hash, derive_seed, rng};
use crate::stats::{cross_validate, make_folds, CellFailure, Condition, LedgerEntry, RunResult};

pub const LEDGER_FILE: &str = "ledger.jsonl";
pub const META_FILE: &str = "run_meta.json";
pub const SUMMARY_FILE: &str = "run_summary.json";
pub const FEATURES_DIR: &str = "features";

/// Caveats carried into every report.
pub const MODEL_NOTES: [&str; 3] = [
    "SVM is a linear soft-margin SVM and NN a one-hidden-layer MLP (64 units); both are stand-ins for unstated architectures",
    "F1 is binary with label 1 (AD) as the positive class",
    "each noisy recording mixes one seeded exemplar of its subcategory",
];

/// One (condition, feature set, model, seed) evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub condition: Condition,
    pub features: FeatureSetId,
    pub model: ModelKind,
    pub seed: u64,
}

/// Clean first, then each subcategory in taxonomy order with its modes.
pub fn conditions(cfg: &ExperimentConfig) -> Vec<Condition> {
    let tax = cfg.taxonomy();
    let mut out = vec![Condition::Clean];
    for sub in cfg.subcategories() {
        let cat = tax.category_of(&sub).expect("subcategories come from the taxonomy");
        for &mode in &cfg.noise.modes {
            out.push(Condition::noisy(cat, sub.clone(), mode));
        }
    }
    out
}

/// Every cell in canonical order: condition, feature set, model, seed.
pub fn grid(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for condition in conditions(cfg) {
        for &features in &cfg.features.sets {
            for &model in &cfg.models.kinds {
                for &seed in &cfg.evaluation.seeds {
                    cells.push(Cell {
                        condition: condition.clone(),
                        features,
                        model,
                        seed,
                    });
                }
            }
        }
    }
    cells
}

/// Narrows the grid. Each token names a subcategory, a feature set or a
/// model; tokens of the same kind are combined.
pub fn restrict(cfg: &mut ExperimentConfig, only: &[String]) -> Result<()> {
    let tax = cfg.taxonomy();
    let (mut subs, mut sets, mut models) = (Vec::new(), Vec::new(), Vec::new());
    for token in only {
        if tax.category_of(token).is_some() {
            subs.push(token.clone());
        } else if let Ok(s) = token.parse::<FeatureSetId>() {
            sets.push(s);
        } else if let Ok(m) = token.parse::<ModelKind>() {
            models.push(m);
        } else {
            return Err(Error::Config(format!(
                "--only {token:?} is not a subcategory, feature set or model"
            )));
        }
    }
    if !subs.is_empty() {
        let current = cfg.subcategories();
        cfg.noise.subcategories = subs.into_iter().filter(|s| current.contains(s)).collect();
        if cfg.noise.subcategories.is_empty() {
            return Err(Error::Config("--only removed every configured subcategory".into()));
        }
    }
    if !sets.is_empty() {
        cfg.features.sets.retain(|s| sets.contains(s));
        if !cfg.features.sets.contains(&FeatureSetId::Embedding) {
            cfg.features.embeddings = None;
        }
    }
    if !models.is_empty() {
        cfg.models.kinds.retain(|m| models.contains(m));
    }
    Ok(())
}

/// Result of [`validate`]; empty `violations` means ok.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub clips: usize,
    pub cells: usize,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks everything a run needs and lists every problem found.
pub fn validate(cfg: &ExperimentConfig) -> ValidationReport {
    let mut v = cfg.static_violations();
    let mut clips = 0;
    match CorpusManifest::load(&cfg.corpus.manifest) {
        Err(e) => v.push(format!("manifest {}: {e}", cfg.corpus.manifest.display())),
        Ok(m) => {
            clips = m.len();
            for r in &m.rows {
                if let Err(e) = read_wav(&r.path) {
                    v.push(format!("clip {}: {e}", r.clip_id));
                }
            }
            let counts = m.class_counts();
            for (class, &n) in counts.iter().enumerate() {
                if n < cfg.evaluation.k {
                    v.push(format!(
                        "class {class} has {n} clips, fewer than k = {}",
                        cfg.evaluation.k
                    ));
                }
            }
            if let Some(path) = &cfg.features.embeddings {
                match load_embeddings(path, EMBEDDING_DIM) {
                    Err(e) => v.push(format!("embeddings {}: {e}", path.display())),
                    Ok(table) => {
                        let ids = m.clip_ids();
                        let mut missing = Vec::new();
                        for c in conditions(cfg) {
                            if let Err(Error::Coverage { missing: m }) = table.vectors_for(&c.id(), &ids) {
                                missing.extend(m);
                            }
                        }
                        if !missing.is_empty() {
                            v.push(Error::Coverage { missing }.to_string());
                        }
                    }
                }
            }
        }
    }
    let subs = cfg.subcategories();
    if !subs.is_empty() && !cfg.noise.modes.is_empty() {
        match NoiseBank::load(&cfg.noise.bank, &cfg.taxonomy(), Some(&subs)) {
            Err(e) => v.push(format!("noise bank {}: {e}", cfg.noise.bank.display())),
            Ok(bank) => {
                for s in &subs {
                    if bank.entries(s).is_none_or(|e| e.is_empty()) {
                        v.push(format!("noise bank has no clips for subcategory {s}"));
                    }
                }
            }
        }
    }
    for dir in [&cfg.output.cache, &cfg.output.dir] {
        if let Err(e) = probe_writable(dir) {
            v.push(format!("{} is not writable: {e}", dir.display()));
        }
    }
    ValidationReport {
        violations: v,
        clips,
        cells: grid(cfg).len(),
    }
}

fn probe_writable(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(format!(".write-probe-{}", std::process::id()));
    fs::write(&probe, b"")?;
    fs::remove_file(probe)
}

/// The recording a clip becomes under `condition`.
pub fn materialize(
    clean: &AudioClip,
    condition: &Condition,
    bank: &NoiseBank,
    noise: &NoiseSection,
) -> Result<AudioClip> {
    let Condition::Noisy {
        category,
        subcategory,
        mode,
    } = condition
    else {
        return Ok(clean.clone());
    };
    let entries = bank
        .entries(subcategory)
        .filter(|e| !e.is_empty())
        .ok_or_else(|| Error::Config(format!("no bank entries for subcategory {subcategory}")))?;
    let mut r = rng(derive_seed(
        noise.seed,
        &[clean.source_id(), subcategory, mode.as_str()],
    ));
    let exemplar = &entries[r.gen_range(0..entries.len())];
    let mix_seed: u64 = r.gen();
    match mode {
        NoiseMode::Background => {
            let (lo, hi) = noise.snr_db_range;
            let snr = r.gen_range(lo..=hi);
            add_background_noise(clean, exemplar, snr, mix_seed)
        }
        NoiseMode::Short => {
            let mut spec = NoiseSpec::new(*category, subcategory.clone(), NoiseMode::Short, mix_seed);
            spec.snr_db_range = noise.snr_db_range;
            spec.placement = noise.placement.clone();
            add_short_noises(clean, std::slice::from_ref(exemplar), &spec, mix_seed)
        }
    }
}

fn audio_hash(clip: &AudioClip) -> String {
    let mut bytes = Vec::with_capacity(4 + 8 * clip.len());
    bytes.extend(clip.sample_rate().to_le_bytes());
    for s in clip.samples() {
        bytes.extend(s.to_le_bytes());
    }
    content_hash(&bytes)
}

/// File stem for a condition's feature table.
pub fn condition_stem(c: &Condition) -> String {
    match c {
        Condition::Clean => "clean".to_string(),
        Condition::Noisy { subcategory, mode, .. } => format!("{subcategory}-{mode}"),
    }
}

pub fn feature_table_path(out: &Path, set: FeatureSetId, c: &Condition) -> PathBuf {
    out.join(FEATURES_DIR)
        .join(set.as_str())
        .join(format!("{}.csv", condition_stem(c)))
}

/// Settings the report commands need, persisted next to the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub alpha: f64,
    pub k: usize,
    pub fold_seed: u64,
    pub seeds: Vec<u64>,
    pub test_audio: TestAudio,
    pub sets: Vec<FeatureSetId>,
    pub models: Vec<ModelKind>,
    pub conditions: Vec<Condition>,
    pub breakdown_subcategory: Option<String>,
    pub notes: Vec<String>,
}

impl RunMeta {
    pub fn load(dir: &Path) -> Result<Self> {
        let p = dir.join(META_FILE);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub cells: usize,
    pub computed: usize,
    pub reused: usize,
    pub failed: Vec<CellFailure>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Reuse successful ledger entries whose keys still match.
    pub resume: bool,
    /// Stop after computing this many new cells, as an interrupted run would.
    pub max_new_cells: Option<usize>,
}

/// Reads a ledger, skipping torn or unreadable lines.
pub fn read_ledger(path: &Path) -> Result<Vec<LedgerEntry>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(e) => out.push(e),
            Err(e) => log::warn!("{}:{}: skipping unreadable ledger line ({e})", path.display(), i + 1),
        }
    }
    Ok(out)
}

struct Dataset {
    train: LabeledMatrix,
    test: LabeledMatrix,
    hash: String,
}

fn matrix_hash(m: &LabeledMatrix) -> String {
    let mut bytes = Vec::new();
    for (id, (&label, row)) in m.clip_ids.iter().zip(m.labels.iter().zip(m.rows())) {
        bytes.extend((id.len() as u64).to_le_bytes());
        bytes.extend(id.as_bytes());
        bytes.push(label);
        for v in row {
            bytes.extend(v.to_le_bytes());
        }
    }
    content_hash(&bytes)
}

fn model_params(kind: ModelKind, hp: &Hyperparams) -> serde_json::Value {
    let v = match kind {
        ModelKind::Lr => serde_json::to_value(&hp.lr),
        ModelKind::Svm => serde_json::to_value(&hp.svm),
        ModelKind::Nn => serde_json::to_value(&hp.nn),
        ModelKind::Dt => serde_json::to_value(&hp.dt),
    };
    v.expect("hyperparameters serialize")
}

fn cell_key(cell: &Cell, data_hash: &str, cfg: &ExperimentConfig) -> String {
    let e = &cfg.evaluation;
    let desc = serde_json::json!({
        "cell": cell,
        "data": data_hash,
        "params": model_params(cell.model, &cfg.models.hyperparams),
        "k": e.k,
        "fold_seed": e.fold_seed,
    });
    content_hash(desc.to_string().as_bytes())
}

fn load_clips(m: &CorpusManifest) -> Result<Vec<AudioClip>> {
    m.rows
        .par_iter()
        .map(|r| {
            let clip = read_wav(&r.path)?;
            let clip = AudioClip::new(clip.samples().to_vec(), clip.sample_rate(), r.clip_id.clone())?;
            resample(&clip, CANONICAL_RATE)
        })
        .collect()
}

/// Feature vectors for every clip under one condition, via the cache.
fn condition_vectors(
    set: FeatureSetId,
    audio: &[AudioClip],
    condition: &Condition,
    embeddings: Option<&EmbeddingTable>,
    cache: &FeatureCache,
    ids: &[String],
) -> Result<Vec<FeatureVector>> {
    if set == FeatureSetId::Embedding {
        let table = embeddings.ok_or_else(|| Error::Config("no embedding sidecar loaded".into()))?;
        return table.vectors_for(&condition.id(), ids);
    }
    let m = manifest(set);
    let (names, version) = (m.names(), m.version());
    audio
        .par_iter()
        .map(|clip| {
            let key = FeatureCache::key(&audio_hash(clip), set, &version);
            if let Some(v) = cache.get(set, &key, &names, &version) {
                return Ok(v);
            }
            let v = features::extract(set, clip)?;
            cache.put(&key, &v)?;
            Ok(v)
        })
        .collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs the grid. Per-cell failures are recorded, never fatal; the caller
/// inspects `failed` in the summary. The ledger is appended as cells finish
/// and rewritten in grid order at the end.
pub fn run(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunSummary> {
    let report = validate(cfg);
    if !report.is_ok() {
        return Err(Error::Config(format!(
            "validation failed:\n  - {}",
            report.violations.join("\n  - ")
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.output.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_inner(cfg, opts))
}

fn run_inner(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunSummary> {
    let out = &cfg.output.dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let corpus = CorpusManifest::load(&cfg.corpus.manifest)?;
    let ids = corpus.clip_ids();
    let labels = corpus.labels();
    let clean = load_clips(&corpus)?;
    let subs = cfg.subcategories();
    let bank = if subs.is_empty() {
        NoiseBank::new()
    } else {
        NoiseBank::load(&cfg.noise.bank, &cfg.taxonomy(), Some(&subs))?
    };
    let embeddings = match &cfg.features.embeddings {
        Some(p) => Some(load_embeddings(p, EMBEDDING_DIM)?),
        None => None,
    };
    let cache = FeatureCache::new(&cfg.output.cache);
    let conds = conditions(cfg);

    let meta = RunMeta {
        alpha: cfg.evaluation.alpha,
        k: cfg.evaluation.k,
        fold_seed: cfg.evaluation.fold_seed,
        seeds: cfg.evaluation.seeds.clone(),
        test_audio: cfg.evaluation.test_audio,
        sets: cfg.features.sets.clone(),
        models: cfg.models.kinds.clone(),
        conditions: conds.clone(),
        breakdown_subcategory: cfg.output.breakdown_subcategory.clone(),
        notes: MODEL_NOTES.iter().map(|s| s.to_string()).collect(),
    };
    write_atomic(&out.join(META_FILE), serde_json::to_string_pretty(&meta)?.as_bytes())?;

    // features per (condition, set); failures are kept per entry
    let mut vectors: HashMap<(String, FeatureSetId), std::result::Result<Vec<FeatureVector>, String>> = HashMap::new();
    for cond in &conds {
        let audio: Vec<std::result::Result<AudioClip, String>> = clean
            .par_iter()
            .map(|c| materialize(c, cond, &bank, &cfg.noise).map_err(|e| e.to_string()))
            .collect();
        let audio: std::result::Result<Vec<AudioClip>, String> = audio.into_iter().collect();
        for &set in &cfg.features.sets {
            let r = match &audio {
                Err(e) => Err(e.clone()),
                Ok(a) => condition_vectors(set, a, cond, embeddings.as_ref(), &cache, &ids).map_err(|e| e.to_string()),
            };
            if let Ok(v) = &r {
                let rows: Vec<(String, u8, &FeatureVector)> = ids
                    .iter()
                    .zip(&labels)
                    .zip(v)
                    .map(|((i, &l), v)| (i.clone(), l, v))
                    .collect();
                write_feature_table(&feature_table_path(out, set, cond), &rows)?;
            }
            log::info!("features {} {}: {}", set, cond, if r.is_ok() { "ok" } else { "failed" });
            vectors.insert((cond.id(), set), r);
        }
    }

    let build = |v: &[FeatureVector]| -> Result<LabeledMatrix> {
        let refs: Vec<&FeatureVector> = v.iter().collect();
        LabeledMatrix::from_vectors(&refs, labels.clone(), ids.clone())
    };
    let mut datasets: HashMap<(String, FeatureSetId), std::result::Result<Dataset, String>> = HashMap::new();
    for cond in &conds {
        for &set in &cfg.features.sets {
            let train = vectors[&(cond.id(), set)].clone();
            let test = if cond.is_clean() || cfg.evaluation.test_audio == TestAudio::Shared {
                train.clone()
            } else {
                vectors[&(Condition::Clean.id(), set)].clone()
            };
            let ds = train.and_then(|tr| {
                let te = test?;
                let train = build(&tr).map_err(|e| e.to_string())?;
                let test = build(&te).map_err(|e| e.to_string())?;
                let hash = content_hash(format!("{}{}", matrix_hash(&train), matrix_hash(&test)).as_bytes());
                Ok(Dataset { train, test, hash })
            });
            datasets.insert((cond.id(), set), ds);
        }
    }

    let plan = make_folds(&labels, cfg.evaluation.k, cfg.evaluation.fold_seed)?;
    let cells = grid(cfg);
    let keyed: Vec<(Cell, String)> = cells
        .into_iter()
        .map(|c| {
            let h = match &datasets[&(c.condition.id(), c.features)] {
                Ok(d) => d.hash.clone(),
                Err(e) => content_hash(e.as_bytes()),
            };
            let k = cell_key(&c, &h, cfg);
            (c, k)
        })
        .collect();

    let ledger_path = out.join(LEDGER_FILE);
    let mut done: BTreeMap<String, LedgerEntry> = BTreeMap::new();
    if opts.resume {
        for e in read_ledger(&ledger_path)? {
            if matches!(e, LedgerEntry::Ok(_)) {
                done.insert(e.key().to_string(), e);
            }
        }
    } else if ledger_path.exists() {
        fs::remove_file(&ledger_path).map_err(|e| Error::io(&ledger_path, e))?;
    }
    // keep reusable entries, drop everything else from the working file
    {
        let mut text = String::new();
        for (_, k) in &keyed {
            if let Some(e) = done.get(k) {
                text.push_str(&serde_json::to_string(e)?);
                text.push('\n');
            }
        }
        write_atomic(&ledger_path, text.as_bytes())?;
    }
    let writer = Mutex::new(
        fs::OpenOptions::new()
            .append(true)
            .open(&ledger_path)
            .map_err(|e| Error::io(&ledger_path, e))?,
    );

    let todo: Vec<&(Cell, String)> = keyed.iter().filter(|(_, k)| !done.contains_key(k)).collect();
    let todo = match opts.max_new_cells {
        Some(n) => &todo[..n.min(todo.len())],
        None => &todo[..],
    };
    let reused = keyed.iter().filter(|(_, k)| done.contains_key(k)).count();
    let fresh: Vec<Result<LedgerEntry>> = todo
        .par_iter()
        .map(|(cell, key)| {
            let entry = evaluate_cell(cell, key, &datasets, &plan, &cfg.models.hyperparams);
            let line = serde_json::to_string(&entry)?;
            let mut w = writer.lock().expect("ledger writer poisoned");
            writeln!(w, "{line}").map_err(|e| Error::io(&ledger_path, e))?;
            w.flush().map_err(|e| Error::io(&ledger_path, e))?;
            Ok(entry)
        })
        .collect();
    drop(writer);
    let computed = fresh.len();
    for e in fresh {
        let e = e?;
        done.insert(e.key().to_string(), e);
    }

    // final ledger: grid order, current cells only
    let mut text = String::new();
    let mut failed = Vec::new();
    for (_, k) in &keyed {
        if let Some(e) = done.get(k) {
            if let LedgerEntry::Failed(f) = e {
                failed.push(f.clone());
            }
            text.push_str(&serde_json::to_string(e)?);
            text.push('\n');
        }
    }
    write_atomic(&ledger_path, text.as_bytes())?;
    let summary = RunSummary {
        cells: keyed.len(),
        computed,
        reused,
        failed,
    };
    write_atomic(
        &out.join(SUMMARY_FILE),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    Ok(summary)
}

fn evaluate_cell(
    cell: &Cell,
    key: &str,
    datasets: &HashMap<(String, FeatureSetId), std::result::Result<Dataset, String>>,
    plan: &crate::stats::FoldPlan,
    hp: &Hyperparams,
) -> LedgerEntry {
    let fail = |error: String| {
        LedgerEntry::Failed(CellFailure {
            key: key.to_string(),
            model: cell.model,
            features: cell.features,
            condition: cell.condition.clone(),
            seed: cell.seed,
            error,
        })
    };
    let ds = match &datasets[&(cell.condition.id(), cell.features)] {
        Ok(d) => d,
        Err(e) => return fail(e.clone()),
    };
    match cross_validate(&ds.train, &ds.test, plan, cell.model, hp, cell.seed) {
        Ok(cv) => LedgerEntry::Ok(RunResult {
            key: key.to_string(),
            model: cell.model,
            features: cell.features,
            condition: cell.condition.clone(),
            seed: cell.seed,
            fold_f1: cv.fold_f1,
            mean_f1: cv.mean_f1,
            clip_ids: ds.train.clip_ids.clone(),
            labels: ds.train.labels.clone(),
            predictions: cv.predictions,
        }),
        Err(e) => fail(e.to_string()),
    }
}
