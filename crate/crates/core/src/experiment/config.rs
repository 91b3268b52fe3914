use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSetId;
use crate::models::{Hyperparams, ModelKind};
use crate::noise::{NoiseMode, ShortNoisePlacement, Taxonomy};
use crate::stats::DEFAULT_ALPHA;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// CSV with `clip_id,path,label`.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub bank: PathBuf,
    /// Empty means every subcategory in the taxonomy.
    pub subcategories: Vec<String>,
    pub modes: Vec<NoiseMode>,
    pub snr_db_range: (f64, f64),
    pub placement: ShortNoisePlacement,
    /// Base seed for exemplar choice, SNR draws and event placement.
    pub seed: u64,
    /// Replaces the default taxonomy when given.
    pub taxonomy: Option<Taxonomy>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            bank: PathBuf::from("noise-bank"),
            subcategories: Vec::new(),
            modes: NoiseMode::ALL.to_vec(),
            snr_db_range: crate::noise::NoiseSpec::DEFAULT_BACKGROUND_SNR_DB,
            placement: ShortNoisePlacement::default(),
            seed: 0,
            taxonomy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesSection {
    pub sets: Vec<FeatureSetId>,
    /// Precomputed embedding sidecar; required iff the embedding set is requested.
    pub embeddings: Option<PathBuf>,
}

impl Default for FeaturesSection {
    fn default() -> Self {
        Self {
            sets: FeatureSetId::ALL.to_vec(),
            embeddings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsSection {
    pub kinds: Vec<ModelKind>,
    pub hyperparams: Hyperparams,
}

impl Default for ModelsSection {
    fn default() -> Self {
        Self {
            kinds: ModelKind::ALL.to_vec(),
            hyperparams: Hyperparams::default(),
        }
    }
}

/// Audio the held-out folds of a noisy condition are scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestAudio {
    /// Same noisy condition as training.
    Shared,
    /// The clean recordings of the held-out clips.
    Clean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub k: usize,
    /// Fold assignment is fixed across seeds so that only model
    /// initialization varies with the seed.
    pub fold_seed: u64,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub test_audio: TestAudio,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            k: 10,
            fold_seed: 0,
            seeds: vec![1, 2, 3],
            alpha: DEFAULT_ALPHA,
            test_audio: TestAudio::Shared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub cache: PathBuf,
    pub jobs: usize,
    /// Subcategory for the per-model breakdown table.
    pub breakdown_subcategory: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("results"),
            cache: PathBuf::from("cache"),
            jobs: 1,
            breakdown_subcategory: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: CorpusSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub features: FeaturesSection,
    #[serde(default)]
    pub models: ModelsSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    /// Parses TOML. Relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        rebase(base, &mut cfg.corpus.manifest);
        rebase(base, &mut cfg.noise.bank);
        if let Some(p) = cfg.features.embeddings.as_mut() {
            rebase(base, p);
        }
        rebase(base, &mut cfg.output.dir);
        rebase(base, &mut cfg.output.cache);
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn taxonomy(&self) -> Taxonomy {
        self.noise.taxonomy.clone().unwrap_or_default()
    }

    /// Requested subcategories in taxonomy order.
    pub fn subcategories(&self) -> Vec<String> {
        let tax = self.taxonomy();
        tax.iter()
            .map(|(_, s)| s.to_string())
            .filter(|s| self.noise.subcategories.is_empty() || self.noise.subcategories.contains(s))
            .collect()
    }

    /// Problems that can be found without touching the file system.
    pub fn static_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let e = &self.evaluation;
        if e.seeds.is_empty() {
            v.push("evaluation.seeds is empty".to_string());
        }
        if e.seeds.iter().collect::<BTreeSet<_>>().len() != e.seeds.len() {
            v.push("evaluation.seeds has duplicates".to_string());
        }
        if e.k < 2 {
            v.push(format!("evaluation.k = {} leaves no held-out data", e.k));
        }
        if !(e.alpha > 0.0 && e.alpha < 1.0) {
            v.push(format!("evaluation.alpha = {} is outside (0, 1)", e.alpha));
        }
        if self.features.sets.is_empty() {
            v.push("features.sets is empty".to_string());
        }
        if self.models.kinds.is_empty() {
            v.push("models.kinds is empty".to_string());
        }
        if self.noise.modes.is_empty() {
            v.push("noise.modes is empty".to_string());
        }
        if self.output.jobs == 0 {
            v.push("output.jobs must be at least 1".to_string());
        }
        let tax = self.taxonomy();
        for s in &self.noise.subcategories {
            if tax.category_of(s).is_none() {
                v.push(format!("noise subcategory {s:?} is not in the taxonomy"));
            }
        }
        let wants_embeddings = self.features.sets.contains(&FeatureSetId::Embedding);
        match (wants_embeddings, &self.features.embeddings) {
            (true, None) => v.push("embedding-768 requested but features.embeddings is not set".to_string()),
            (false, Some(_)) => v.push("features.embeddings given but embedding-768 is not requested".to_string()),
            _ => {}
        }
        let mut spec = crate::noise::NoiseSpec::new(crate::noise::NoiseCategory::Animals, "", NoiseMode::Short, 0);
        spec.snr_db_range = self.noise.snr_db_range;
        spec.placement = self.noise.placement.clone();
        if let Some(sub) = tax.iter().next() {
            spec.category = sub.0;
            spec.subcategory = sub.1.to_string();
            if let Err(e) = spec.validate(&tax) {
                v.push(e.to_string());
            }
        }
        v
    }
}
