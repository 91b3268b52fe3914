use std::fs;
use std::path::Path;

use noiseprobe::audio::read_wav;
use noiseprobe::experiment::{
    self, conditions, grid, materialize, restrict, synthetic, CorpusManifest, ExperimentConfig, RunOptions, Shade,
    LEDGER_FILE,
};
use noiseprobe::features::FeatureSetId;
use noiseprobe::models::ModelKind;
use noiseprobe::noise::{NoiseBank, NoiseCategory, NoiseMode};
use noiseprobe::stats::{Condition, LedgerEntry};

fn config(dir: &Path, body: &str) -> ExperimentConfig {
    let text = format!("[corpus]\nmanifest = \"corpus/manifest.csv\"\n{body}");
    ExperimentConfig::from_toml(&text, dir).unwrap()
}

#[test]
fn default_grid_covers_the_full_taxonomy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let cells = grid(&cfg);
    // (15 subcategories x 2 modes + clean) x 3 sets x 4 models x 3 seeds
    assert_eq!(cells.len(), 1116);
    assert_eq!(conditions(&cfg).len(), 31);
    assert!(cells[..36].iter().all(|c| c.condition.is_clean()));
    assert_eq!(
        (cells[0].features, cells[0].model, cells[0].seed),
        (FeatureSetId::ConvFeat, ModelKind::Lr, 1)
    );
    assert_eq!(cells[1].seed, 2);
}

#[test]
fn restriction_narrows_to_three_cells() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), "[evaluation]\nseeds = [1]\n");
    restrict(&mut cfg, &["dog".into(), "convfeat-182".into(), "LR".into()]).unwrap();
    let ids: Vec<String> = grid(&cfg).iter().map(|c| c.condition.id()).collect();
    assert_eq!(ids, ["clean", "dog/short", "dog/background"]);

    let mut cfg = config(dir.path(), "");
    assert!(restrict(&mut cfg, &["tuba".into()]).is_err());
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[corpus]\nmanifest = \"m.csv\"\n[output]\ndirectory = \"x\"\n";
    assert!(ExperimentConfig::from_toml(text, dir.path()).is_err());

    let cfg = config(
        dir.path(),
        "[evaluation]\nk = 1\nseeds = [2, 2]\n[noise]\nsubcategories = [\"tuba\"]\n",
    );
    let v = cfg.static_violations();
    assert!(v.len() >= 3, "{v:?}");
}

#[test]
fn relative_paths_follow_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[output]\ndir = \"out\"\n");
    assert_eq!(cfg.corpus.manifest, dir.path().join("corpus/manifest.csv"));
    assert_eq!(cfg.output.dir, dir.path().join("out"));
}

#[test]
fn shade_thresholds_are_strict() {
    assert_eq!(Shade::of(0.5), Shade::None);
    assert_eq!(Shade::of(0.5001), Shade::High);
    assert_eq!(Shade::of(0.8), Shade::High);
    assert_eq!(Shade::of(0.8001), Shade::VeryHigh);
}

#[test]
fn synthetic_corpus_is_reproducible_and_balanced() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = synthetic::make_synthetic_corpus(a.path(), 10, 9).unwrap();
    synthetic::make_synthetic_corpus(b.path(), 10, 9).unwrap();
    assert_eq!(ma.len(), 20);
    assert_eq!(ma.class_counts(), [10, 10]);
    for r in &ma.rows {
        let name = r.path.file_name().unwrap();
        assert_eq!(
            fs::read(&r.path).unwrap(),
            fs::read(b.path().join("audio").join(name)).unwrap()
        );
        let d = read_wav(&r.path).unwrap().duration_secs();
        assert!((3.0..=6.0).contains(&d), "{} lasts {d}", r.clip_id);
    }
    let back = CorpusManifest::load(a.path().join("manifest.csv")).unwrap();
    assert_eq!(back, ma);
    assert!(synthetic::make_synthetic_corpus(a.path(), 9, 9).is_err());
}

#[test]
fn materialized_conditions_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = synthetic::make_synthetic_corpus(&dir.path().join("corpus"), 10, 1).unwrap();
    synthetic::make_synthetic_noise_bank(&dir.path().join("bank"), &synthetic::DESK_SUBCATEGORIES, 2, 1).unwrap();
    let cfg = config(
        dir.path(),
        "[noise]\nbank = \"bank\"\nsubcategories = [\"dog\", \"rain\"]\n",
    );
    let bank = NoiseBank::load(&cfg.noise.bank, &cfg.taxonomy(), None).unwrap();
    let clip = read_wav(&m.rows[0].path).unwrap();

    assert_eq!(materialize(&clip, &Condition::Clean, &bank, &cfg.noise).unwrap(), clip);
    let dog = Condition::noisy(NoiseCategory::Animals, "dog", NoiseMode::Background);
    let once = materialize(&clip, &dog, &bank, &cfg.noise).unwrap();
    assert_eq!(once, materialize(&clip, &dog, &bank, &cfg.noise).unwrap());
    assert_ne!(once, clip);
    let rain = Condition::noisy(NoiseCategory::Natural, "rain", NoiseMode::Background);
    assert_ne!(once, materialize(&clip, &rain, &bank, &cfg.noise).unwrap());
    let short = Condition::noisy(NoiseCategory::Animals, "dog", NoiseMode::Short);
    assert_ne!(once, materialize(&clip, &short, &bank, &cfg.noise).unwrap());
}

#[test]
fn validation_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    synthetic::make_synthetic_corpus(&dir.path().join("corpus"), 10, 2).unwrap();
    let cfg = config(
        dir.path(),
        "[noise]\nbank = \"bank\"\nsubcategories = [\"dog\"]\n[evaluation]\nk = 11\n[features]\nsets = [\"convfeat-182\"]\n",
    );
    fs::remove_file(dir.path().join("corpus/audio/hc-003.wav")).unwrap();
    let report = experiment::validate(&cfg);
    let all = report.violations.join("\n");
    assert!(all.contains("hc-003"), "{all}");
    assert!(all.contains("fewer than k = 11"), "{all}");
    assert!(all.contains("noise bank"), "{all}");
    assert_eq!(report.clips, 20);
}

#[test]
fn changed_hyperparameters_invalidate_only_their_cells() {
    let dir = tempfile::tempdir().unwrap();
    synthetic::make_synthetic_corpus(&dir.path().join("corpus"), 10, 4).unwrap();
    synthetic::make_synthetic_noise_bank(&dir.path().join("bank"), &synthetic::DESK_SUBCATEGORIES, 1, 4).unwrap();
    let body = |depth: usize| {
        format!(
            "[noise]\nbank = \"bank\"\nsubcategories = [\"rain\"]\n[features]\nsets = [\"convfeat-182\"]\n\
             [models]\nkinds = [\"LR\", \"DT\"]\n[models.hyperparams.dt]\nmax_depth = {depth}\n\
             [evaluation]\nseeds = [1]\n"
        )
    };
    let first = experiment::run(&config(dir.path(), &body(5)), RunOptions::default()).unwrap();
    assert_eq!((first.cells, first.computed, first.reused), (6, 6, 0));
    let resume = RunOptions {
        resume: true,
        max_new_cells: None,
    };
    let again = experiment::run(&config(dir.path(), &body(5)), resume).unwrap();
    assert_eq!((again.computed, again.reused), (0, 6));
    let changed = experiment::run(&config(dir.path(), &body(2)), resume).unwrap();
    assert_eq!((changed.computed, changed.reused), (3, 3));

    let ledger = experiment::read_ledger(&dir.path().join("results").join(LEDGER_FILE)).unwrap();
    let models: Vec<ModelKind> = ledger
        .iter()
        .map(|e| match e {
            LedgerEntry::Ok(r) => r.model,
            LedgerEntry::Failed(f) => panic!("{}", f.error),
        })
        .collect();
    assert_eq!(models, [ModelKind::Lr, ModelKind::Dt].repeat(3));
}
