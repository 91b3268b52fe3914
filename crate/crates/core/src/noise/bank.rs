use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{NoiseCategory, Taxonomy};
use crate::audio::{read_wav, resample, AudioClip, CANONICAL_RATE};
use crate::error::{Error, Result};

/// Peak level every bank clip is normalized to on load.
pub const BANK_PEAK_DBFS: f64 = -1.0;

#[derive(Debug, Clone, Default)]
pub struct NoiseBank {
    entries: BTreeMap<String, (NoiseCategory, Vec<AudioClip>)>,
}

fn sorted_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

impl NoiseBank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a clip after resampling it to the canonical rate and normalizing
    /// its peak to [`BANK_PEAK_DBFS`].
    pub fn insert(&mut self, category: NoiseCategory, subcategory: &str, clip: AudioClip) -> Result<()> {
        let clip = resample(&clip, CANONICAL_RATE)?;
        let peak = clip.peak();
        if peak == 0.0 {
            return Err(Error::ZeroPower(clip.source_id().to_owned()));
        }
        let gain = 10f64.powf(BANK_PEAK_DBFS / 20.0) / peak;
        let clip = clip.with_samples(clip.samples().iter().map(|s| s * gain).collect())?;
        let slot = self
            .entries
            .entry(subcategory.to_owned())
            .or_insert_with(|| (category, Vec::new()));
        if slot.0 != category {
            return Err(Error::Config(format!(
                "subcategory {subcategory} registered under {} and {category}",
                slot.0
            )));
        }
        slot.1.push(clip);
        Ok(())
    }

    /// Loads `dir/<category>/<subcategory>/*.wav`. Directory names must match
    /// the taxonomy. When `only` is given, other subcategories are skipped.
    pub fn load(dir: impl AsRef<Path>, taxonomy: &Taxonomy, only: Option<&[String]>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut bank = Self::new();
        for cat_dir in sorted_dir(dir)? {
            if !cat_dir.is_dir() {
                continue;
            }
            let cat_name = cat_dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let category: NoiseCategory = cat_name.parse()?;
            for sub_dir in sorted_dir(&cat_dir)? {
                if !sub_dir.is_dir() {
                    continue;
                }
                let sub = sub_dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
                match taxonomy.category_of(&sub) {
                    Some(c) if c == category => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "bank directory {cat_name}/{sub} is not in the taxonomy"
                        )))
                    }
                }
                if only.is_some_and(|o| !o.iter().any(|s| s == &sub)) {
                    continue;
                }
                for file in sorted_dir(&sub_dir)? {
                    let is_wav = file.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
                    if is_wav {
                        bank.insert(category, &sub, read_wav(&file)?)?;
                    }
                }
            }
        }
        Ok(bank)
    }

    pub fn entries(&self, subcategory: &str) -> Option<&[AudioClip]> {
        self.entries.get(subcategory).map(|(_, v)| v.as_slice())
    }

    pub fn category_of(&self, subcategory: &str) -> Option<NoiseCategory> {
        self.entries.get(subcategory).map(|(c, _)| *c)
    }

    pub fn subcategories(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
