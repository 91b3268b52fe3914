use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseCategory {
    Animals,
    Natural,
    Human,
    DomesticInterior,
    UrbanExterior,
}

impl NoiseCategory {
    pub const ALL: [NoiseCategory; 5] = [
        NoiseCategory::Animals,
        NoiseCategory::Natural,
        NoiseCategory::Human,
        NoiseCategory::DomesticInterior,
        NoiseCategory::UrbanExterior,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseCategory::Animals => "animals",
            NoiseCategory::Natural => "natural",
            NoiseCategory::Human => "human",
            NoiseCategory::DomesticInterior => "domestic-interior",
            NoiseCategory::UrbanExterior => "urban-exterior",
        }
    }
}

impl fmt::Display for NoiseCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown noise category {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    Short,
    Background,
}

impl NoiseMode {
    pub const ALL: [NoiseMode; 2] = [NoiseMode::Short, NoiseMode::Background];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseMode::Short => "short",
            NoiseMode::Background => "background",
        }
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Category → subcategory lists. Subcategory names are unique across categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    entries: BTreeMap<NoiseCategory, Vec<String>>,
}

impl Default for Taxonomy {
    /// Five categories with three subcategories each.
    fn default() -> Self {
        let table: [(NoiseCategory, [&str; 3]); 5] = [
            (NoiseCategory::Animals, ["dog", "cat", "crow"]),
            (NoiseCategory::Natural, ["rain", "wind", "chirping-birds"]),
            (NoiseCategory::Human, ["crying-baby", "sneezing", "coughing"]),
            (
                NoiseCategory::DomesticInterior,
                ["clock-ticking", "washing-machine", "vacuum-cleaner"],
            ),
            (NoiseCategory::UrbanExterior, ["train", "car-horn", "siren"]),
        ];
        Self {
            entries: table
                .into_iter()
                .map(|(c, subs)| (c, subs.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }
}

impl Taxonomy {
    pub fn new(entries: BTreeMap<NoiseCategory, Vec<String>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for subs in entries.values() {
            for s in subs {
                if !seen.insert(s.as_str()) {
                    return Err(Error::Config(format!("subcategory {s:?} listed twice")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn category_of(&self, subcategory: &str) -> Option<NoiseCategory> {
        self.entries
            .iter()
            .find(|(_, subs)| subs.iter().any(|s| s == subcategory))
            .map(|(c, _)| *c)
    }

    /// `(category, subcategory)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (NoiseCategory, &str)> {
        self.entries
            .iter()
            .flat_map(|(c, subs)| subs.iter().map(move |s| (*c, s.as_str())))
    }

    pub fn subcategories(&self, category: NoiseCategory) -> &[String] {
        self.entries.get(&category).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Placement parameters for the short-event mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortNoisePlacement {
    /// Inclusive range of events per ten seconds of audio.
    pub events_per_10s: (u32, u32),
    /// Pause between consecutive events, seconds.
    pub pause_secs: (f64, f64),
    /// Per-event SNR against the clean segment it overlaps, dB.
    pub event_snr_db: (f64, f64),
}

impl Default for ShortNoisePlacement {
    fn default() -> Self {
        Self {
            events_per_10s: (1, 8),
            pause_secs: (0.3, 2.0),
            event_snr_db: (0.0, 24.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub category: NoiseCategory,
    pub subcategory: String,
    pub mode: NoiseMode,
    pub snr_db_range: (f64, f64),
    pub placement: ShortNoisePlacement,
    pub seed: u64,
}

impl NoiseSpec {
    pub const DEFAULT_BACKGROUND_SNR_DB: (f64, f64) = (3.0, 30.0);

    pub fn new(category: NoiseCategory, subcategory: impl Into<String>, mode: NoiseMode, seed: u64) -> Self {
        Self {
            category,
            subcategory: subcategory.into(),
            mode,
            snr_db_range: Self::DEFAULT_BACKGROUND_SNR_DB,
            placement: ShortNoisePlacement::default(),
            seed,
        }
    }

    pub fn validate(&self, taxonomy: &Taxonomy) -> Result<()> {
        fn ordered(name: &str, lo: f64, hi: f64) -> Result<()> {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("{name} range [{lo}, {hi}] is invalid")));
            }
            Ok(())
        }
        ordered("snr_db", self.snr_db_range.0, self.snr_db_range.1)?;
        ordered(
            "event_snr_db",
            self.placement.event_snr_db.0,
            self.placement.event_snr_db.1,
        )?;
        ordered("pause_secs", self.placement.pause_secs.0, self.placement.pause_secs.1)?;
        if self.placement.pause_secs.0 < 0.0 {
            return Err(Error::Config("pause_secs must be nonnegative".into()));
        }
        let (lo, hi) = self.placement.events_per_10s;
        if lo > hi {
            return Err(Error::Config(format!("events_per_10s range [{lo}, {hi}] is invalid")));
        }
        match taxonomy.category_of(&self.subcategory) {
            Some(c) if c == self.category => Ok(()),
            Some(c) => Err(Error::Config(format!(
                "subcategory {} belongs to {c}, not {}",
                self.subcategory, self.category
            ))),
            None => Err(Error::Config(format!(
                "subcategory {} is not in the taxonomy",
                self.subcategory
            ))),
        }
    }
}
