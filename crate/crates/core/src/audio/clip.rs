use crate::error::{Error, Result};

/// Sample rate every analysis stage expects after ingestion.
pub const CANONICAL_RATE: u32 = 16_000;

/// Immutable mono audio. Samples are finite and lie in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl AudioClip {
    /// Builds a clip, clamping out-of-range samples to `[-1, 1]`.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        let source_id = source_id.into();
        if samples.is_empty() {
            return Err(Error::Parameter(format!("clip {source_id} has no samples")));
        }
        if sample_rate == 0 {
            return Err(Error::Parameter(format!("clip {source_id} has sample rate 0")));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Parameter(format!(
                "clip {source_id} has a non-finite sample at index {i}"
            )));
        }
        let samples = samples.into_iter().map(|s| s.clamp(-1.0, 1.0)).collect();
        Ok(Self {
            samples,
            sample_rate,
            source_id,
        })
    }

    /// New clip with the same rate and id but different samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate, self.source_id.clone())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    pub fn ensure_canonical(&self) -> Result<()> {
        if self.sample_rate != CANONICAL_RATE {
            return Err(Error::Parameter(format!(
                "clip {} is at {} Hz, expected {CANONICAL_RATE} Hz",
                self.source_id, self.sample_rate
            )));
        }
        Ok(())
    }
}

pub fn mean_power(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    compensated_sum(samples.iter().map(|s| s * s)) / samples.len() as f64
}

/// Neumaier summation; keeps levels of repeated material stable.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// RMS level in dBFS. Silence yields negative infinity.
pub fn rms_db(clip: &AudioClip) -> f64 {
    let power = mean_power(clip.samples());
    if power == 0.0 {
        return f64::NEG_INFINITY;
    }
    10.0 * power.log10()
}
