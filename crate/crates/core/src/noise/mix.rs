use rand::Rng;

use super::NoiseSpec;
use crate::audio::{mean_power, AudioClip};
use crate::error::{Error, Result};
use crate::seeding;

fn same_rate(a: &AudioClip, b: &AudioClip) -> Result<()> {
    if a.sample_rate() != b.sample_rate() {
        return Err(Error::Parameter(format!(
            "sample rates differ: {} has {} Hz, {} has {} Hz",
            a.source_id(),
            a.sample_rate(),
            b.source_id(),
            b.sample_rate()
        )));
    }
    Ok(())
}

fn db_to_power_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn clamp_and_log(clean: &AudioClip, mixed: Vec<f64>) -> Result<AudioClip> {
    let clamped = mixed.iter().filter(|s| s.abs() > 1.0).count();
    if clamped > 0 {
        log::warn!("{}: clamped {clamped} samples after mixing", clean.source_id());
    }
    clean.with_samples(mixed)
}

/// The scaled noise that background mixing adds to `clean`, before clamping.
///
/// A noise clip longer than the clean one is cropped at a seeded offset;
/// a shorter one is tiled starting from a seeded offset. The gain is set on
/// the covering layer itself, so the requested SNR holds exactly up to
/// rounding.
pub fn background_noise_layer(clean: &AudioClip, noise: &AudioClip, snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    same_rate(clean, noise)?;
    if mean_power(noise.samples()) == 0.0 {
        return Err(Error::ZeroPower(noise.source_id().to_owned()));
    }
    let mut rng = seeding::rng(seed);
    let n = clean.len();
    let src = noise.samples();
    let layer: Vec<f64> = if src.len() >= n {
        let offset = rng.gen_range(0..=src.len() - n);
        src[offset..offset + n].to_vec()
    } else {
        let offset = rng.gen_range(0..src.len());
        (0..n).map(|i| src[(offset + i) % src.len()]).collect()
    };
    let layer_power = mean_power(&layer);
    if layer_power == 0.0 {
        return Err(Error::ZeroPower(noise.source_id().to_owned()));
    }
    let clean_power = mean_power(clean.samples());
    let gain = if clean_power > 0.0 {
        (clean_power / (layer_power * db_to_power_ratio(snr_db))).sqrt()
    } else {
        log::warn!("{}: silent clean clip, noise left at bank level", clean.source_id());
        1.0
    };
    Ok(layer.into_iter().map(|s| s * gain).collect())
}

/// Continuous background noise at `snr_db`, clamped to `[-1, 1]`.
pub fn add_background_noise(clean: &AudioClip, noise: &AudioClip, snr_db: f64, seed: u64) -> Result<AudioClip> {
    let layer = background_noise_layer(clean, noise, snr_db, seed)?;
    let mixed = clean.samples().iter().zip(&layer).map(|(c, n)| c + n).collect();
    clamp_and_log(clean, mixed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventPlacement {
    /// First sample of the event in the clean clip.
    pub start: usize,
    /// Samples actually inserted (after truncation at the clip end).
    pub len: usize,
    /// Index of the bank entry used.
    pub entry: usize,
    pub snr_db: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortNoiseLayer {
    pub layer: Vec<f64>,
    pub events: Vec<EventPlacement>,
}

/// Places short noise events over `clean` following `spec.placement`.
///
/// The event count is drawn from the per-ten-seconds range and scaled by
/// the clip duration, with a floor of one. Events follow each other with a
/// seeded pause and are truncated at the clip end. Each event's gain sets
/// its SNR against the clean segment it overlaps; over silence the event
/// keeps its bank level.
pub fn short_noise_layer(
    clean: &AudioClip,
    bank_entries: &[AudioClip],
    spec: &NoiseSpec,
    seed: u64,
) -> Result<ShortNoiseLayer> {
    if bank_entries.is_empty() {
        return Err(Error::Config(format!(
            "no bank entries for subcategory {}",
            spec.subcategory
        )));
    }
    for e in bank_entries {
        same_rate(clean, e)?;
        if mean_power(e.samples()) == 0.0 {
            return Err(Error::ZeroPower(e.source_id().to_owned()));
        }
    }
    let p = &spec.placement;
    let rate = clean.sample_rate() as f64;
    let n = clean.len();
    let mut rng = seeding::rng(seed);

    let per_10s = rng.gen_range(p.events_per_10s.0..=p.events_per_10s.1) as f64;
    let count = ((per_10s * clean.duration_secs() / 10.0).round() as usize).max(1);
    let first_limit = ((p.pause_secs.1 * rate) as usize).min(n.saturating_sub(1));
    let mut cursor = rng.gen_range(0..=first_limit);

    let mut layer = vec![0.0; n];
    let mut events = Vec::with_capacity(count);
    for _ in 0..count {
        if cursor >= n {
            break;
        }
        let entry = rng.gen_range(0..bank_entries.len());
        let snr_db = rng.gen_range(p.event_snr_db.0..=p.event_snr_db.1);
        let pause = rng.gen_range(p.pause_secs.0..=p.pause_secs.1);
        let source = bank_entries[entry].samples();
        let len = source.len().min(n - cursor);
        let event = &source[..len];
        let event_power = mean_power(event);
        let clean_power = mean_power(&clean.samples()[cursor..cursor + len]);
        let gain = if event_power == 0.0 {
            0.0
        } else if clean_power > 0.0 {
            (clean_power / (event_power * db_to_power_ratio(snr_db))).sqrt()
        } else {
            1.0
        };
        for (slot, s) in layer[cursor..cursor + len].iter_mut().zip(event) {
            *slot += gain * s;
        }
        events.push(EventPlacement {
            start: cursor,
            len,
            entry,
            snr_db,
            gain,
        });
        cursor += len + (pause * rate).round() as usize;
    }
    Ok(ShortNoiseLayer { layer, events })
}

/// Short-event noise mixing, clamped to `[-1, 1]`.
pub fn add_short_noises(
    clean: &AudioClip,
    bank_entries: &[AudioClip],
    spec: &NoiseSpec,
    seed: u64,
) -> Result<AudioClip> {
    let ShortNoiseLayer { layer, .. } = short_noise_layer(clean, bank_entries, spec, seed)?;
    let mixed = clean.samples().iter().zip(&layer).map(|(c, n)| c + n).collect();
    clamp_and_log(clean, mixed)
}

/// `10 log10(P(clean) / P(mixed - clean))`; `+inf` when nothing was added.
pub fn measure_snr(clean: &[f64], mixed: &[f64]) -> Result<f64> {
    if clean.len() != mixed.len() {
        return Err(Error::Schema(format!(
            "clean has {} samples, mixed has {}",
            clean.len(),
            mixed.len()
        )));
    }
    let residual: Vec<f64> = mixed.iter().zip(clean).map(|(m, c)| m - c).collect();
    let noise_power = mean_power(&residual);
    if noise_power == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (mean_power(clean) / noise_power).log10())
}
