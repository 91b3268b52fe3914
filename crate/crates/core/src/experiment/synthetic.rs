//! Desk-scale stand-ins for the restricted speech corpus and the noise bank.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::manifest::{CorpusManifest, ManifestRow};
use crate::audio::{
    synth_signal, write_wav, AudioClip, Resonance, SignalKind, SignalSpec, VoiceParams, WavEncoding, CANONICAL_RATE,
};
use crate::error::{Error, Result};
use crate::noise::NoiseCategory;
use crate::seeding::{derive_seed, rng};

/// The six subcategories of the desk-scale bank, at least one per category.
pub const DESK_SUBCATEGORIES: [(NoiseCategory, &str); 6] = [
    (NoiseCategory::Animals, "dog"),
    (NoiseCategory::Natural, "rain"),
    (NoiseCategory::Human, "crying-baby"),
    (NoiseCategory::Human, "coughing"),
    (NoiseCategory::DomesticInterior, "vacuum-cleaner"),
    (NoiseCategory::UrbanExterior, "siren"),
];

fn voice(label: u8, r: &mut ChaCha8Rng) -> VoiceParams {
    // class 0: higher pitch and a bright source; class 1: lower and darker
    let (f0, tilt) = if label == 0 {
        (r.gen_range(180.0..=220.0), r.gen_range(0.15..0.35))
    } else {
        (r.gen_range(120.0..=160.0), r.gen_range(0.6..0.75))
    };
    let jiggle = |r: &mut ChaCha8Rng, f: f64| f * r.gen_range(0.9..1.1);
    VoiceParams {
        f0,
        formants: vec![
            Resonance {
                frequency: jiggle(r, 700.0),
                bandwidth: 90.0,
            },
            Resonance {
                frequency: jiggle(r, 1200.0),
                bandwidth: 110.0,
            },
            Resonance {
                frequency: jiggle(r, 2600.0),
                bandwidth: 160.0,
            },
        ],
        tilt,
        jitter: r.gen_range(0.004..0.012),
        shimmer: r.gen_range(0.02..0.06),
        breathiness: r.gen_range(0.05..0.15),
        intonation: r.gen_range(0.05..0.12),
        syllable_rate: r.gen_range(3.0..5.0),
        amplitude: r.gen_range(0.3..0.6),
        noise_floor: 0.001,
    }
}

/// Writes `2 n` formant-voice clips under `out/audio` and `out/manifest.csv`.
/// Classes are separable by construction (pitch and spectral tilt).
pub fn make_synthetic_corpus(out: &Path, n_per_class: usize, seed: u64) -> Result<CorpusManifest> {
    if n_per_class < 10 {
        return Err(Error::Parameter(format!(
            "n per class must be at least 10, got {n_per_class}"
        )));
    }
    let audio = out.join("audio");
    fs::create_dir_all(&audio).map_err(|e| Error::io(&audio, e))?;
    let mut rows = Vec::with_capacity(2 * n_per_class);
    for label in [0u8, 1] {
        for i in 0..n_per_class {
            let id = format!("{}-{i:03}", if label == 0 { "hc" } else { "ad" });
            let mut r = rng(derive_seed(seed, &["corpus", &id]));
            let params = voice(label, &mut r);
            let duration = r.gen_range(3.0..=6.0);
            let clip = synth_signal(
                &SignalSpec::new(SignalKind::FormantVoice(params), duration, CANONICAL_RATE),
                r.gen(),
            )?;
            let path = audio.join(format!("{id}.wav"));
            write_wav(&path, &clip, WavEncoding::Pcm16)?;
            rows.push(ManifestRow {
                clip_id: id,
                path,
                label,
            });
        }
    }
    let manifest = CorpusManifest { rows };
    manifest.write(out.join("manifest.csv"))?;
    Ok(manifest)
}

fn lowpass(x: &mut [f64], a: f64) {
    let mut prev = 0.0;
    for s in x.iter_mut() {
        prev += a * (*s - prev);
        *s = prev;
    }
}

fn noise(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect()
}

/// Harmonic tone following `f0(t)` with `1/k` harmonic weights.
fn harmonic(n: usize, harmonics: usize, f0: impl Fn(f64) -> f64) -> Vec<f64> {
    let fs = CANONICAL_RATE as f64;
    let mut phase = 0.0;
    (0..n)
        .map(|i| {
            phase += 2.0 * PI * f0(i as f64 / fs) / fs;
            (1..=harmonics).map(|k| (k as f64 * phase).sin() / k as f64).sum()
        })
        .collect()
}

fn envelope(x: &mut [f64], f: impl Fn(f64) -> f64) {
    let fs = CANONICAL_RATE as f64;
    for (i, s) in x.iter_mut().enumerate() {
        *s *= f(i as f64 / fs);
    }
}

fn bursts(t: f64, starts: &[f64], len: f64, decay: f64) -> f64 {
    starts
        .iter()
        .filter(|&&s| t >= s && t < s + len)
        .map(|&s| (-(t - s) / decay).exp())
        .sum()
}

/// A synthetic exemplar that loosely imitates the named sound. Unknown
/// names get band-limited noise with a name-dependent colour.
pub fn synth_noise(subcategory: &str, seed: u64) -> Result<AudioClip> {
    let mut r = rng(seed);
    let fs = CANONICAL_RATE as f64;
    let secs = r.gen_range(0.6..1.4);
    let n = (secs * fs) as usize;
    let mut x = match subcategory {
        "dog" => {
            let f = r.gen_range(450.0..650.0);
            let mut h = harmonic(n, 8, |_| f);
            let nz = noise(n, &mut r);
            for (a, b) in h.iter_mut().zip(nz) {
                *a += 0.4 * b;
            }
            let starts = [0.0, secs * 0.45];
            envelope(&mut h, |t| bursts(t, &starts, 0.2, 0.06));
            h
        }
        "rain" => {
            let mut x = noise(n, &mut r);
            lowpass(&mut x, 0.35);
            for _ in 0..(secs * 40.0) as usize {
                let at = r.gen_range(0..n);
                x[at] += r.gen_range(-3.0..3.0);
            }
            x
        }
        "crying-baby" => {
            let f = r.gen_range(400.0..500.0);
            let mut h = harmonic(n, 6, |t| f * (1.0 + 0.04 * (2.0 * PI * 6.0 * t).sin()));
            envelope(&mut h, |t| (PI * t / secs).sin().max(0.0));
            h
        }
        "coughing" => {
            let mut x = noise(n, &mut r);
            lowpass(&mut x, 0.25);
            let starts = [0.0, secs * 0.5];
            envelope(&mut x, |t| bursts(t, &starts, 0.25, 0.08));
            x
        }
        "vacuum-cleaner" => {
            let mut x = noise(n, &mut r);
            lowpass(&mut x, 0.6);
            let hum = harmonic(n, 5, |_| 210.0);
            for (a, b) in x.iter_mut().zip(hum) {
                *a += 0.5 * b;
            }
            x
        }
        "siren" => {
            let period = r.gen_range(0.8..1.2);
            harmonic(n, 3, |t| 950.0 + 400.0 * (2.0 * PI * t / period).sin())
        }
        other => {
            let mut x = noise(n, &mut r);
            let colour = 0.1 + 0.8 * (derive_seed(0, &[other]) % 1000) as f64 / 1000.0;
            lowpass(&mut x, colour);
            x
        }
    };
    let peak = x.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        x.iter_mut().for_each(|s| *s *= 0.9 / peak);
    }
    AudioClip::new(x, CANONICAL_RATE, subcategory)
}

/// Writes `per_subcategory` exemplars for each subcategory as
/// `out/<category>/<subcategory>/<n>.wav`.
pub fn make_synthetic_noise_bank(
    out: &Path,
    subcategories: &[(NoiseCategory, &str)],
    per_subcategory: usize,
    seed: u64,
) -> Result<()> {
    for (cat, sub) in subcategories {
        let dir = out.join(cat.as_str()).join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for i in 0..per_subcategory {
            let clip = synth_noise(sub, derive_seed(seed, &["bank", sub, &i.to_string()]))?;
            write_wav(dir.join(format!("{i:02}.wav")), &clip, WavEncoding::Pcm16)?;
        }
    }
    Ok(())
}
