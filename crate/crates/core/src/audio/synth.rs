//! Deterministic synthetic signals for tests and the desk-scale corpus.

use std::f64::consts::PI;

use rand::Rng;

use super::AudioClip;
use crate::error::{Error, Result};
use crate::seeding;

/// A two-pole resonance (formant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub frequency: f64,
    pub bandwidth: f64,
}

/// A controllable fake speaker: glottal pulse train shaped by a spectral tilt
/// and a cascade of formant resonators.
#[derive(Debug, Clone, PartialEq)]
pub struct VoiceParams {
    pub f0: f64,
    pub formants: Vec<Resonance>,
    /// One-pole low-pass coefficient in `[0, 1)`; larger values give a darker voice.
    pub tilt: f64,
    /// Relative random perturbation of each glottal period.
    pub jitter: f64,
    /// Relative random perturbation of each glottal pulse amplitude.
    pub shimmer: f64,
    /// Aspiration noise added to the source, relative to the source RMS.
    pub breathiness: f64,
    /// Relative depth of a slow sinusoidal F0 drift.
    pub intonation: f64,
    /// Syllable-like amplitude envelope rate in Hz; zero disables it.
    pub syllable_rate: f64,
    /// Peak amplitude of the output.
    pub amplitude: f64,
    /// Uniform noise floor added after normalization.
    pub noise_floor: f64,
}

impl VoiceParams {
    /// Steady vowel without perturbations or envelope.
    pub fn steady(f0: f64, formants: Vec<Resonance>) -> Self {
        Self {
            f0,
            formants,
            tilt: 0.0,
            jitter: 0.0,
            shimmer: 0.0,
            breathiness: 0.0,
            intonation: 0.0,
            syllable_rate: 0.0,
            amplitude: 0.5,
            noise_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalKind {
    Sine {
        frequency: f64,
        amplitude: f64,
    },
    WhiteNoise {
        amplitude: f64,
    },
    /// Pulses of `pulse_width` samples (Hann shaped, 1 = impulse). Successive
    /// periods alternate between `(1 + p)` and `(1 - p)` times the nominal one.
    PulseTrain {
        f0: f64,
        amplitude: f64,
        pulse_width: usize,
        period_perturbation: f64,
    },
    FormantVoice(VoiceParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub duration_secs: f64,
    pub sample_rate: u32,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, duration_secs: f64, sample_rate: u32) -> Self {
        Self {
            kind,
            duration_secs,
            sample_rate,
        }
    }
}

fn check_frequency(name: &str, f: f64, rate: u32) -> Result<()> {
    let nyquist = rate as f64 / 2.0;
    if !(f > 0.0 && f < nyquist) {
        return Err(Error::Parameter(format!("{name} {f} Hz must lie in (0, {nyquist}) Hz")));
    }
    Ok(())
}

/// Generates the signal described by `spec`. Output is a function of
/// `(spec, seed)` only.
pub fn synth_signal(spec: &SignalSpec, seed: u64) -> Result<AudioClip> {
    if !(spec.duration_secs > 0.0) || spec.sample_rate == 0 {
        return Err(Error::Parameter("duration and sample rate must be positive".into()));
    }
    let rate = spec.sample_rate;
    let n = (spec.duration_secs * rate as f64).round().max(1.0) as usize;
    let mut rng = seeding::rng(seed);
    let samples = match &spec.kind {
        SignalKind::Sine { frequency, amplitude } => {
            check_frequency("frequency", *frequency, rate)?;
            (0..n)
                .map(|i| amplitude * (2.0 * PI * frequency * i as f64 / rate as f64).sin())
                .collect()
        }
        SignalKind::WhiteNoise { amplitude } => (0..n).map(|_| amplitude * rng.gen_range(-1.0..=1.0)).collect(),
        SignalKind::PulseTrain {
            f0,
            amplitude,
            pulse_width,
            period_perturbation,
        } => {
            check_frequency("f0", *f0, rate)?;
            pulse_train(n, rate, *f0, *amplitude, *pulse_width, *period_perturbation)
        }
        SignalKind::FormantVoice(params) => {
            check_frequency("f0", params.f0, rate)?;
            for r in &params.formants {
                check_frequency("formant", r.frequency, rate)?;
            }
            if !(0.0..1.0).contains(&params.tilt) {
                return Err(Error::Parameter("tilt must lie in [0, 1)".into()));
            }
            formant_voice(n, rate, params, &mut rng)
        }
    };
    AudioClip::new(samples, rate, "synth")
}

fn hann_pulse(width: usize) -> Vec<f64> {
    if width <= 1 {
        return vec![1.0];
    }
    (0..width)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * (i as f64 + 1.0) / (width as f64 + 1.0)).cos())
        .collect()
}

fn pulse_train(n: usize, rate: u32, f0: f64, amplitude: f64, width: usize, pert: f64) -> Vec<f64> {
    let shape = hann_pulse(width);
    let centre = shape.len() / 2;
    let nominal = rate as f64 / f0;
    let mut out = vec![0.0; n];
    let mut pos = centre as f64;
    let mut k = 0usize;
    while (pos.round() as usize) < n {
        let p = pos.round() as usize;
        for (j, &v) in shape.iter().enumerate() {
            if let Some(slot) = (p + j).checked_sub(centre).and_then(|i| out.get_mut(i)) {
                *slot += amplitude * v;
            }
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        pos += nominal * (1.0 + sign * pert);
        k += 1;
    }
    out
}

/// Two-pole resonator with unit gain at DC.
fn resonate(signal: &mut [f64], r: &Resonance, rate: u32) {
    let radius = (-PI * r.bandwidth / rate as f64).exp();
    let theta = 2.0 * PI * r.frequency / rate as f64;
    let a1 = 2.0 * radius * theta.cos();
    let a2 = -radius * radius;
    let gain = 1.0 - a1 - a2;
    let (mut y1, mut y2) = (0.0, 0.0);
    for s in signal.iter_mut() {
        let y = gain * *s + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *s = y;
    }
}

fn formant_voice(n: usize, rate: u32, p: &VoiceParams, rng: &mut impl Rng) -> Vec<f64> {
    let fs = rate as f64;
    let phase = rng.gen_range(0.0..2.0 * PI);
    let mut source = vec![0.0; n];
    let mut pos = 0.0f64;
    while (pos.round() as usize) < n {
        let t = pos / fs;
        let f0 = p.f0 * (1.0 + p.intonation * (2.0 * PI * 0.35 * t + phase).sin());
        let amp = 1.0 + p.shimmer * rng.gen_range(-1.0..=1.0) * 3f64.sqrt();
        source[pos.round() as usize] += amp;
        let period = fs / f0 * (1.0 + p.jitter * rng.gen_range(-1.0..=1.0) * 3f64.sqrt());
        pos += period.max(1.0);
    }
    if p.breathiness > 0.0 {
        let rms = (source.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
        for s in source.iter_mut() {
            *s += p.breathiness * rms * rng.gen_range(-1.0..=1.0);
        }
    }
    // spectral tilt
    let mut prev = 0.0;
    for s in source.iter_mut() {
        prev = (1.0 - p.tilt) * *s + p.tilt * prev;
        *s = prev;
    }
    for r in &p.formants {
        resonate(&mut source, r, rate);
    }
    if p.syllable_rate > 0.0 {
        let env_phase = rng.gen_range(0.0..PI);
        for (i, s) in source.iter_mut().enumerate() {
            let t = i as f64 / fs;
            let e = (PI * p.syllable_rate * t + env_phase).sin().max(0.0);
            *s *= e.sqrt();
        }
    }
    let peak = source.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        for s in source.iter_mut() {
            *s *= p.amplitude / peak;
        }
    }
    if p.noise_floor > 0.0 {
        for s in source.iter_mut() {
            *s += p.noise_floor * rng.gen_range(-1.0..=1.0);
        }
    }
    source
}
