//! Fixtures shared by the benchmarks.

use noiseprobe::audio::{synth_signal, AudioClip, Resonance, SignalKind, SignalSpec, VoiceParams};
use noiseprobe::experiment::synthetic;
use noiseprobe::models::LabeledMatrix;

/// A steady two-formant voice of `secs` seconds.
pub fn voice(secs: f64) -> AudioClip {
    let params = VoiceParams::steady(
        140.0,
        vec![
            Resonance {
                frequency: 700.0,
                bandwidth: 80.0,
            },
            Resonance {
                frequency: 1200.0,
                bandwidth: 90.0,
            },
        ],
    );
    synth_signal(&SignalSpec::new(SignalKind::FormantVoice(params), secs, 16_000), 1).expect("valid synth spec")
}

pub fn noise(subcategory: &str) -> AudioClip {
    synthetic::synth_noise(subcategory, 2).expect("known subcategory")
}

/// Two overlapping classes in `dim` dimensions, deterministic without an rng.
pub fn matrix(n: usize, dim: usize) -> LabeledMatrix {
    let rows = (0..n)
        .map(|i| {
            let shift = if i % 2 == 1 { 0.8 } else { -0.8 };
            (0..dim)
                .map(|k| shift + ((i * 31 + k * 17) as f64 * 0.37).sin())
                .collect()
        })
        .collect();
    let labels = (0..n).map(|i| (i % 2) as u8).collect();
    LabeledMatrix::new(rows, labels, (0..n).map(|i| format!("r{i:03}")).collect()).expect("consistent matrix")
}

/// Deterministic pseudo-samples for the rank tests.
pub fn sample(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|i| offset + ((i * 7919) as f64 * 0.618).fract()).collect()
}
