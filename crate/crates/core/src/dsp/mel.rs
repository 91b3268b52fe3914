use std::f64::consts::PI;

use super::{floored_ln, stft, FrameSeries, Framing, Window};
use crate::audio::AudioClip;
use crate::error::Result;

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    n_mels: usize,
    n_bins: usize,
    weights: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, n_fft: usize, rate: u32, fmin: f64, fmax: f64) -> Self {
        let n_bins = n_fft / 2 + 1;
        let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let mut weights = vec![0.0; n_mels * n_bins];
        for m in 0..n_mels {
            let (left, centre, right) = (edges[m], edges[m + 1], edges[m + 2]);
            for k in 0..n_bins {
                let f = k as f64 * rate as f64 / n_fft as f64;
                let w = if f <= left || f >= right {
                    0.0
                } else if f <= centre {
                    (f - left) / (centre - left)
                } else {
                    (right - f) / (right - centre)
                };
                weights[m * n_bins + k] = w;
            }
        }
        Self {
            n_mels,
            n_bins,
            weights,
        }
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    /// Band energies of one power spectrum.
    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        debug_assert_eq!(power.len(), self.n_bins);
        self.weights
            .chunks_exact(self.n_bins)
            .map(|row| row.iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}

/// Orthonormal DCT-II, keeping the first `n_out` coefficients.
pub fn dct_ii_ortho(input: &[f64], n_out: usize) -> Vec<f64> {
    let n = input.len() as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            scale
                * input
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x * (PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * n)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Natural-log mel band energies per frame, computed from magnitude spectra.
pub fn log_mel_spectrogram(spectra: &FrameSeries, bank: &MelFilterbank) -> FrameSeries {
    let mut values = Vec::with_capacity(spectra.num_frames() * bank.n_mels());
    let mut power = vec![0.0; spectra.width()];
    for frame in spectra.frames() {
        for (p, m) in power.iter_mut().zip(frame) {
            *p = m * m;
        }
        values.extend(bank.apply(&power).into_iter().map(floored_ln));
    }
    spectra.with_values(values, bank.n_mels())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub n_coeffs: usize,
    pub n_mels: usize,
    pub fmin: f64,
    /// Upper band edge; `None` means Nyquist.
    pub fmax: Option<f64>,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            n_coeffs: 13,
            n_mels: 26,
            fmin: 0.0,
            fmax: None,
        }
    }
}

/// Cepstral coefficients `c0..c{n_coeffs-1}` per frame.
pub fn mfcc(clip: &AudioClip, config: &MfccConfig) -> Result<FrameSeries> {
    let framing = Framing::speech(clip.sample_rate());
    let spectra = stft(clip, framing, Window::Hann)?;
    Ok(mfcc_from_spectra(&spectra, config))
}

/// Cepstra from precomputed magnitude spectra.
pub fn mfcc_from_spectra(spectra: &FrameSeries, config: &MfccConfig) -> FrameSeries {
    let fmax = config.fmax.unwrap_or(spectra.rate as f64 / 2.0);
    let bank = MelFilterbank::new(config.n_mels, spectra.frame_length, spectra.rate, config.fmin, fmax);
    let log_mel = log_mel_spectrogram(spectra, &bank);
    let mut values = Vec::with_capacity(log_mel.num_frames() * config.n_coeffs);
    for frame in log_mel.frames() {
        values.extend(dct_ii_ortho(frame, config.n_coeffs));
    }
    spectra.with_values(values, config.n_coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_signal, SignalKind, SignalSpec};
    use crate::dsp::LOG_FLOOR;

    #[test]
    fn mel_scale_round_trips() {
        for hz in [0.0, 100.0, 1000.0, 7999.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
        assert!((hz_to_mel(1000.0) - 999.9855).abs() < 1e-3);
    }

    #[test]
    fn dct_is_orthonormal() {
        // energy preserved for a full-length transform
        let x = [0.3, -1.2, 2.5, 0.0, 0.7, -0.4];
        let c = dct_ii_ortho(&x, x.len());
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ec: f64 = c.iter().map(|v| v * v).sum();
        assert!((ex - ec).abs() < 1e-12);
    }

    #[test]
    fn silence_concentrates_in_c0() {
        let c = AudioClip::new(vec![0.0; 16_000], 16_000, "z").unwrap();
        let m = mfcc(&c, &MfccConfig::default()).unwrap();
        assert_eq!(m.width(), 13);
        let expected_c0 = (26f64).sqrt() * LOG_FLOOR.ln();
        for frame in m.frames() {
            assert!((frame[0] - expected_c0).abs() < 1e-9);
            assert!(frame[1..].iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn gain_moves_only_c0() {
        let spec = SignalSpec::new(SignalKind::WhiteNoise { amplitude: 0.8 }, 1.0, 16_000);
        let loud = synth_signal(&spec, 4).unwrap();
        let quiet = loud
            .with_samples(loud.samples().iter().map(|s| s * 0.5).collect())
            .unwrap();
        let a = mfcc(&loud, &MfccConfig::default()).unwrap();
        let b = mfcc(&quiet, &MfccConfig::default()).unwrap();
        let shift = (26f64).sqrt() * (0.25f64).ln();
        for (fa, fb) in a.frames().zip(b.frames()) {
            assert!((fb[0] - fa[0] - shift).abs() < 1e-6);
            for k in 1..13 {
                assert!((fa[k] - fb[k]).abs() < 1e-6);
            }
        }
        assert_eq!(a, mfcc(&loud, &MfccConfig::default()).unwrap());
    }
}
