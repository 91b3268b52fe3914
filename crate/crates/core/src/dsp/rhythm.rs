use super::{log_mel_spectrogram, stft, FrameSeries, Framing, MelFilterbank, Window};
use crate::audio::AudioClip;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct OnsetParams {
    pub n_mels: usize,
    /// A peak must be the maximum within this many frames on either side.
    pub peak_radius: usize,
    /// Half-width in frames of the adaptive threshold window.
    pub threshold_radius: usize,
    /// Threshold = local mean + `k` local standard deviations.
    pub k: f64,
    /// Peaks below this fraction of the strongest frame are ignored.
    pub relative_floor: f64,
    /// Minimum number of frames between reported onsets.
    pub wait: usize,
    pub min_bpm: f64,
    pub max_bpm: f64,
    /// Clips shorter than this get an undefined tempo.
    pub min_tempo_secs: f64,
}

impl Default for OnsetParams {
    fn default() -> Self {
        Self {
            n_mels: 40,
            peak_radius: 3,
            threshold_radius: 10,
            k: 1.5,
            relative_floor: 0.3,
            wait: 3,
            min_bpm: 40.0,
            max_bpm: 200.0,
            min_tempo_secs: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnsetAnalysis {
    /// One value per frame.
    pub strength: FrameSeries,
    pub onset_times: Vec<f64>,
    /// 0 when `tempo_defined` is false.
    pub tempo_bpm: f64,
    pub tempo_defined: bool,
}

/// Spectral-flux onsets and autocorrelation tempo.
pub fn onsets_tempo(clip: &AudioClip, params: &OnsetParams) -> Result<OnsetAnalysis> {
    let spectra = stft(clip, Framing::speech(clip.sample_rate()), Window::Hann)?;
    Ok(onsets_from_spectra(&spectra, clip.duration_secs(), params))
}

/// Onset analysis from precomputed magnitude spectra.
pub fn onsets_from_spectra(spectra: &FrameSeries, duration_secs: f64, params: &OnsetParams) -> OnsetAnalysis {
    let bank = MelFilterbank::new(
        params.n_mels,
        spectra.frame_length,
        spectra.rate,
        0.0,
        spectra.rate as f64 / 2.0,
    );
    let log_mel = log_mel_spectrogram(spectra, &bank);
    let t = log_mel.num_frames();
    let mut strength = vec![0.0; t];
    for i in 1..t {
        let (prev, cur) = (log_mel.frame(i - 1), log_mel.frame(i));
        strength[i] = cur.iter().zip(prev).map(|(c, p)| (c - p).max(0.0)).sum::<f64>() / params.n_mels as f64;
    }
    let frame_rate = spectra.frame_rate();
    let onset_times = pick_peaks(&strength, params)
        .into_iter()
        .map(|i| i as f64 / frame_rate)
        .collect();
    let tempo = if duration_secs >= params.min_tempo_secs {
        estimate_tempo(&strength, frame_rate, params)
    } else {
        None
    };
    OnsetAnalysis {
        strength: spectra.with_values(strength, 1),
        onset_times,
        tempo_bpm: tempo.unwrap_or(0.0),
        tempo_defined: tempo.is_some(),
    }
}

fn pick_peaks(s: &[f64], p: &OnsetParams) -> Vec<usize> {
    let global = s.iter().cloned().fold(0.0, f64::max);
    if global <= 0.0 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    let mut last: Option<usize> = None;
    for i in 0..s.len() {
        let lo = i.saturating_sub(p.peak_radius);
        let hi = (i + p.peak_radius + 1).min(s.len());
        if s[lo..hi].iter().any(|&v| v > s[i]) || s[i] < p.relative_floor * global {
            continue;
        }
        let lo = i.saturating_sub(p.threshold_radius);
        let hi = (i + p.threshold_radius + 1).min(s.len());
        let w = &s[lo..hi];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let std = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
        if s[i] <= mean + p.k * std {
            continue;
        }
        if last.is_some_and(|l| i - l <= p.wait) {
            continue;
        }
        peaks.push(i);
        last = Some(i);
    }
    peaks
}

fn estimate_tempo(s: &[f64], frame_rate: f64, p: &OnsetParams) -> Option<f64> {
    let min_lag = (60.0 * frame_rate / p.max_bpm).floor().max(1.0) as usize;
    let max_lag = ((60.0 * frame_rate / p.min_bpm).ceil() as usize).min(s.len().saturating_sub(2));
    if max_lag <= min_lag {
        return None;
    }
    let acf = |lag: usize| s.iter().zip(&s[lag..]).map(|(a, b)| a * b).sum::<f64>();
    let values: Vec<f64> = (min_lag..=max_lag).map(acf).collect();
    let (best, &peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    if peak <= 0.0 {
        return None;
    }
    let lag = min_lag + best;
    let shift = if lag > 1 {
        parabolic_offset(acf(lag - 1), peak, acf(lag + 1))
    } else {
        0.0
    };
    let bpm = 60.0 * frame_rate / (lag as f64 + shift);
    Some(bpm.clamp(p.min_bpm, p.max_bpm))
}

/// Vertex offset in `[-0.5, 0.5]` of the parabola through three samples.
pub(crate) fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let denom = left - 2.0 * centre + right;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}
