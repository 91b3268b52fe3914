use rustfft::{num_complex::Complex, FftPlanner};

use super::rhythm::parabolic_offset;
use super::Framing;
use crate::audio::AudioClip;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchConfig {
    pub f0_min: f64,
    pub f0_max: f64,
    pub voicing_threshold: f64,
    pub hop_secs: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f0_min: 60.0,
            f0_max: 400.0,
            voicing_threshold: 0.45,
            hop_secs: 0.01,
        }
    }
}

impl PitchConfig {
    /// At least 25 ms and two periods of the lowest pitch.
    pub fn framing(&self, rate: u32) -> Framing {
        let two_periods = (2.0 * rate as f64 / self.f0_min).ceil() as usize;
        Framing {
            frame_length: Framing::speech(rate).frame_length.max(two_periods),
            hop: ((rate as f64 * self.hop_secs).round() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchFrame {
    /// `None` when unvoiced.
    pub f0: Option<f64>,
    /// Height of the selected normalized autocorrelation peak.
    pub correlation: f64,
    /// Frame holds no signal energy.
    pub silent: bool,
}

impl PitchFrame {
    pub fn confidence(&self) -> f64 {
        self.correlation.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack {
    pub frames: Vec<PitchFrame>,
    pub framing: Framing,
    pub rate: u32,
}

impl PitchTrack {
    pub fn voiced_fraction(&self) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        self.frames.iter().filter(|f| f.f0.is_some()).count() as f64 / self.frames.len() as f64
    }

    /// Sample index at the centre of frame `i`.
    pub fn frame_centre(&self, i: usize) -> usize {
        i * self.framing.hop + self.framing.frame_length / 2
    }

    /// Index of the frame whose centre is closest to sample `pos`.
    pub fn frame_at(&self, pos: usize) -> usize {
        let half = self.framing.frame_length / 2;
        let i = (pos.saturating_sub(half) as f64 / self.framing.hop as f64).round() as usize;
        i.min(self.frames.len().saturating_sub(1))
    }
}

/// Normalized cross-correlation pitch tracker.
///
/// For each frame `r(τ) = Σ x[i]x[i+τ] / sqrt(Σ x[i]² Σ x[i+τ]²)` over the
/// overlapping part. The first local maximum within 90% of the best one is
/// taken, which avoids locking onto multiples of the period.
pub fn pitch_track(clip: &AudioClip, config: &PitchConfig) -> PitchTrack {
    let rate = clip.sample_rate();
    let framing = config.framing(rate);
    let n = framing.frame_length;
    let min_lag = ((rate as f64 / config.f0_max).floor() as usize).max(2);
    let max_lag = ((rate as f64 / config.f0_min).ceil() as usize).min(n - 2);
    let fft_len = (n + max_lag + 2).next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(fft_len);
    let inverse = planner.plan_fft_inverse(fft_len);
    let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
    let mut prefix = vec![0.0; n + 1];
    let mut r = vec![0.0; max_lag + 2];

    let x = clip.samples();
    let frames = (0..framing.count(x.len()))
        .map(|f| {
            let frame = &x[f * framing.hop..f * framing.hop + n];
            for (i, s) in frame.iter().enumerate() {
                prefix[i + 1] = prefix[i] + s * s;
            }
            if prefix[n] <= 0.0 {
                return PitchFrame {
                    f0: None,
                    correlation: 0.0,
                    silent: true,
                };
            }
            for (i, slot) in buf.iter_mut().enumerate() {
                *slot = Complex::new(frame.get(i).copied().unwrap_or(0.0), 0.0);
            }
            forward.process(&mut buf);
            for c in buf.iter_mut() {
                *c = Complex::new(c.norm_sqr(), 0.0);
            }
            inverse.process(&mut buf);
            for lag in min_lag - 1..=max_lag + 1 {
                let e1 = prefix[n - lag];
                let e2 = prefix[n] - prefix[lag];
                let denom = (e1 * e2).sqrt();
                r[lag] = if denom > 0.0 {
                    (buf[lag].re / fft_len as f64 / denom).clamp(-1.0, 1.0)
                } else {
                    0.0
                };
            }
            pick(&r, min_lag, max_lag, rate, config)
        })
        .collect();
    PitchTrack { frames, framing, rate }
}

fn pick(r: &[f64], min_lag: usize, max_lag: usize, rate: u32, config: &PitchConfig) -> PitchFrame {
    let maxima: Vec<usize> = (min_lag..=max_lag)
        .filter(|&l| r[l] > r[l - 1] && r[l] >= r[l + 1])
        .collect();
    let Some(best) = maxima.iter().map(|&l| r[l]).reduce(f64::max) else {
        let correlation = r[min_lag..=max_lag].iter().cloned().fold(f64::MIN, f64::max);
        return PitchFrame {
            f0: None,
            correlation,
            silent: false,
        };
    };
    let lag = *maxima.iter().find(|&&l| r[l] >= 0.9 * best).unwrap_or(&maxima[0]);
    let correlation = r[lag];
    let f0 = (correlation > config.voicing_threshold).then(|| {
        let refined = lag as f64 + parabolic_offset(r[lag - 1], r[lag], r[lag + 1]);
        (rate as f64 / refined).clamp(config.f0_min, config.f0_max)
    });
    PitchFrame {
        f0,
        correlation,
        silent: false,
    }
}
