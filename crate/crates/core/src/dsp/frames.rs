use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Framewise values: `num_frames` rows of `width` values each.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries {
    values: Vec<f64>,
    width: usize,
    pub frame_length: usize,
    pub hop: usize,
    pub rate: u32,
}

impl FrameSeries {
    pub fn new(values: Vec<f64>, width: usize, frame_length: usize, hop: usize, rate: u32) -> Self {
        assert!(width > 0 && values.len().is_multiple_of(width), "ragged frame series");
        Self {
            values,
            width,
            frame_length,
            hop,
            rate,
        }
    }

    pub fn num_frames(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.width)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.frames().map(|f| f[j]).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frame_rate(&self) -> f64 {
        self.rate as f64 / self.hop as f64
    }

    /// Same framing, new per-frame values.
    pub fn with_values(&self, values: Vec<f64>, width: usize) -> Self {
        Self::new(values, width, self.frame_length, self.hop, self.rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Framing {
    pub frame_length: usize,
    pub hop: usize,
}

impl Framing {
    /// 25 ms frames every 10 ms.
    pub fn speech(rate: u32) -> Self {
        Self {
            frame_length: (rate as usize * 25) / 1000,
            hop: (rate as usize * 10) / 1000,
        }
    }

    pub fn count(&self, len: usize) -> usize {
        if len < self.frame_length {
            0
        } else {
            1 + (len - self.frame_length) / self.hop
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Hamming,
}

impl Window {
    /// Periodic window coefficients.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let (a0, a1) = match self {
            Window::Hann => (0.5, 0.5),
            Window::Hamming => (0.54, 0.46),
        };
        (0..n)
            .map(|i| a0 - a1 * (2.0 * PI * i as f64 / n as f64).cos())
            .collect()
    }
}

/// Magnitude spectra of windowed frames, `frame_length / 2 + 1` bins each.
pub fn stft(clip: &AudioClip, framing: Framing, window: Window) -> Result<FrameSeries> {
    let n_fft = framing.frame_length;
    if n_fft == 0 || framing.hop == 0 {
        return Err(Error::Parameter("frame length and hop must be positive".into()));
    }
    if clip.len() < n_fft {
        return Err(Error::TooShort(format!(
            "clip {} has {} samples, one frame needs {n_fft}",
            clip.source_id(),
            clip.len()
        )));
    }
    let win = window.coefficients(n_fft);
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let n_frames = framing.count(clip.len());
    let bins = n_fft / 2 + 1;
    let mut values = Vec::with_capacity(n_frames * bins);
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let x = clip.samples();
    for f in 0..n_frames {
        let start = f * framing.hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(x[start + i] * win[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        values.extend(buf[..bins].iter().map(|c| c.norm()));
    }
    Ok(FrameSeries::new(values, bins, n_fft, framing.hop, clip.sample_rate()))
}
