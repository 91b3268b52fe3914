use super::{floored_ln, FrameSeries, LOG_FLOOR};

/// Band edges in Hz for spectral contrast; the last band runs to Nyquist.
pub const CONTRAST_BANDS: [f64; 6] = [0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0];

const ROLLOFF: f64 = 0.85;
const CONTRAST_QUANTILE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub centroid: f64,
    pub bandwidth: f64,
    pub rolloff85: f64,
    pub flatness: f64,
    pub contrast: [f64; 6],
    /// Set when the frame carries no energy; all descriptors are then 0.
    pub zero_energy: bool,
}

impl SpectralFrame {
    fn silent() -> Self {
        Self {
            centroid: 0.0,
            bandwidth: 0.0,
            rolloff85: 0.0,
            flatness: 0.0,
            contrast: [0.0; 6],
            zero_energy: true,
        }
    }
}

/// Per-frame shape descriptors of magnitude spectra.
pub fn spectral_descriptors(spectra: &FrameSeries) -> Vec<SpectralFrame> {
    let bins = spectra.width();
    let bin_hz = spectra.rate as f64 / spectra.frame_length as f64;
    let freqs: Vec<f64> = (0..bins).map(|k| k as f64 * bin_hz).collect();
    let band_bins = contrast_band_bins(&freqs, spectra.rate as f64 / 2.0);
    spectra.frames().map(|m| describe(m, &freqs, &band_bins)).collect()
}

fn contrast_band_bins(freqs: &[f64], nyquist: f64) -> Vec<(usize, usize)> {
    (0..CONTRAST_BANDS.len())
        .map(|b| {
            let lo = CONTRAST_BANDS[b];
            let hi = CONTRAST_BANDS.get(b + 1).copied().unwrap_or(nyquist + 1.0);
            let start = freqs.iter().position(|&f| f >= lo).unwrap_or(freqs.len());
            let end = freqs.iter().position(|&f| f >= hi).unwrap_or(freqs.len());
            (start, end.max(start))
        })
        .collect()
}

fn describe(m: &[f64], freqs: &[f64], band_bins: &[(usize, usize)]) -> SpectralFrame {
    let total: f64 = m.iter().sum();
    if total <= 0.0 {
        return SpectralFrame::silent();
    }
    let centroid = m.iter().zip(freqs).map(|(a, f)| a * f).sum::<f64>() / total;
    let bandwidth = (m
        .iter()
        .zip(freqs)
        .map(|(a, f)| a * (f - centroid).powi(2))
        .sum::<f64>()
        / total)
        .sqrt();

    let target = ROLLOFF * total;
    let mut acc = 0.0;
    let mut rolloff85 = freqs[freqs.len() - 1];
    for (a, f) in m.iter().zip(freqs) {
        acc += a;
        if acc >= target {
            rolloff85 = *f;
            break;
        }
    }

    // Normalizing by the arithmetic mean first keeps the floor scale-free.
    let mean = total / m.len() as f64;
    let log_ratio = m.iter().map(|a| (a / mean).max(LOG_FLOOR).ln()).sum::<f64>() / m.len() as f64;
    let flatness = log_ratio.exp().min(1.0);

    let mut contrast = [0.0; 6];
    let mut sorted = Vec::new();
    for (c, &(start, end)) in contrast.iter_mut().zip(band_bins) {
        if end <= start {
            continue;
        }
        sorted.clear();
        sorted.extend_from_slice(&m[start..end]);
        sorted.sort_by(f64::total_cmp);
        let k = ((CONTRAST_QUANTILE * sorted.len() as f64).round() as usize).max(1);
        let valley = sorted[..k].iter().sum::<f64>() / k as f64;
        let peak = sorted[sorted.len() - k..].iter().sum::<f64>() / k as f64;
        *c = floored_ln(peak) - floored_ln(valley);
    }

    SpectralFrame {
        centroid,
        bandwidth,
        rolloff85,
        flatness,
        contrast,
        zero_energy: false,
    }
}
