use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{Framing, Window};
use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Biased autocorrelation `r[0..=max_lag]`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| {
            if lag >= x.len() {
                0.0
            } else {
                x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Linear predictor `x[t] ≈ Σ coeffs[k-1] · x[t-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lpc {
    pub coeffs: Vec<f64>,
    pub reflection: Vec<f64>,
    /// Final prediction error power.
    pub error: f64,
}

/// Levinson-Durbin recursion on autocorrelation values `r[0..=order]`.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<Lpc> {
    if r.len() <= order {
        return Err(Error::Parameter(format!(
            "order {order} needs {} autocorrelation values, got {}",
            order + 1,
            r.len()
        )));
    }
    if !(r[0] > 0.0) {
        return Err(Error::ZeroPower("autocorrelation at lag 0 is not positive".into()));
    }
    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut reflection = Vec::with_capacity(order);
    let mut err = r[0];
    for i in 0..order {
        let acc = r[i + 1] - (0..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = acc / err;
        prev[..i].copy_from_slice(&a[..i]);
        a[i] = k;
        for j in 0..i {
            a[j] = prev[j] - k * prev[i - 1 - j];
        }
        err *= 1.0 - k * k;
        reflection.push(k);
        if !(err > 0.0) {
            // perfectly predictable; remaining coefficients stay 0
            err = 0.0;
            break;
        }
    }
    Ok(Lpc {
        coeffs: a,
        reflection,
        error: err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formant {
    pub frequency: f64,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormantConfig {
    pub order: usize,
    pub max_bandwidth: f64,
    pub min_frequency: f64,
    pub pre_emphasis: f64,
    pub framing: Framing,
    pub max_formants: usize,
}

impl FormantConfig {
    pub fn speech(rate: u32) -> Self {
        Self {
            order: 12,
            max_bandwidth: 400.0,
            min_frequency: 90.0,
            pre_emphasis: 0.97,
            framing: Framing::speech(rate),
            max_formants: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormantFrame {
    /// Frame centre in seconds.
    pub time: f64,
    /// Ascending by frequency, at most `max_formants`.
    pub formants: Vec<Formant>,
    /// Predictor had a root on or outside the unit circle; `formants` is empty.
    pub unstable: bool,
    /// Frame holds no energy; `formants` is empty.
    pub silent: bool,
}

/// Autocorrelation-method LPC formants for every frame.
pub fn lpc_formants(clip: &AudioClip, config: &FormantConfig) -> Vec<FormantFrame> {
    let rate = clip.sample_rate() as f64;
    let n = config.framing.frame_length;
    let window = Window::Hamming.coefficients(n);
    let x = clip.samples();
    let mut emphasized = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &s in x {
        emphasized.push(s - config.pre_emphasis * prev);
        prev = s;
    }
    let mut frame = vec![0.0; n];
    (0..config.framing.count(x.len()))
        .map(|f| {
            let start = f * config.framing.hop;
            for (i, v) in frame.iter_mut().enumerate() {
                *v = emphasized[start + i] * window[i];
            }
            let time = (start as f64 + n as f64 / 2.0) / rate;
            let r = autocorrelation(&frame, config.order);
            let lpc = match levinson_durbin(&r, config.order) {
                Ok(l) => l,
                Err(_) => {
                    return FormantFrame {
                        time,
                        formants: Vec::new(),
                        unstable: false,
                        silent: true,
                    }
                }
            };
            match formants_of(&lpc.coeffs, rate, config) {
                Some(formants) => FormantFrame {
                    time,
                    formants,
                    unstable: false,
                    silent: false,
                },
                None => FormantFrame {
                    time,
                    formants: Vec::new(),
                    unstable: true,
                    silent: false,
                },
            }
        })
        .collect()
}

/// Formants from predictor roots, or `None` if the predictor is unstable.
fn formants_of(coeffs: &[f64], rate: f64, config: &FormantConfig) -> Option<Vec<Formant>> {
    let p = coeffs.len();
    if p == 0 {
        return Some(Vec::new());
    }
    // companion matrix of z^p - a1 z^(p-1) - ... - ap
    let mut m = DMatrix::<f64>::zeros(p, p);
    for (j, a) in coeffs.iter().enumerate() {
        m[(0, j)] = *a;
    }
    for i in 1..p {
        m[(i, i - 1)] = 1.0;
    }
    let roots = m.complex_eigenvalues();
    if roots.iter().any(|z| !(z.norm() < 1.0)) {
        return None;
    }
    let nyquist = rate / 2.0;
    let mut out: Vec<Formant> = roots
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| Formant {
            frequency: z.arg() * rate / (2.0 * PI),
            bandwidth: -z.norm().ln() * rate / PI,
        })
        .filter(|f| {
            f.frequency > config.min_frequency
                && f.frequency < nyquist - config.min_frequency
                && f.bandwidth < config.max_bandwidth
        })
        .collect();
    out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    out.truncate(config.max_formants);
    Some(out)
}
