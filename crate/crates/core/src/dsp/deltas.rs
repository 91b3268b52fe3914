use super::FrameSeries;
use crate::error::{Error, Result};

/// Regression deltas over `±width` frames.
///
/// Frames closer than `width` to either end take the delta of the nearest
/// frame with a complete window. Series too short for any complete window use
/// the least-squares slope over all frames.
pub fn deltas(series: &FrameSeries, width: usize) -> Result<FrameSeries> {
    let t = series.num_frames();
    if t < 2 {
        return Err(Error::TooShort(format!("deltas need at least 2 frames, got {t}")));
    }
    let d = series.width();
    let mut out = vec![0.0; t * d];
    if width >= 1 && t > 2 * width {
        let norm = 2.0 * (1..=width).map(|n| (n * n) as f64).sum::<f64>();
        for i in width..t - width {
            for j in 0..d {
                let mut acc = 0.0;
                for n in 1..=width {
                    acc += n as f64 * (series.frame(i + n)[j] - series.frame(i - n)[j]);
                }
                out[i * d + j] = acc / norm;
            }
        }
        for i in 0..width {
            out.copy_within(width * d..(width + 1) * d, i * d);
        }
        let last = t - width - 1;
        for i in t - width..t {
            out.copy_within(last * d..(last + 1) * d, i * d);
        }
    } else {
        let mean_t = (t - 1) as f64 / 2.0;
        let denom: f64 = (0..t).map(|i| (i as f64 - mean_t).powi(2)).sum();
        for j in 0..d {
            let slope = (0..t).map(|i| (i as f64 - mean_t) * series.frame(i)[j]).sum::<f64>() / denom;
            for i in 0..t {
                out[i * d + j] = slope;
            }
        }
    }
    Ok(series.with_values(out, d))
}
