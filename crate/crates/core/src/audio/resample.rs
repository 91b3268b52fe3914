use std::f64::consts::PI;

use super::AudioClip;
use crate::error::{Error, Result};

/// Zero crossings of the sinc kernel kept on each side of the centre.
const ZERO_CROSSINGS: f64 = 16.0;
const KAISER_BETA: f64 = 8.6;

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Band-limited resampling with a Kaiser-windowed sinc kernel.
///
/// The cutoff sits at the lower of the two Nyquist frequencies. The output has
/// `round(len * target / source)` samples.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(Error::Parameter("target sample rate must be positive".into()));
    }
    let source_rate = clip.sample_rate();
    if source_rate == target_rate {
        return Ok(clip.clone());
    }
    let input = clip.samples();
    let ratio = target_rate as f64 / source_rate as f64;
    let out_len = ((input.len() as f64 * ratio).round() as usize).max(1);
    // cutoff in cycles per input sample, relative to a sampling rate of 1
    let scale = ratio.min(1.0);
    let half_width = ZERO_CROSSINGS / scale;
    let i0_beta = bessel_i0(KAISER_BETA);

    let mut out = Vec::with_capacity(out_len);
    for j in 0..out_len {
        let centre = j as f64 / ratio;
        let lo = ((centre - half_width).ceil().max(0.0)) as usize;
        let hi = ((centre + half_width).floor() as isize).min(input.len() as isize - 1);
        let mut acc = 0.0;
        if hi >= lo as isize {
            for (n, &x) in input.iter().enumerate().take(hi as usize + 1).skip(lo) {
                let offset = n as f64 - centre;
                let r = offset / half_width;
                let window = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
                acc += x * scale * sinc(scale * offset) * window;
            }
        }
        out.push(acc);
    }
    AudioClip::new(out, target_rate, clip.source_id().to_owned())
}
