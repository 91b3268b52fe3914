use super::Framing;
use crate::audio::AudioClip;

/// Per-frame zero-crossing rate (crossings per sample) and RMS.
#[derive(Debug, Clone, PartialEq)]
pub struct ZcrRms {
    pub zcr: Vec<f64>,
    pub rms: Vec<f64>,
}

/// Clips shorter than one frame are analysed as a single frame.
pub fn zcr_rms(clip: &AudioClip, framing: Framing) -> ZcrRms {
    let x = clip.samples();
    let spans: Vec<&[f64]> = if x.len() < framing.frame_length {
        vec![x]
    } else {
        (0..framing.count(x.len()))
            .map(|f| &x[f * framing.hop..f * framing.hop + framing.frame_length])
            .collect()
    };
    let mut out = ZcrRms {
        zcr: Vec::with_capacity(spans.len()),
        rms: Vec::with_capacity(spans.len()),
    };
    for frame in spans {
        let crossings = frame.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count();
        out.zcr.push(crossings as f64 / frame.len() as f64);
        out.rms
            .push((frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64).sqrt());
    }
    out
}
