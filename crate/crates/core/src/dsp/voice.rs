use super::rhythm::parabolic_offset;
use super::PitchTrack;
use crate::audio::AudioClip;

/// A glottal pulse located in a voiced stretch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Sub-sample position.
    pub position: f64,
    pub amplitude: f64,
    /// Voiced run the pulse belongs to; periods never span two runs.
    pub run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoiceQuality {
    pub jitter_local: f64,
    pub shimmer_local: f64,
    pub hnr_db: f64,
    /// Per period pair `|T_i - T_{i+1}| / mean(T)`; its mean is `jitter_local`.
    pub jitter_series: Vec<f64>,
    /// Per amplitude pair `|A_i - A_{i+1}| / mean(A)`.
    pub shimmer_series: Vec<f64>,
    /// HNR of every frame that entered the average.
    pub hnr_series: Vec<f64>,
    pub pulses: Vec<Pulse>,
    /// Too little voicing for jitter and shimmer; both are then 0.
    pub unvoiced: bool,
}

const R_CLAMP: f64 = 1e-6;

fn hnr_of(r: f64) -> f64 {
    let r = r.clamp(R_CLAMP, 1.0 - R_CLAMP);
    10.0 * (r / (1.0 - r)).log10()
}

/// Cycle-level jitter and shimmer plus autocorrelation HNR.
///
/// HNR averages voiced frames; without any voiced frame it falls back to all
/// non-silent frames, and to 0 for pure silence.
pub fn voice_quality(clip: &AudioClip, track: &PitchTrack) -> VoiceQuality {
    let voiced: Vec<f64> = track
        .frames
        .iter()
        .filter(|f| f.f0.is_some())
        .map(|f| hnr_of(f.correlation))
        .collect();
    let hnr_series = if voiced.is_empty() {
        track
            .frames
            .iter()
            .filter(|f| !f.silent)
            .map(|f| hnr_of(f.correlation))
            .collect()
    } else {
        voiced.clone()
    };
    let hnr_db = mean(&hnr_series).unwrap_or(0.0);

    let pulses = if voiced.len() >= 2 {
        mark_pulses(clip, track)
    } else {
        Vec::new()
    };
    let mut periods = Vec::new();
    let mut amps = Vec::new();
    for w in pulses.windows(2) {
        if w[0].run == w[1].run {
            periods.push((w[1].position - w[0].position, w[0].run));
        }
    }
    // amplitudes of pulses that take part in at least one period
    for w in pulses.windows(2) {
        if w[0].run == w[1].run {
            amps.push((w[0].amplitude, w[1].amplitude));
        }
    }
    let period_pairs: Vec<(f64, f64)> = periods
        .windows(2)
        .filter(|w| w[0].1 == w[1].1)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    if period_pairs.is_empty() || amps.is_empty() {
        return VoiceQuality {
            jitter_local: 0.0,
            shimmer_local: 0.0,
            hnr_db,
            jitter_series: Vec::new(),
            shimmer_series: Vec::new(),
            hnr_series,
            pulses,
            unvoiced: true,
        };
    }
    let mean_period = mean(&periods.iter().map(|p| p.0).collect::<Vec<_>>()).unwrap();
    let jitter_series: Vec<f64> = period_pairs.iter().map(|(a, b)| (a - b).abs() / mean_period).collect();
    let mean_amp = mean(&pulses.iter().map(|p| p.amplitude).collect::<Vec<_>>()).unwrap();
    let shimmer_series: Vec<f64> = if mean_amp > 0.0 {
        amps.iter().map(|(a, b)| (a - b).abs() / mean_amp).collect()
    } else {
        vec![0.0; amps.len()]
    };
    VoiceQuality {
        jitter_local: mean(&jitter_series).unwrap(),
        shimmer_local: mean(&shimmer_series).unwrap(),
        hnr_db,
        jitter_series,
        shimmer_series,
        hnr_series,
        pulses,
        unvoiced: false,
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Voiced runs as sample ranges.
fn voiced_runs(track: &PitchTrack, len: usize) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, f) in track.frames.iter().enumerate() {
        match (f.f0.is_some(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, track.frames.len() - 1));
    }
    runs.into_iter()
        .map(|(a, b)| {
            let lo = a * track.framing.hop;
            let hi = (b * track.framing.hop + track.framing.frame_length).min(len);
            (lo, hi)
        })
        .collect()
}

fn mark_pulses(clip: &AudioClip, track: &PitchTrack) -> Vec<Pulse> {
    let x = clip.samples();
    let rate = track.rate as f64;
    let period_at = |pos: usize| {
        let f = &track.frames[track.frame_at(pos)];
        // unvoiced frames inside a run cannot happen, but fall back to the run start
        rate / f.f0.unwrap_or(rate / 100.0)
    };
    let argmax = |lo: usize, hi: usize, pol: f64| {
        (lo..hi).max_by(|&a, &b| (pol * x[a]).total_cmp(&(pol * x[b])).then(b.cmp(&a)))
    };
    let mut pulses = Vec::new();
    for (run, (lo, hi)) in voiced_runs(track, x.len()).into_iter().enumerate() {
        let first_end = (lo + period_at(lo).ceil() as usize).min(hi);
        let Some(first) = (lo..first_end).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(b.cmp(&a))) else {
            continue;
        };
        let pol = if x[first] < 0.0 { -1.0 } else { 1.0 };
        let mut p = first;
        loop {
            let refined = refine(x, p, pol);
            pulses.push(Pulse {
                position: refined.0,
                amplitude: refined.1,
                run,
            });
            let t = period_at(p);
            let a = p + (0.8 * t).ceil() as usize;
            let b = p + (1.2 * t).floor() as usize + 1;
            if b > hi {
                break;
            }
            match argmax(a, b, pol) {
                Some(next) => p = next,
                None => break,
            }
        }
    }
    pulses
}

fn refine(x: &[f64], p: usize, pol: f64) -> (f64, f64) {
    if p == 0 || p + 1 >= x.len() {
        return (p as f64, pol * x[p]);
    }
    let (l, c, r) = (pol * x[p - 1], pol * x[p], pol * x[p + 1]);
    let d = parabolic_offset(l, c, r);
    let amp = c - 0.25 * (l - r) * d;
    (p as f64 + d, amp)
}
