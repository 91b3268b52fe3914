use std::sync::OnceLock;

use super::convfeat::{check_duration, named};
use super::functionals as fx;
use super::{CatalogEntry, CatalogManifest, FeatureSetId, FeatureVector};
use crate::audio::AudioClip;
use crate::dsp::{
    floored_db, lpc_formants, mfcc_from_spectra, pitch_track, stft, voice_quality, zcr_rms, FormantConfig, FrameSeries,
    Framing, MfccConfig, PitchConfig, Window,
};
use crate::error::Result;

const REVISION: u32 = 1;
const CONTOUR_FUNCTIONALS: [&str; 10] = [
    "amean",
    "stddevNorm",
    "percentile20.0",
    "percentile50.0",
    "percentile80.0",
    "pctlrange0-2",
    "meanRisingSlope",
    "stddevRisingSlope",
    "meanFallingSlope",
    "stddevFallingSlope",
];
const SEMITONE_REF_HZ: f64 = 27.5;

struct Builder(Vec<CatalogEntry>);

impl Builder {
    fn push(&mut self, name: String, primitive: &str, functional: &str) {
        self.0.push(CatalogEntry {
            name,
            primitive: primitive.into(),
            functional: functional.into(),
        });
    }

    fn mean_cv(&mut self, lld: &str, primitive: &str) {
        for f in ["amean", "stddevNorm"] {
            self.push(format!("{lld}_{f}"), primitive, f);
        }
    }
}

/// Names beginning with `approx.` have no exact counterpart in the reference
/// parameter set definitions.
pub fn egemaps_manifest() -> &'static CatalogManifest {
    static M: OnceLock<CatalogManifest> = OnceLock::new();
    M.get_or_init(|| {
        let mut b = Builder(Vec::with_capacity(88));
        for f in CONTOUR_FUNCTIONALS {
            b.push(
                format!("F0semitoneFrom27.5Hz_sma3nz_{f}"),
                "f0 in semitones above 27.5 Hz, voiced",
                f,
            );
        }
        for f in CONTOUR_FUNCTIONALS {
            b.push(format!("approx.loudness_sma3_{f}"), "frame rms^0.6", f);
        }
        b.mean_cv("approx.spectralFlux_sma3", "normalized magnitude flux");
        for k in 1..=4 {
            b.mean_cv(&format!("mfcc{k}_sma3"), &format!("mfcc[{k}]"));
        }
        b.mean_cv("jitterLocal_sma3nz", "period-pair jitter");
        b.mean_cv("approx.shimmerLocal_sma3nz", "amplitude-pair shimmer (relative)");
        b.mean_cv("HNRdBACF_sma3nz", "autocorrelation hnr");
        b.mean_cv("approx.logRelF0-H1-H2_sma3nz", "h1 minus h2 in dB");
        b.mean_cv("approx.logRelF0-H1-A3_sma3nz", "h1 minus f3 amplitude in dB");
        for k in 1..=3 {
            b.mean_cv(&format!("F{k}frequency_sma3nz"), &format!("lpc formant {k} frequency"));
            b.mean_cv(
                &format!("approx.F{k}bandwidth_sma3nz"),
                &format!("lpc formant {k} bandwidth"),
            );
            b.mean_cv(
                &format!("approx.F{k}amplitudeLogRelF0_sma3nz"),
                &format!("formant {k} amplitude minus h1 in dB"),
            );
        }
        b.mean_cv("approx.alphaRatioV_sma3nz", "alpha ratio, voiced");
        b.mean_cv("approx.hammarbergIndexV_sma3nz", "hammarberg index, voiced");
        b.mean_cv("approx.slopeV0-500_sma3nz", "spectral slope 0-500 Hz, voiced");
        b.mean_cv("approx.slopeV500-1500_sma3nz", "spectral slope 500-1500 Hz, voiced");
        b.mean_cv("approx.spectralFluxV_sma3nz", "normalized magnitude flux, voiced");
        for k in 1..=4 {
            b.mean_cv(&format!("mfcc{k}V_sma3nz"), &format!("mfcc[{k}], voiced"));
        }
        for (lld, prim) in [
            ("approx.alphaRatioUV_sma3nz", "alpha ratio, unvoiced"),
            ("approx.hammarbergIndexUV_sma3nz", "hammarberg index, unvoiced"),
            ("approx.slopeUV0-500_sma3nz", "spectral slope 0-500 Hz, unvoiced"),
            ("approx.slopeUV500-1500_sma3nz", "spectral slope 500-1500 Hz, unvoiced"),
            ("approx.spectralFluxUV_sma3nz", "normalized magnitude flux, unvoiced"),
        ] {
            b.push(format!("{lld}_amean"), prim, "amean");
        }
        b.push(
            "approx.loudnessPeaksPerSec".into(),
            "loudness local maxima",
            "count per second",
        );
        b.push("VoicedSegmentsPerSec".into(), "voiced runs", "count per second");
        b.push("MeanVoicedSegmentLengthSec".into(), "voiced runs", "mean length");
        b.push("StddevVoicedSegmentLengthSec".into(), "voiced runs", "std length");
        b.push("MeanUnvoicedSegmentLength".into(), "unvoiced runs", "mean length");
        b.push("StddevUnvoicedSegmentLength".into(), "unvoiced runs", "std length");
        b.push("approx.equivalentSoundLevel_dBp".into(), "mean frame power", "dB");
        CatalogManifest::new(FeatureSetId::Egemaps, REVISION, b.0).expect("egemaps catalog is well formed")
    })
}

/// Semitones above 27.5 Hz.
pub fn hz_to_semitone(hz: f64) -> f64 {
    12.0 * (hz / SEMITONE_REF_HZ).log2()
}

pub fn semitone_to_hz(st: f64) -> f64 {
    SEMITONE_REF_HZ * 2f64.powf(st / 12.0)
}

fn contour(out: &mut Vec<f64>, segments: &[Vec<f64>], frame_rate: f64) {
    let all: Vec<f64> = segments.concat();
    let (rising, falling) = fx::slopes(segments, frame_rate);
    let p20 = fx::percentile(&all, 20.0);
    let p80 = fx::percentile(&all, 80.0);
    out.extend([
        fx::mean(&all),
        fx::stddev_norm(&all),
        p20,
        fx::percentile(&all, 50.0),
        p80,
        p80 - p20,
        fx::mean(&rising),
        fx::std(&rising),
        fx::mean(&falling),
        fx::std(&falling),
    ]);
}

fn mean_cv(out: &mut Vec<f64>, x: &[f64]) {
    out.extend([fx::mean(x), fx::stddev_norm(x)]);
}

/// Three-frame moving average; the ends average what is available.
fn sma3(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Maximal runs of equal voicing as `(voiced, first, last_exclusive)`.
fn runs(voiced: &[bool]) -> Vec<(bool, usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=voiced.len() {
        if i == voiced.len() || voiced[i] != voiced[start] {
            if i > start {
                out.push((voiced[start], start, i));
            }
            start = i;
        }
    }
    out
}

struct BandBins {
    bin_hz: f64,
    bins: usize,
}

impl BandBins {
    fn range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = (lo / self.bin_hz).ceil() as usize;
        let b = ((hi / self.bin_hz).floor() as usize + 1).min(self.bins);
        a.min(b)..b
    }

    fn nearest(&self, hz: f64) -> usize {
        ((hz / self.bin_hz).round() as usize).min(self.bins - 1)
    }
}

/// Spectral balance descriptors of one magnitude frame.
struct Balance {
    alpha: f64,
    hammarberg: f64,
    slope_lo: f64,
    slope_hi: f64,
}

fn balance(m: &[f64], bands: &BandBins) -> Balance {
    let energy = |r: std::ops::Range<usize>| m[r].iter().map(|v| v * v).sum::<f64>();
    let peak_db = |r: std::ops::Range<usize>| floored_db(m[r].iter().map(|v| v * v).fold(0.0, f64::max));
    let slope = |r: std::ops::Range<usize>| {
        let pts: Vec<(f64, f64)> = r.map(|k| (k as f64 * bands.bin_hz, floored_db(m[k] * m[k]))).collect();
        if pts.len() < 2 {
            return 0.0;
        }
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    Balance {
        alpha: floored_db(energy(bands.range(50.0, 1000.0))) - floored_db(energy(bands.range(1000.0, 5000.0))),
        hammarberg: peak_db(bands.range(0.0, 2000.0)) - peak_db(bands.range(2000.0, 5000.0)),
        slope_lo: slope(bands.range(0.0, 500.0)),
        slope_hi: slope(bands.range(500.0, 1500.0)),
    }
}

fn flux(spectra: &FrameSeries) -> Vec<f64> {
    let mut prev: Option<Vec<f64>> = None;
    spectra
        .frames()
        .map(|m| {
            let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cur: Vec<f64> = if norm > 0.0 {
                m.iter().map(|v| v / norm).collect()
            } else {
                vec![0.0; m.len()]
            };
            let f = prev
                .as_ref()
                .map(|p| p.iter().zip(&cur).map(|(a, b)| (a - b).powi(2)).sum())
                .unwrap_or(0.0);
            prev = Some(cur);
            f
        })
        .collect()
}

fn harmonic_db(m: &[f64], bands: &BandBins, hz: f64) -> f64 {
    let r = bands.range(0.8 * hz, 1.2 * hz);
    let r = if r.is_empty() {
        bands.nearest(hz)..bands.nearest(hz) + 1
    } else {
        r
    };
    floored_db(m[r].iter().map(|v| v * v).fold(0.0, f64::max))
}

fn peak_db_near(m: &[f64], bands: &BandBins, hz: f64) -> f64 {
    let c = bands.nearest(hz);
    let r = c.saturating_sub(1)..(c + 2).min(bands.bins);
    floored_db(m[r].iter().map(|v| v * v).fold(0.0, f64::max))
}

/// The 88-value parameter set.
pub fn extract_egemaps(clip: &AudioClip) -> Result<FeatureVector> {
    check_duration(clip)?;
    let manifest = egemaps_manifest();
    let rate = clip.sample_rate();
    let framing = Framing::speech(rate);
    let spectra = named(clip, stft(clip, framing, Window::Hann))?;
    let frame_rate = spectra.frame_rate();
    let n_frames = spectra.num_frames();
    let track = pitch_track(clip, &PitchConfig::default());
    let vq = voice_quality(clip, &track);
    let formants = lpc_formants(clip, &FormantConfig::speech(rate));
    let mfcc = mfcc_from_spectra(&spectra, &MfccConfig::default());
    let bands = BandBins {
        bin_hz: rate as f64 / framing.frame_length as f64,
        bins: spectra.width(),
    };

    let pitch_of = |i: usize| -> Option<f64> {
        if track.frames.is_empty() {
            return None;
        }
        track.frames[track.frame_at(i * framing.hop + framing.frame_length / 2)].f0
    };
    let voiced: Vec<bool> = (0..n_frames).map(|i| pitch_of(i).is_some()).collect();
    let silent: Vec<bool> = spectra.frames().map(|m| m.iter().all(|&v| v == 0.0)).collect();
    let mut flags = Vec::new();
    let mut v = Vec::with_capacity(88);

    // F0 contour in semitones, per voiced run of the pitch track
    let track_voiced: Vec<bool> = track.frames.iter().map(|f| f.f0.is_some()).collect();
    let f0_segments: Vec<Vec<f64>> = runs(&track_voiced)
        .into_iter()
        .filter(|r| r.0)
        .map(|(_, a, b)| {
            sma3(
                &track.frames[a..b]
                    .iter()
                    .map(|f| hz_to_semitone(f.f0.unwrap()))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    contour(&mut v, &f0_segments, frame_rate);

    let zr = zcr_rms(clip, framing);
    let loudness = sma3(&zr.rms.iter().map(|r| r.powf(0.6)).collect::<Vec<_>>());
    contour(&mut v, std::slice::from_ref(&loudness), frame_rate);

    let flux = sma3(&flux(&spectra));
    mean_cv(&mut v, &flux);
    let mfcc_cols: Vec<Vec<f64>> = (1..=4).map(|k| sma3(&mfcc.column(k))).collect();
    for c in &mfcc_cols {
        mean_cv(&mut v, c);
    }

    if vq.unvoiced {
        flags.push("unvoiced".to_string());
    }
    mean_cv(&mut v, &vq.jitter_series);
    mean_cv(&mut v, &vq.shimmer_series);
    mean_cv(&mut v, &vq.hnr_series);

    let mut h1_h2 = Vec::new();
    let mut h1_a3 = Vec::new();
    let mut freq = vec![Vec::new(); 3];
    let mut bw = vec![Vec::new(); 3];
    let mut amp = vec![Vec::new(); 3];
    let mut bal_v = Vec::new();
    let mut bal_uv = Vec::new();
    let mut flux_v = Vec::new();
    let mut flux_uv = Vec::new();
    let mut mfcc_v = vec![Vec::new(); 4];
    for i in 0..n_frames {
        if silent[i] {
            continue;
        }
        let m = spectra.frame(i);
        let Some(f0) = pitch_of(i) else {
            bal_uv.push(balance(m, &bands));
            flux_uv.push(flux[i]);
            continue;
        };
        bal_v.push(balance(m, &bands));
        flux_v.push(flux[i]);
        for (k, c) in mfcc_cols.iter().enumerate() {
            mfcc_v[k].push(c[i]);
        }
        let h1 = harmonic_db(m, &bands, f0);
        if 2.0 * f0 < rate as f64 / 2.0 {
            h1_h2.push(h1 - harmonic_db(m, &bands, 2.0 * f0));
        }
        if let Some(fr) = formants.get(i) {
            for (k, f) in fr.formants.iter().enumerate().take(3) {
                freq[k].push(f.frequency);
                bw[k].push(f.bandwidth);
                let a = peak_db_near(m, &bands, f.frequency);
                amp[k].push(a - h1);
                if k == 2 {
                    h1_a3.push(h1 - a);
                }
            }
        }
    }
    mean_cv(&mut v, &h1_h2);
    mean_cv(&mut v, &h1_a3);
    if freq[0].is_empty() {
        flags.push("no-formants".to_string());
    }
    for k in 0..3 {
        mean_cv(&mut v, &freq[k]);
        mean_cv(&mut v, &bw[k]);
        mean_cv(&mut v, &amp[k]);
    }
    let pick = |b: &[Balance], f: fn(&Balance) -> f64| b.iter().map(f).collect::<Vec<f64>>();
    let getters: [fn(&Balance) -> f64; 4] = [|b| b.alpha, |b| b.hammarberg, |b| b.slope_lo, |b| b.slope_hi];
    for g in getters {
        mean_cv(&mut v, &pick(&bal_v, g));
    }
    mean_cv(&mut v, &flux_v);
    for c in &mfcc_v {
        mean_cv(&mut v, c);
    }
    for g in getters {
        v.push(fx::mean(&pick(&bal_uv, g)));
    }
    v.push(fx::mean(&flux_uv));

    let duration = clip.duration_secs();
    let peaks = (1..loudness.len().saturating_sub(1))
        .filter(|&i| loudness[i] > loudness[i - 1] && loudness[i] >= loudness[i + 1])
        .count();
    v.push(peaks as f64 / duration);

    let hop_secs = track.framing.hop as f64 / rate as f64;
    let segs = runs(&track_voiced);
    let lens = |want: bool| {
        segs.iter()
            .filter(|r| r.0 == want)
            .map(|r| (r.2 - r.1) as f64 * hop_secs)
            .collect::<Vec<f64>>()
    };
    let (vl, ul) = (lens(true), lens(false));
    v.push(vl.len() as f64 / duration);
    v.extend([fx::mean(&vl), fx::std(&vl), fx::mean(&ul), fx::std(&ul)]);
    let power = zr.rms.iter().map(|r| r * r).collect::<Vec<_>>();
    v.push(floored_db(fx::mean(&power)));

    if voiced.iter().all(|x| !x) && !flags.iter().any(|f| f == "unvoiced") {
        flags.push("unvoiced".to_string());
    }
    let fv = FeatureVector {
        set_id: FeatureSetId::Egemaps,
        names: manifest.names(),
        values: v,
        catalog_version: manifest.version(),
        flags,
    };
    named(clip, fv.validate())?;
    Ok(fv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_signal, Resonance, SignalKind, SignalSpec, VoiceParams};

    fn synth(kind: SignalKind, secs: f64) -> AudioClip {
        synth_signal(&SignalSpec::new(kind, secs, 16_000), 21).unwrap()
    }

    #[test]
    fn catalog_has_88_entries() {
        let m = egemaps_manifest();
        assert_eq!(m.entries.len(), 88);
        assert_eq!(m.entries[0].name, "F0semitoneFrom27.5Hz_sma3nz_amean");
        assert_eq!(m.entries[87].name, "approx.equivalentSoundLevel_dBp");
    }

    #[test]
    fn tone_f0_maps_back_to_hz() {
        let v = extract_egemaps(&synth(
            SignalKind::Sine {
                frequency: 220.0,
                amplitude: 0.5,
            },
            1.5,
        ))
        .unwrap();
        let hz = semitone_to_hz(v.get("F0semitoneFrom27.5Hz_sma3nz_amean").unwrap());
        assert!((hz - 220.0).abs() <= 1.0, "{hz}");
        assert!(v.get("VoicedSegmentsPerSec").unwrap() > 0.0);
    }

    #[test]
    fn noise_is_unvoiced() {
        let v = extract_egemaps(&synth(SignalKind::WhiteNoise { amplitude: 0.5 }, 2.0)).unwrap();
        assert_eq!(v.get("VoicedSegmentsPerSec").unwrap(), 0.0);
        assert_eq!(v.get("jitterLocal_sma3nz_amean").unwrap(), 0.0);
        assert_eq!(v.get("approx.shimmerLocal_sma3nz_amean").unwrap(), 0.0);
        assert!(v.has_flag("unvoiced"));
    }

    #[test]
    fn voice_vector_is_finite_and_deterministic() {
        let mut p = VoiceParams::steady(
            130.0,
            vec![
                Resonance {
                    frequency: 650.0,
                    bandwidth: 80.0,
                },
                Resonance {
                    frequency: 1100.0,
                    bandwidth: 90.0,
                },
                Resonance {
                    frequency: 2500.0,
                    bandwidth: 120.0,
                },
            ],
        );
        p.jitter = 0.01;
        p.shimmer = 0.05;
        p.syllable_rate = 3.0;
        p.noise_floor = 0.001;
        let c = synth(SignalKind::FormantVoice(p), 2.5);
        let a = extract_egemaps(&c).unwrap();
        a.validate().unwrap();
        assert_eq!(a, extract_egemaps(&c).unwrap());
        let j = a.get("jitterLocal_sma3nz_amean").unwrap();
        assert!(j > 0.0 && j < 0.1, "jitter {j}");
        let f1 = a.get("F1frequency_sma3nz_amean").unwrap();
        assert!(f1 > 400.0 && f1 < 900.0, "F1 {f1}");
    }

    #[test]
    fn silence_is_finite() {
        let c = AudioClip::new(vec![0.0; 20_000], 16_000, "z").unwrap();
        let v = extract_egemaps(&c).unwrap();
        assert!(v.has_flag("unvoiced"));
    }

    #[test]
    fn run_splitting() {
        assert_eq!(
            runs(&[true, true, false, true]),
            vec![(true, 0, 2), (false, 2, 3), (true, 3, 4)]
        );
        assert!(runs(&[]).is_empty());
    }
}
