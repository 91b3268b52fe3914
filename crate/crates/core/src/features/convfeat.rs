use std::sync::OnceLock;

use super::functionals as fx;
use super::{CatalogEntry, CatalogManifest, FeatureSetId, FeatureVector};
use crate::audio::AudioClip;
use crate::dsp::{deltas, spectral_descriptors, stft, zcr_rms, Framing, MfccConfig, OnsetParams, Window};
use crate::error::{Error, Result};

const REVISION: u32 = 1;
const N_MFCC: usize = 13;
const SIX_STATS: [&str; 6] = ["mean", "std", "median", "min", "max", "skew"];
const FRAME_DESCRIPTORS: [&str; 6] = ["centroid", "bandwidth", "rolloff85", "flatness", "zcr", "rms"];

/// Entries whose values do not depend on global gain.
pub const GAIN_INVARIANT_PREFIXES: [&str; 3] = ["centroid_", "zcr_", "flatness_"];

fn entry(name: String, primitive: &str, functional: &str) -> CatalogEntry {
    CatalogEntry {
        name,
        primitive: primitive.into(),
        functional: functional.into(),
    }
}

pub fn convfeat_manifest() -> &'static CatalogManifest {
    static M: OnceLock<CatalogManifest> = OnceLock::new();
    M.get_or_init(|| {
        let mut e = Vec::with_capacity(182);
        for i in 0..N_MFCC {
            for s in SIX_STATS {
                e.push(entry(format!("mfcc{i}_{s}"), &format!("mfcc[{i}]"), s));
            }
        }
        for (prefix, prim) in [("dmfcc", "delta mfcc"), ("ddmfcc", "delta-delta mfcc")] {
            for i in 0..N_MFCC {
                for s in ["mean", "std"] {
                    e.push(entry(format!("{prefix}{i}_{s}"), &format!("{prim}[{i}]"), s));
                }
            }
        }
        for d in FRAME_DESCRIPTORS {
            for s in SIX_STATS {
                e.push(entry(format!("{d}_{s}"), d, s));
            }
        }
        e.push(entry("onset_rate".into(), "onsets", "count per second"));
        e.push(entry("onset_strength_mean".into(), "onset strength", "mean"));
        e.push(entry("onset_strength_std".into(), "onset strength", "std"));
        e.push(entry(
            "tempo_bpm".into(),
            "onset strength autocorrelation",
            "argmax lag in BPM",
        ));
        for b in 0..6 {
            for s in ["mean", "std"] {
                e.push(entry(
                    format!("contrast{b}_{s}"),
                    &format!("spectral contrast band {b}"),
                    s,
                ));
            }
        }
        CatalogManifest::new(FeatureSetId::ConvFeat, REVISION, e).expect("convfeat catalog is well formed")
    })
}

fn six(out: &mut Vec<f64>, x: &[f64]) {
    out.extend([
        fx::mean(x),
        fx::std(x),
        fx::median(x),
        fx::min(x),
        fx::max(x),
        fx::skewness(x),
    ]);
}

pub(crate) fn check_duration(clip: &AudioClip) -> Result<()> {
    if clip.duration_secs() < 1.0 {
        return Err(Error::Extraction {
            clip: clip.source_id().to_string(),
            reason: format!("duration {:.3} s is below the 1 s minimum", clip.duration_secs()),
        });
    }
    if clip.sample_rate() != crate::audio::CANONICAL_RATE {
        return Err(Error::Extraction {
            clip: clip.source_id().to_string(),
            reason: format!("sample rate {} Hz is not canonical", clip.sample_rate()),
        });
    }
    Ok(())
}

/// Wraps lower-level failures so the clip is always named.
pub(crate) fn named<T>(clip: &AudioClip, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Extraction { .. } => e,
        other => Error::Extraction {
            clip: clip.source_id().to_string(),
            reason: other.to_string(),
        },
    })
}

/// The 182-value conventional feature set.
pub fn extract_convfeat(clip: &AudioClip) -> Result<FeatureVector> {
    check_duration(clip)?;
    let manifest = convfeat_manifest();
    let framing = Framing::speech(clip.sample_rate());
    let spectra = named(clip, stft(clip, framing, Window::Hann))?;
    let mut flags = Vec::new();
    let mut v = Vec::with_capacity(182);

    let mfcc = crate::dsp::mfcc_from_spectra(&spectra, &MfccConfig::default());
    for i in 0..N_MFCC {
        six(&mut v, &mfcc.column(i));
    }
    let d1 = named(clip, deltas(&mfcc, 2))?;
    let d2 = named(clip, deltas(&d1, 2))?;
    for d in [&d1, &d2] {
        for i in 0..N_MFCC {
            let c = d.column(i);
            v.extend([fx::mean(&c), fx::std(&c)]);
        }
    }

    let desc: Vec<_> = spectral_descriptors(&spectra)
        .into_iter()
        .filter(|f| !f.zero_energy)
        .collect();
    if desc.len() < spectra.num_frames() {
        flags.push("zero-energy-frames".to_string());
    }
    let col = |f: fn(&crate::dsp::SpectralFrame) -> f64| desc.iter().map(f).collect::<Vec<_>>();
    six(&mut v, &col(|f| f.centroid));
    six(&mut v, &col(|f| f.bandwidth));
    six(&mut v, &col(|f| f.rolloff85));
    six(&mut v, &col(|f| f.flatness));
    let zr = zcr_rms(clip, framing);
    six(&mut v, &zr.zcr);
    six(&mut v, &zr.rms);

    let onsets = crate::dsp::onsets_from_spectra(&spectra, clip.duration_secs(), &OnsetParams::default());
    let strength = onsets.strength.values();
    v.push(onsets.onset_times.len() as f64 / clip.duration_secs());
    v.extend([fx::mean(strength), fx::std(strength)]);
    if !onsets.tempo_defined {
        flags.push("tempo-undefined".to_string());
    }
    v.push(onsets.tempo_bpm);

    for b in 0..6 {
        let c: Vec<f64> = desc.iter().map(|f| f.contrast[b]).collect();
        v.extend([fx::mean(&c), fx::std(&c)]);
    }

    let fv = FeatureVector {
        set_id: FeatureSetId::ConvFeat,
        names: manifest.names(),
        values: v,
        catalog_version: manifest.version(),
        flags,
    };
    named(clip, fv.validate())?;
    Ok(fv)
}
