//! Signal-processing primitives shared by both feature catalogs.
//!
//! All analysis uses 25 ms frames with a 10 ms hop and a Hann window unless a
//! primitive needs a longer span (pitch). Logs are floored at [`LOG_FLOOR`].

mod deltas;
mod frames;
mod lpc;
mod mel;
mod pitch;
mod rhythm;
mod spectral;
mod temporal;
mod voice;

pub use deltas::deltas;
pub use frames::{stft, FrameSeries, Framing, Window};
pub use lpc::{autocorrelation, levinson_durbin, lpc_formants, Formant, FormantConfig, FormantFrame, Lpc};
pub use mel::{
    dct_ii_ortho, hz_to_mel, log_mel_spectrogram, mel_to_hz, mfcc, mfcc_from_spectra, MelFilterbank, MfccConfig,
};
pub use pitch::{pitch_track, PitchConfig, PitchFrame, PitchTrack};
pub use rhythm::{onsets_from_spectra, onsets_tempo, OnsetAnalysis, OnsetParams};
pub use spectral::{spectral_descriptors, SpectralFrame, CONTRAST_BANDS};
pub use temporal::{zcr_rms, ZcrRms};
pub use voice::{voice_quality, Pulse, VoiceQuality};

/// Floor applied before every logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

pub(crate) fn floored_ln(x: f64) -> f64 {
    x.max(LOG_FLOOR).ln()
}

pub(crate) fn floored_db(power: f64) -> f64 {
    10.0 * power.max(LOG_FLOOR).log10()
}
