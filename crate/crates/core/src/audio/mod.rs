//! Audio clips: loading, validation, resampling, level measurement and
//! synthetic test signals.

mod clip;
mod resample;
mod synth;
mod wav;

pub use clip::{mean_power, rms_db, AudioClip, CANONICAL_RATE};
pub use resample::resample;
pub use synth::{synth_signal, Resonance, SignalKind, SignalSpec, VoiceParams};
pub use wav::{read_wav, write_wav, WavEncoding};
