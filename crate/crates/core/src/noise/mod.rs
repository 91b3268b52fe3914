//! Environmental noise injection: the noise taxonomy, the on-disk noise bank,
//! and the two mixing modes (continuous background and short events).

mod bank;
mod mix;
mod spec;

pub use bank::{NoiseBank, BANK_PEAK_DBFS};
pub use mix::{
    add_background_noise, add_short_noises, background_noise_layer, measure_snr, short_noise_layer, EventPlacement,
    ShortNoiseLayer,
};
pub use spec::{NoiseCategory, NoiseMode, NoiseSpec, ShortNoisePlacement, Taxonomy};
