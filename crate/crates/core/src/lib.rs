pub mod audio;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod features;
pub mod models;
pub mod noise;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
