use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioClip;
use crate::error::{Error, Result};

/// Integer PCM is scaled by this divisor so that -32768 maps to exactly -1.0.
const PCM16_SCALE: f64 = 32768.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::Unsupported => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "codec not supported".into(),
        },
        hound::Error::FormatError(reason) => Error::WavParse {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        },
        other => Error::WavParse {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

/// Reads a PCM16 or float32 WAV file, averaging stereo down to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("{} channels", spec.channels),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / PCM16_SCALE))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(path, e))?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {format:?} samples"),
            })
        }
    };
    let mono: Vec<f64> = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|pair| 0.5 * (pair[0] + pair[1]))
            .collect()
    } else {
        interleaved
    };
    if mono.is_empty() {
        return Err(Error::WavParse {
            path: path.to_path_buf(),
            reason: "no audio frames".into(),
        });
    }
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioClip::new(mono, spec.sample_rate, id)
}

/// Writes a mono clip. PCM16 output rounds and saturates.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in clip.samples() {
        let res = match encoding {
            WavEncoding::Pcm16 => {
                let v = (s * PCM16_SCALE).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(v)
            }
            WavEncoding::Float32 => writer.write_sample(s as f32),
        };
        res.map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw_i16(path: &Path, channels: u16, rate: u32, data: &[i16]) {
        let spec = WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(path, spec).unwrap();
        for &v in data {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn mono_sine_round_trips_length_and_rate() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sine.wav");
        let data: Vec<i16> = (0..16_000)
            .map(|i| {
                let t = i as f64 / 16_000.0;
                ((2.0 * std::f64::consts::PI * 440.0 * t).sin() * 16000.0) as i16
            })
            .collect();
        write_raw_i16(&p, 1, 16_000, &data);
        let clip = read_wav(&p).unwrap();
        assert_eq!(clip.len(), 16_000);
        assert_eq!(clip.sample_rate(), 16_000);
        assert_eq!(clip.source_id(), "sine");
    }

    #[test]
    fn opposite_stereo_channels_cancel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("st.wav");
        let data: Vec<i16> = (0..2000).map(|i| if i % 2 == 0 { 16384 } else { -16384 }).collect();
        write_raw_i16(&p, 2, 16_000, &data);
        let clip = read_wav(&p).unwrap();
        assert_eq!(clip.len(), 1000);
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn full_scale_positive_scales_by_32768() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("max.wav");
        write_raw_i16(&p, 1, 16_000, &[32767; 64]);
        let clip = read_wav(&p).unwrap();
        let expected = 32767.0 / 32768.0;
        assert!(clip.samples().iter().all(|&s| s == expected));
        assert!((expected - 0.99997).abs() < 1e-5);
    }

    #[test]
    fn malformed_header_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.wav");
        std::fs::write(&p, b"RIFX\x00\x00\x00\x00WAVEjunkjunk").unwrap();
        assert!(matches!(read_wav(&p), Err(Error::WavParse { .. })));
    }

    #[test]
    fn eight_bit_pcm_is_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u8.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 8,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&p, spec).unwrap();
        for _ in 0..10 {
            w.write_sample(3i8).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(read_wav(&p), Err(Error::UnsupportedFormat { .. })));
    }

    #[test]
    fn float32_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.wav");
        let clip = AudioClip::new(vec![0.5, -0.25, 0.125, 1.0], 22_050, "f").unwrap();
        write_wav(&p, &clip, WavEncoding::Float32).unwrap();
        let back = read_wav(&p).unwrap();
        assert_eq!(back.samples(), clip.samples());
        assert_eq!(back.sample_rate(), 22_050);
    }
}
