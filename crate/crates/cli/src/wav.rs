//! WAV input and output.
//!
//! Reading goes through `hound` for integer PCM and 32-bit float. Hound has
//! no 64-bit float support, so those files are decoded here from the raw
//! `data` chunk.

use std::fs;
use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};
use sti_core::AudioBuffer;

use crate::error::CliError;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Consecutive full-scale samples that count as clipping.
pub const CLIP_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn format_name(tag: u16) -> String {
    match tag {
        2 => "Microsoft ADPCM".into(),
        6 => "A-law".into(),
        7 => "mu-law".into(),
        0x11 => "IMA ADPCM".into(),
        0x55 => "MPEG layer 3".into(),
        other => format!("format tag {other:#06x}"),
    }
}

fn unsupported(path: &Path, what: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: unsupported WAV format: {what}", path.display()))
}

/// Walks the RIFF chunks and returns the format and the `data` payload.
fn parse_riff<'a>(path: &Path, bytes: &'a [u8]) -> Result<(Format, &'a [u8]), CliError> {
    let bad = |m: &str| CliError::Io(format!("{}: not a WAV file ({m})", path.display()));
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE header"));
    }
    let u16_at = |b: &[u8], i: usize| u16::from_le_bytes([b[i], b[i + 1]]);
    let u32_at = |b: &[u8], i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);

    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = u32_at(bytes, pos + 4) as usize;
        let body = &bytes[pos + 8..(pos + 8 + len).min(bytes.len())];
        match id {
            b"fmt " if body.len() >= 16 => {
                let mut tag = u16_at(body, 0);
                if tag == FORMAT_EXTENSIBLE && body.len() >= 26 {
                    // first two bytes of the sub-format GUID carry the real tag
                    tag = u16_at(body, 24);
                }
                format = Some(Format {
                    tag,
                    channels: u16_at(body, 2),
                    sample_rate: u32_at(body, 4),
                    bits: u16_at(body, 14),
                });
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos += 8 + len + (len & 1);
    }
    match (format, data) {
        (Some(f), Some(d)) => Ok((f, d)),
        (None, _) => Err(bad("no fmt chunk")),
        (_, None) => Err(bad("no data chunk")),
    }
}

/// Reads the first channel of a PCM (16/24/32-bit) or float (32/64-bit)
/// WAV file with samples scaled to [-1, 1].
pub fn read_wav(path: &Path) -> Result<AudioBuffer, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let (format, data) = parse_riff(path, &bytes)?;

    let (samples, full_scale) = match (format.tag, format.bits) {
        (FORMAT_PCM, 16 | 24 | 32) => (read_with_hound(path, &bytes, format)?, 1.0 - 0.5f64.powi(format.bits as i32 - 1)),
        (FORMAT_PCM, bits) => return Err(unsupported(path, format!("{bits}-bit PCM"))),
        (FORMAT_FLOAT, 32) => (read_with_hound(path, &bytes, format)?, 1.0),
        (FORMAT_FLOAT, 64) => (read_f64(data, format.channels), 1.0),
        (FORMAT_FLOAT, bits) => return Err(unsupported(path, format!("{bits}-bit float"))),
        (tag, _) => return Err(unsupported(path, format_name(tag))),
    };
    if format.channels > 1 {
        log::warn!(
            "{}: {} channels, analysing the first one only",
            path.display(),
            format.channels
        );
    }
    if has_clipping(&samples, full_scale) {
        log::warn!(
            "{}: {CLIP_RUN} or more consecutive full-scale samples, the recording may be clipped",
            path.display()
        );
    }
    AudioBuffer::new(samples, format.sample_rate)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_with_hound(path: &Path, bytes: &[u8], format: Format) -> Result<Vec<f64>, CliError> {
    let io = |e: hound::Error| CliError::Io(format!("{}: {e}", path.display()));
    let reader = hound::WavReader::new(std::io::Cursor::new(bytes)).map_err(io)?;
    let channels = format.channels.max(1) as usize;
    let spec = reader.spec();
    let samples = match spec.sample_format {
        SampleFormat::Int => {
            let scale = 0.5f64.powi(spec.bits_per_sample as i32 - 1);
            reader
                .into_samples::<i32>()
                .step_by(channels)
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<Vec<_>, _>>()
        }
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(f64::from))
            .collect::<Result<Vec<_>, _>>(),
    };
    samples.map_err(io)
}

fn read_f64(data: &[u8], channels: u16) -> Vec<f64> {
    data.chunks_exact(8)
        .step_by(channels.max(1) as usize)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect()
}

fn has_clipping(samples: &[f64], full_scale: f64) -> bool {
    let mut run = 0;
    for v in samples {
        if v.abs() >= full_scale {
            run += 1;
            if run >= CLIP_RUN {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// Writes mono 24-bit PCM. Samples outside [-1, 1] are clamped.
pub fn write_wav(path: &Path, buffer: &AudioBuffer) -> Result<(), CliError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: 24,
        sample_format: SampleFormat::Int,
    };
    let max = (1i32 << 23) - 1;
    write_samples(path, spec, buffer.samples().iter(), |w, &x| {
        w.write_sample((x.clamp(-1.0, 1.0) * max as f64).round() as i32)
    })
}

/// Writes mono 32-bit float without any scaling, for signals such as
/// inverse filters whose magnitude is far below full scale.
pub fn write_wav_float(path: &Path, buffer: &AudioBuffer) -> Result<(), CliError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    write_samples(path, spec, buffer.samples().iter(), |w, &x| {
        w.write_sample(x as f32)
    })
}

fn write_samples<'a, I, F>(path: &Path, spec: WavSpec, samples: I, mut put: F) -> Result<(), CliError>
where
    I: Iterator<Item = &'a f64>,
    F: FnMut(&mut WavWriter<std::io::BufWriter<fs::File>>, &f64) -> hound::Result<()>,
{
    let io = |e: hound::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut writer = WavWriter::create(path, spec).map_err(io)?;
    for x in samples {
        put(&mut writer, x).map_err(io)?;
    }
    writer.finalize().map_err(io)
}
