//! Impulse responses from swept-sine recordings, and STI from an impulse
//! response through the Schroeder integral.

use std::f64::consts::PI;

use crate::audio::{samples_for, AudioBuffer};
use crate::coefficients::{StandardCoefficients, BANDS};
use crate::convolve::fft_convolve;
use crate::error::{Result, StiError};
use crate::filterbank::OctaveFilterBank;
use crate::levels::OctaveLevels;
use crate::matrix::{ModulationMatrix, Scheme};
use crate::mtf::{finish_with, AnalysisOptions};
use crate::result::{AnalysisMethod, StiResult};

/// A deconvolved response must peak at least this far above its RMS.
pub const MIN_PEAK_TO_RMS_DB: f64 = 20.0;
/// The extracted response starts this long before the main peak.
pub const PRE_PEAK_WINDOW_S: f64 = 0.005;
pub const RECOMMENDED_IR_DURATION_S: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    samples: Vec<f64>,
    sample_rate: u32,
    onset_index: usize,
}

impl ImpulseResponse {
    pub fn new(samples: Vec<f64>, sample_rate: u32, onset_index: usize) -> Result<Self> {
        let buffer = AudioBuffer::new(samples, sample_rate)?;
        if onset_index >= buffer.len() {
            return Err(StiError::InvalidArgument(format!(
                "onset index {onset_index} outside a response of {} samples",
                buffer.len()
            )));
        }
        if energy(buffer.samples()) <= 0.0 {
            return Err(StiError::ZeroEnergy);
        }
        Ok(Self {
            samples: buffer.into_samples(),
            sample_rate,
            onset_index,
        })
    }

    /// Takes the largest-magnitude sample as the onset.
    pub fn from_buffer(buffer: AudioBuffer) -> Result<Self> {
        let onset = argmax_abs(buffer.samples());
        let rate = buffer.sample_rate();
        Self::new(buffer.into_samples(), rate, onset)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn onset_index(&self) -> usize {
        self.onset_index
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn to_buffer(&self) -> AudioBuffer {
        AudioBuffer::from_parts(self.samples.clone(), self.sample_rate)
    }

    /// Keeps at most `seconds` of response after the onset.
    pub fn truncated(&self, seconds: f64) -> Result<Self> {
        if !(seconds > 0.0) {
            return Err(StiError::InvalidArgument(format!(
                "trim length must be positive, got {seconds}"
            )));
        }
        let end = (self.onset_index + samples_for(seconds, self.sample_rate)).min(self.len());
        Self::new(self.samples[..end].to_vec(), self.sample_rate, self.onset_index)
    }
}

fn energy(h: &[f64]) -> f64 {
    h.iter().map(|v| v * v).sum()
}

fn argmax_abs(x: &[f64]) -> usize {
    x.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v.abs() > best.1 {
                (i, v.abs())
            } else {
                best
            }
        })
        .0
}

/// Convolves the recording with the inverse filter and cuts the linear
/// response out of the result: from 5 ms before the main peak (or the
/// zero-lag point, if earlier) to the end.
pub fn deconvolve_impulse_response(
    recorded: &AudioBuffer,
    inverse_filter: &AudioBuffer,
) -> Result<ImpulseResponse> {
    if recorded.sample_rate() != inverse_filter.sample_rate() {
        return Err(StiError::InvalidArgument(format!(
            "recording at {} Hz but inverse filter at {} Hz",
            recorded.sample_rate(),
            inverse_filter.sample_rate()
        )));
    }
    if inverse_filter.is_empty() || recorded.len() < inverse_filter.len() {
        return Err(StiError::InvalidArgument(
            "recording is shorter than the sweep".into(),
        ));
    }
    let y = fft_convolve(recorded.samples(), inverse_filter.samples());
    let zero_lag = inverse_filter.len() - 1;
    let peak = argmax_abs(&y);
    let rms = crate::audio::rms(&y);
    let ratio_db = 20.0 * (y[peak].abs() / rms).log10();
    if !(ratio_db >= MIN_PEAK_TO_RMS_DB) {
        return Err(StiError::NoImpulse { ratio_db });
    }
    let pre = samples_for(PRE_PEAK_WINDOW_S, recorded.sample_rate());
    let start = zero_lag.min(peak).saturating_sub(pre);
    ImpulseResponse::new(y[start..].to_vec(), recorded.sample_rate(), peak - start)
}

/// Schroeder modulation transfer `|sum h^2 e^{-j 2 pi fm t}| / sum h^2`.
/// With `snr_db` the noise factor `1 / (1 + 10^(-snr/10))` is applied as
/// well.
pub fn schroeder_mtf(ir: &ImpulseResponse, fm: f64, snr_db: Option<f64>) -> Result<f64> {
    let m = schroeder_of(&ir.samples, ir.sample_rate, fm)?;
    Ok(match snr_db {
        Some(snr) => m / (1.0 + 10f64.powf(-snr / 10.0)),
        None => m,
    })
}

fn schroeder_of(h: &[f64], sample_rate: u32, fm: f64) -> Result<f64> {
    let w = 2.0 * PI * fm / sample_rate as f64;
    let (mut re, mut im, mut total) = (0.0, 0.0, 0.0);
    for (i, &v) in h.iter().enumerate() {
        let e = v * v;
        let (s, c) = (w * i as f64).sin_cos();
        re += e * c;
        im -= e * s;
        total += e;
    }
    if total <= 0.0 {
        return Err(StiError::ZeroEnergy);
    }
    Ok(re.hypot(im) / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IrSettings {
    /// Apply the noise factor inside the Schroeder integral instead of in
    /// the ambient-noise step.
    pub strict_eq5: bool,
    /// Divide out the modulation transfer of the octave filters themselves.
    pub compensate_analysis_filters: bool,
}

impl Default for IrSettings {
    fn default() -> Self {
        Self {
            strict_eq5: false,
            compensate_analysis_filters: true,
        }
    }
}

/// Indirect-method STI with default [`IrSettings`].
pub fn analyze_impulse_response(
    ir: &ImpulseResponse,
    scheme: Scheme,
    options: &AnalysisOptions,
    coeffs: &StandardCoefficients,
) -> Result<StiResult> {
    analyze_impulse_response_with(ir, scheme, options, coeffs, IrSettings::default())
}

pub fn analyze_impulse_response_with(
    ir: &ImpulseResponse,
    scheme: Scheme,
    options: &AnalysisOptions,
    coeffs: &StandardCoefficients,
    settings: IrSettings,
) -> Result<StiResult> {
    options.validate()?;
    if options.reference.is_some() {
        return Err(StiError::InvalidArgument(
            "a reference signal has no meaning for impulse-response analysis".into(),
        ));
    }
    if ir.duration() < RECOMMENDED_IR_DURATION_S {
        log::warn!(
            "impulse response is {:.2} s; at least {RECOMMENDED_IR_DURATION_S} s is recommended",
            ir.duration()
        );
    }
    let snr = match (settings.strict_eq5, &options.signal_levels, &options.noise_levels) {
        (true, Some(s), Some(n)) => Some(band_snr_db(s, n)),
        _ => None,
    };

    let ratios = band_schroeder_matrix(ir, scheme, coeffs, settings.compensate_analysis_filters, snr)?;
    finish_with(
        ratios,
        options,
        coeffs,
        AnalysisMethod::Indirect,
        false,
        snr.is_some(),
    )
}

fn band_snr_db(signal: &OctaveLevels, noise: &OctaveLevels) -> [f64; BANDS] {
    let s = signal.db();
    let n = noise.db();
    std::array::from_fn(|k| s[k] - n[k])
}

/// Schroeder ratios of the seven octave-filtered band responses at the
/// scheme's modulation frequencies.
pub fn band_schroeder_matrix(
    ir: &ImpulseResponse,
    scheme: Scheme,
    coeffs: &StandardCoefficients,
    compensate_analysis_filters: bool,
    snr_db: Option<[f64; BANDS]>,
) -> Result<ModulationMatrix> {
    let bank = OctaveFilterBank::new(coeffs, ir.sample_rate)?;
    let buffer = ir.to_buffer();
    let bands = (0..BANDS)
        .map(|k| bank.filter_band_full(&buffer, k))
        .collect::<Result<Vec<_>>>()?;
    let filter_irs = if compensate_analysis_filters {
        let mut delta = vec![0.0; ir.len()];
        delta[ir.onset_index] = 1.0;
        let delta = AudioBuffer::from_parts(delta, ir.sample_rate);
        Some(
            (0..BANDS)
                .map(|k| bank.filter_band_full(&delta, k))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };

    ModulationMatrix::try_build(scheme, coeffs, |k, _, fm| {
        let mut m = schroeder_of(bands[k].samples(), ir.sample_rate, fm)
            .map_err(|_| zero_band(k))?;
        if let Some(f) = &filter_irs {
            m /= schroeder_of(f[k].samples(), ir.sample_rate, fm)?;
        }
        if let Some(snr) = snr_db {
            m /= 1.0 + 10f64.powf(-snr[k] / 10.0);
        }
        Ok(m)
    })
}

fn zero_band(k: usize) -> StiError {
    StiError::InvalidArgument(format!("band {} of the impulse response has no energy", k + 1))
}

/// `m(fm) = 1 / sqrt(1 + (2 pi fm T / 13.8)^2)` for an exponential decay with
/// reverberation time `T`.
pub fn exponential_decay_mtf(fm: f64, reverberation_time: f64) -> f64 {
    let x = 2.0 * PI * fm * reverberation_time / 13.8;
    1.0 / (1.0 + x * x).sqrt()
}
