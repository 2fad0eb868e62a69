//! Octave-band analysis filters and the intensity-envelope detector.

use crate::audio::{require_analysis_rate, samples_for, AudioBuffer};
use crate::coefficients::{StandardCoefficients, BANDS};
use crate::error::{Result, StiError};
use crate::iir::Sos;

/// Filter order of the octave analysis filters.
pub const ANALYSIS_ORDER: usize = 18;
/// Filter order of the half-octave filters shaping the test-signal carriers.
pub const GENERATION_ORDER: usize = 20;
/// Samples discarded from the start of every octave-filtered signal.
pub const TRANSIENT_DISCARD_S: f64 = 0.2;
/// Shortest input accepted by [`apply_octave_filter_bank`].
pub const MIN_FILTER_INPUT_S: f64 = 0.4;

pub const ENVELOPE_CUTOFF_HZ: f64 = 100.0;
pub const ENVELOPE_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    Octave,
    HalfOctave,
}

impl Bandwidth {
    /// Exponent `e` such that the band edges are `centre * 2^(±e)`.
    fn half_width_exponent(self) -> f64 {
        match self {
            Bandwidth::Octave => 0.5,
            Bandwidth::HalfOctave => 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandFilterSpec {
    pub center_frequency: f64,
    /// Bandpass order (twice the prototype order).
    pub order: usize,
    pub bandwidth: Bandwidth,
    pub sample_rate: u32,
}

impl BandFilterSpec {
    pub fn analysis(center_frequency: f64, sample_rate: u32) -> Self {
        Self {
            center_frequency,
            order: ANALYSIS_ORDER,
            bandwidth: Bandwidth::Octave,
            sample_rate,
        }
    }

    pub fn generation(center_frequency: f64, sample_rate: u32) -> Self {
        Self {
            center_frequency,
            order: GENERATION_ORDER,
            bandwidth: Bandwidth::HalfOctave,
            sample_rate,
        }
    }

    pub fn edges(&self) -> (f64, f64) {
        let e = 2f64.powf(self.bandwidth.half_width_exponent());
        (self.center_frequency / e, self.center_frequency * e)
    }

    pub fn design(&self) -> Result<Sos> {
        let (low, high) = self.edges();
        let nyquist = self.sample_rate as f64 / 2.0;
        if high >= nyquist {
            return Err(StiError::InvalidArgument(format!(
                "band edge {high:.0} Hz is not below Nyquist ({nyquist:.0} Hz)"
            )));
        }
        if self.order == 0 || self.order % 2 != 0 {
            return Err(StiError::InvalidArgument(format!(
                "bandpass order must be even and positive, got {}",
                self.order
            )));
        }
        Ok(Sos::butterworth_bandpass(
            self.order / 2,
            low,
            high,
            self.sample_rate as f64,
        ))
    }
}

/// The seven octave analysis filters for one sample rate.
#[derive(Debug, Clone)]
pub struct OctaveFilterBank {
    filters: Vec<Sos>,
    sample_rate: u32,
}

impl OctaveFilterBank {
    pub fn new(coeffs: &StandardCoefficients, sample_rate: u32) -> Result<Self> {
        require_analysis_rate(sample_rate)?;
        let filters = coeffs
            .band_centers
            .iter()
            .map(|&fc| BandFilterSpec::analysis(fc, sample_rate).design())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            filters,
            sample_rate,
        })
    }

    pub fn band(&self, k: usize) -> &Sos {
        &self.filters[k]
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Band `k` of `signal` with the start-up transient removed.
    pub fn filter_band(&self, signal: &AudioBuffer, k: usize) -> Result<AudioBuffer> {
        self.check_input(signal)?;
        let discard = samples_for(TRANSIENT_DISCARD_S, self.sample_rate);
        let mut y = self.filters[k].filter(signal.samples());
        y.drain(..discard);
        Ok(AudioBuffer::from_parts(y, self.sample_rate))
    }

    /// Band `k` of `signal` without any transient removal. Used for impulse
    /// responses, where the start of the response is the signal.
    pub fn filter_band_full(&self, signal: &AudioBuffer, k: usize) -> Result<AudioBuffer> {
        if signal.sample_rate() != self.sample_rate {
            return Err(rate_mismatch(signal.sample_rate(), self.sample_rate));
        }
        Ok(AudioBuffer::from_parts(
            self.filters[k].filter(signal.samples()),
            self.sample_rate,
        ))
    }

    fn check_input(&self, signal: &AudioBuffer) -> Result<()> {
        if signal.sample_rate() != self.sample_rate {
            return Err(rate_mismatch(signal.sample_rate(), self.sample_rate));
        }
        let min = samples_for(MIN_FILTER_INPUT_S, self.sample_rate);
        if signal.len() < min {
            return Err(StiError::SignalTooShort {
                actual_s: signal.duration(),
                required_s: MIN_FILTER_INPUT_S,
                reason: "octave filtering discards the first 200 ms",
            });
        }
        Ok(())
    }
}

fn rate_mismatch(got: u32, want: u32) -> StiError {
    StiError::InvalidArgument(format!(
        "sample rate {got} Hz does not match filter bank rate {want} Hz"
    ))
}

/// Splits `signal` into the seven octave bands, discarding the first 200 ms
/// of each output.
pub fn apply_octave_filter_bank(
    signal: &AudioBuffer,
    coeffs: &StandardCoefficients,
) -> Result<Vec<AudioBuffer>> {
    signal.require_analysis_rate()?;
    let bank = OctaveFilterBank::new(coeffs, signal.sample_rate())?;
    (0..BANDS).map(|k| bank.filter_band(signal, k)).collect()
}

/// Intensity envelope: the squared signal through a 100 Hz lowpass, at the
/// input rate, clamped at zero.
pub fn intensity_envelope(band_signal: &AudioBuffer) -> Result<AudioBuffer> {
    if band_signal.is_empty() {
        return Err(StiError::InvalidArgument("empty signal".into()));
    }
    let fs = band_signal.sample_rate() as f64;
    let lp = Sos::butterworth_lowpass(ENVELOPE_ORDER, ENVELOPE_CUTOFF_HZ, fs);
    let mut env: Vec<f64> = band_signal.samples().iter().map(|x| x * x).collect();
    lp.filter_in_place(&mut env);
    env.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(AudioBuffer::from_parts(env, band_signal.sample_rate()))
}
