use serde::{Deserialize, Serialize};

use crate::error::{Result, StiError};

/// Lowest sample rate at which the 8 kHz octave band (upper edge ~11.3 kHz)
/// fits below Nyquist.
pub const MIN_ANALYSIS_RATE: u32 = 24_000;

/// A mono sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioBuffer {
    /// Wraps `samples`, rejecting a zero rate or non-finite values.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(StiError::InvalidArgument("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(StiError::InvalidArgument(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Internal constructor for buffers produced by our own arithmetic on
    /// finite input.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
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

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Returns a copy scaled by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self::from_parts(self.samples.iter().map(|x| x * gain).collect(), self.sample_rate)
    }

    pub(crate) fn require_analysis_rate(&self) -> Result<()> {
        require_analysis_rate(self.sample_rate)
    }
}

pub(crate) fn require_analysis_rate(rate: u32) -> Result<()> {
    if rate < MIN_ANALYSIS_RATE {
        Err(StiError::SampleRateTooLow {
            rate,
            minimum: MIN_ANALYSIS_RATE,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Number of samples for a duration, rounded to the nearest sample.
pub(crate) fn samples_for(duration: f64, sample_rate: u32) -> usize {
    (duration * sample_rate as f64).round() as usize
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn amplitude_to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}
