//! Test-signal generators: pink noise, band-limited carriers, the STIPA
//! mixture, the 98 Full STI signals and the exponential sweep.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::audio::{amplitude_to_db, db_to_amplitude, require_analysis_rate, samples_for, AudioBuffer};
use crate::coefficients::{StandardCoefficients, BANDS, MODULATION_FREQUENCIES};
use crate::error::{Result, StiError};
use crate::filterbank::BandFilterSpec;
use crate::mtf::{LabeledSignal, SignalLabel};

/// RMS level of generated STIPA and Full STI signals.
pub const TARGET_RMS_DBFS: f64 = -20.0;
/// Generated signals must peak below this level.
pub const PEAK_LIMIT_DBFS: f64 = -0.5;

pub const STIPA_RECOMMENDED_DURATION_S: f64 = 15.0;
pub const FULL_STI_RECOMMENDED_DURATION_S: f64 = 10.0;

pub const MIN_SWEEP_DURATION_S: f64 = 1.6;
pub const DEFAULT_FADE_FRACTION: f64 = 0.005;
pub const SWEEP_AMPLITUDE: f64 = 0.5;

fn check_duration(duration: f64) -> Result<()> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(StiError::InvalidArgument(format!(
            "duration must be positive, got {duration}"
        )));
    }
    Ok(())
}

/// Seeded pink noise by spectral shaping: complex Gaussian bins scaled by
/// `1/sqrt(f)`, no DC, inverse FFT. Normalized to the target RMS.
pub fn generate_pink_noise(duration: f64, sample_rate: u32, seed: u64) -> Result<AudioBuffer> {
    check_duration(duration)?;
    if sample_rate == 0 {
        return Err(StiError::InvalidArgument("sample rate must be positive".into()));
    }
    let n = samples_for(duration, sample_rate).max(1);
    let mut x = pink_samples(n, seed);
    normalize_rms(&mut x, db_to_amplitude(TARGET_RMS_DBFS));
    Ok(AudioBuffer::from_parts(x, sample_rate))
}

fn pink_samples(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let half = n / 2;
    for k in 1..=half {
        let scale = 1.0 / (k as f64).sqrt();
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        if n % 2 == 0 && k == half {
            // Nyquist bin is its own mirror
            spec[k] = Complex64::new(re * scale, 0.0);
        } else {
            spec[k] = Complex64::new(re, im) * scale;
            spec[n - k] = spec[k].conj();
        }
    }
    FftPlanner::<f64>::new()
        .plan_fft_inverse(n)
        .process(&mut spec);
    spec.into_iter().map(|c| c.re).collect()
}

fn normalize_rms(x: &mut [f64], target: f64) {
    let r = crate::audio::rms(x);
    if r > 0.0 {
        let g = target / r;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

/// Seven half-octave noise carriers `N_k(t)`, each at unit RMS.
#[derive(Debug, Clone)]
pub struct CarrierBank {
    pub carriers: Vec<AudioBuffer>,
}

impl CarrierBank {
    /// Band `k` (0-based) is pink noise with seed `seed + k + 1` through the
    /// 20th-order half-octave filter.
    pub fn generate(
        duration: f64,
        sample_rate: u32,
        seed: u64,
        coeffs: &StandardCoefficients,
    ) -> Result<Self> {
        check_duration(duration)?;
        require_analysis_rate(sample_rate)?;
        let n = samples_for(duration, sample_rate).max(1);
        let carriers = coeffs
            .band_centers
            .iter()
            .enumerate()
            .map(|(k, &fc)| {
                let sos = BandFilterSpec::generation(fc, sample_rate).design()?;
                let mut x = pink_samples(n, seed.wrapping_add(k as u64 + 1));
                sos.filter_in_place(&mut x);
                normalize_rms(&mut x, 1.0);
                Ok(AudioBuffer::from_parts(x, sample_rate))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { carriers })
    }

    pub fn len(&self) -> usize {
        self.carriers.first().map_or(0, AudioBuffer::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// STIPA intensity modulator of one band before the square root, clamped
/// at zero.
pub fn stipa_bracket(t: f64, f1: f64, f2: f64, depth: f64) -> f64 {
    (0.5 * (1.0 + depth * ((2.0 * PI * f1 * t).sin() - (2.0 * PI * f2 * t).sin()))).max(0.0)
}

/// Full STI amplitude modulator `sqrt(0.5 (1 + cos(2 pi fm t)))`.
pub fn full_sti_modulator(t: f64, fm: f64) -> f64 {
    (0.5 * (1.0 + (2.0 * PI * fm * t).cos())).max(0.0).sqrt()
}

fn finish_signal(mut x: Vec<f64>, sample_rate: u32) -> Result<AudioBuffer> {
    normalize_rms(&mut x, db_to_amplitude(TARGET_RMS_DBFS));
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let peak_dbfs = amplitude_to_db(peak);
    if peak_dbfs >= PEAK_LIMIT_DBFS {
        return Err(StiError::PeakExceeded {
            peak_dbfs,
            limit_dbfs: PEAK_LIMIT_DBFS,
        });
    }
    Ok(AudioBuffer::from_parts(x, sample_rate))
}

/// STIPA test signal `sum_k G_k N_k(t) A_k(t)`.
pub fn generate_stipa_signal(
    duration: f64,
    sample_rate: u32,
    seed: u64,
    coeffs: &StandardCoefficients,
) -> Result<AudioBuffer> {
    check_duration(duration)?;
    require_analysis_rate(sample_rate)?;
    if duration < STIPA_RECOMMENDED_DURATION_S {
        log::warn!(
            "STIPA signal of {duration} s is shorter than the recommended {STIPA_RECOMMENDED_DURATION_S} s"
        );
    }
    let bank = CarrierBank::generate(duration, sample_rate, seed, coeffs)?;
    let gains = coeffs.band_gains();
    let fs = sample_rate as f64;
    let depth = coeffs.stipa_modulation_depth;
    let mut x = vec![0.0; bank.len()];
    let mut clamped = 0usize;
    for ((&gain, &[f1, f2]), carrier) in gains.iter().zip(&coeffs.stipa_pairs).zip(&bank.carriers) {
        let carrier = carrier.samples();
        for (i, v) in x.iter_mut().enumerate() {
            let t = i as f64 / fs;
            let raw = 1.0 + depth * ((2.0 * PI * f1 * t).sin() - (2.0 * PI * f2 * t).sin());
            if raw < 0.0 {
                clamped += 1;
            }
            *v += gain * carrier[i] * (0.5 * raw).max(0.0).sqrt();
        }
    }
    if clamped > 0 {
        log::debug!("STIPA modulator clamped on {clamped} band samples");
    }
    finish_signal(x, sample_rate)
}

/// Streams the 98 Full STI signals in band-major order. The seven carriers
/// are generated once and shared by all modulation frequencies of a band.
#[derive(Debug, Clone)]
pub struct FullStiGenerator {
    bank: CarrierBank,
    gains: [f64; BANDS],
    modulation_frequencies: [f64; MODULATION_FREQUENCIES],
    labels: std::vec::IntoIter<SignalLabel>,
}

impl FullStiGenerator {
    pub fn new(
        duration_per_signal: f64,
        sample_rate: u32,
        seed: u64,
        coeffs: &StandardCoefficients,
    ) -> Result<Self> {
        check_duration(duration_per_signal)?;
        require_analysis_rate(sample_rate)?;
        if duration_per_signal < FULL_STI_RECOMMENDED_DURATION_S {
            log::warn!(
                "Full STI signals of {duration_per_signal} s are shorter than the recommended {FULL_STI_RECOMMENDED_DURATION_S} s"
            );
        }
        Ok(Self {
            bank: CarrierBank::generate(duration_per_signal, sample_rate, seed, coeffs)?,
            gains: coeffs.band_gains(),
            modulation_frequencies: coeffs.modulation_frequencies,
            labels: SignalLabel::all().collect::<Vec<_>>().into_iter(),
        })
    }

    /// Signal `(band, modulation)`, both 1-based.
    pub fn signal(&self, label: SignalLabel) -> Result<LabeledSignal> {
        if !(1..=BANDS).contains(&label.band) || !(1..=MODULATION_FREQUENCIES).contains(&label.modulation)
        {
            return Err(StiError::InvalidArgument(format!(
                "no Full STI signal ({}, {})",
                label.band, label.modulation
            )));
        }
        let carrier = &self.bank.carriers[label.band - 1];
        let g = self.gains[label.band - 1];
        let fm = self.modulation_frequencies[label.modulation - 1];
        let fs = carrier.sample_rate() as f64;
        let x = carrier
            .samples()
            .iter()
            .enumerate()
            .map(|(i, &n)| g * n * full_sti_modulator(i as f64 / fs, fm))
            .collect();
        Ok(LabeledSignal {
            label,
            buffer: finish_signal(x, carrier.sample_rate())?,
        })
    }
}

impl Iterator for FullStiGenerator {
    type Item = Result<LabeledSignal>;

    fn next(&mut self) -> Option<Self::Item> {
        let label = self.labels.next()?;
        Some(self.signal(label))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.labels.size_hint()
    }
}

impl ExactSizeIterator for FullStiGenerator {}

/// Convenience wrapper returning the streaming generator.
pub fn generate_full_sti_signals(
    duration_per_signal: f64,
    sample_rate: u32,
    seed: u64,
    coeffs: &StandardCoefficients,
) -> Result<FullStiGenerator> {
    FullStiGenerator::new(duration_per_signal, sample_rate, seed, coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub duration: f64,
    pub f1: f64,
    pub f2: f64,
    /// Portion of the sweep covered by each raised-cosine fade.
    pub fade_fraction: f64,
}

impl SweepSpec {
    pub fn new(duration: f64, f1: f64, f2: f64) -> Self {
        Self {
            duration,
            f1,
            f2,
            fade_fraction: DEFAULT_FADE_FRACTION,
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let arg = |m: String| Err(StiError::InvalidArgument(m));
        if !(self.duration >= MIN_SWEEP_DURATION_S) {
            return arg(format!(
                "sweep duration {} s is below the {MIN_SWEEP_DURATION_S} s minimum",
                self.duration
            ));
        }
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.f1 > 0.0 && self.f1 < self.f2) {
            return arg(format!(
                "sweep needs 0 < f1 < f2, got f1 = {} Hz, f2 = {} Hz",
                self.f1, self.f2
            ));
        }
        if !(self.f2 <= nyquist) {
            return arg(format!(
                "sweep end {} Hz is above Nyquist ({nyquist} Hz)",
                self.f2
            ));
        }
        if !(0.0..=0.1).contains(&self.fade_fraction) {
            return arg(format!(
                "fade fraction must lie in [0, 0.1], got {}",
                self.fade_fraction
            ));
        }
        Ok(())
    }
}

/// Exponential sweep and its inverse filter. The inverse filter is the
/// time-reversed sweep with an exponentially decaying envelope, scaled so
/// that the sweep convolved with it has unit value at zero lag (index
/// `len - 1`).
pub fn generate_swept_sine(spec: &SweepSpec, sample_rate: u32) -> Result<(AudioBuffer, AudioBuffer)> {
    spec.validate(sample_rate)?;
    let fs = sample_rate as f64;
    let n = samples_for(spec.duration, sample_rate);
    let t_total = spec.duration;
    let rate = (spec.f2 / spec.f1).ln();
    let k = 2.0 * PI * spec.f1 * t_total / rate;

    let mut sweep: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            SWEEP_AMPLITUDE * (k * ((t * rate / t_total).exp() - 1.0)).sin()
        })
        .collect();

    let fade = (spec.fade_fraction * n as f64).round() as usize;
    if fade > 0 {
        for i in 0..fade.min(n) {
            let w = 0.5 * (1.0 - (PI * i as f64 / fade as f64).cos());
            sweep[i] *= w;
            sweep[n - 1 - i] *= w;
        }
    }

    let mut inverse: Vec<f64> = (0..n)
        .map(|i| sweep[n - 1 - i] * (-(i as f64 / fs) * rate / t_total).exp())
        .collect();
    let zero_lag: f64 = sweep.iter().zip(inverse.iter().rev()).map(|(a, b)| a * b).sum();
    inverse.iter_mut().for_each(|v| *v /= zero_lag);

    Ok((
        AudioBuffer::from_parts(sweep, sample_rate),
        AudioBuffer::from_parts(inverse, sample_rate),
    ))
}
