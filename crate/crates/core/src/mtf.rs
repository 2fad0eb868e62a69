//! From intensity envelopes to the final index: modulation depths, transfer
//! ratios, the ambient-noise and auditory corrections, effective SNR,
//! transmission indices, per-band MTI and the weighted STI.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::coefficients::{StandardCoefficients, BANDS, MODULATION_FREQUENCIES};
use crate::error::{Result, StiError};
use crate::filterbank::{intensity_envelope, OctaveFilterBank};
use crate::levels::OctaveLevels;
use crate::matrix::{DepthMatrix, ModulationMatrix, MtfMatrix, Scheme};
use crate::result::{AnalysisMethod, CorrectionsApplied, StiResult};

/// Effective SNR is clipped to `±SNR_LIMIT_DB`.
pub const SNR_LIMIT_DB: f64 = 15.0;

/// Shortest STIPA recording accepted: two periods of 0.63 Hz.
pub const STIPA_MIN_DURATION_S: f64 = 2.0 / 0.63;
pub const STIPA_RECOMMENDED_DURATION_S: f64 = 10.0;

/// One Full STI test signal, labelled with its 1-based band and
/// modulation-frequency indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignalLabel {
    pub band: usize,
    pub modulation: usize,
}

impl SignalLabel {
    pub fn new(band: usize, modulation: usize) -> Self {
        Self { band, modulation }
    }

    /// All 98 labels, band-major.
    pub fn all() -> impl Iterator<Item = SignalLabel> {
        (1..=BANDS).flat_map(|k| (1..=MODULATION_FREQUENCIES).map(move |m| SignalLabel::new(k, m)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    pub label: SignalLabel,
    pub buffer: AudioBuffer,
}

/// Input-side signal whose measured depths replace the nominal ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// A STIPA input signal.
    Signal(AudioBuffer),
    /// A complete Full STI input set.
    Set(Vec<LabeledSignal>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub reference: Option<Reference>,
    /// Test-signal levels `I_s,k` in dB.
    pub signal_levels: Option<OctaveLevels>,
    /// Ambient-noise levels `I_n,k` in dB. Only used together with
    /// `signal_levels`.
    pub noise_levels: Option<OctaveLevels>,
    /// Apply masking and reception threshold when signal levels are known.
    pub apply_auditory_effects: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            reference: None,
            signal_levels: None,
            noise_levels: None,
            apply_auditory_effects: true,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if self.noise_levels.is_some() && self.signal_levels.is_none() {
            return Err(StiError::InvalidArgument(
                "ambient noise levels require signal levels".into(),
            ));
        }
        Ok(())
    }
}

/// Number of leading samples spanning the largest whole number of periods
/// of `fm` that fits in `len` samples.
pub fn whole_period_length(len: usize, sample_rate: u32, fm: f64) -> usize {
    // exact integer arithmetic when fm is a whole number of millihertz
    let mhz = (fm * 1000.0).round();
    if mhz > 0.0 && (fm * 1000.0 - mhz).abs() < 1e-6 {
        let mhz = mhz as u128;
        let rate_mhz = sample_rate as u128 * 1000;
        let periods = len as u128 * mhz / rate_mhz;
        return (periods * rate_mhz / mhz) as usize;
    }
    let period = sample_rate as f64 / fm;
    let periods = (len as f64 / period).floor();
    ((periods * period).floor() as usize).min(len)
}

/// Modulation depth of an intensity envelope at `fm`:
/// `2 |sum I e^{-j 2 pi fm t}| / sum I` over whole periods, truncating the
/// end of the envelope.
pub fn modulation_depth(envelope: &AudioBuffer, fm: f64) -> Result<f64> {
    depth_of(envelope.samples(), envelope.sample_rate(), fm)
}

pub(crate) fn depth_of(env: &[f64], sample_rate: u32, fm: f64) -> Result<f64> {
    if !(fm > 0.0) {
        return Err(StiError::InvalidArgument(format!(
            "modulation frequency must be positive, got {fm}"
        )));
    }
    let n = whole_period_length(env.len(), sample_rate, fm);
    if n == 0 {
        return Err(StiError::SignalTooShort {
            actual_s: env.len() as f64 / sample_rate as f64,
            required_s: 1.0 / fm,
            reason: "envelope shorter than one modulation period",
        });
    }
    let w = 2.0 * PI * fm / sample_rate as f64;
    let (mut s, mut c, mut total) = (0.0, 0.0, 0.0);
    for (i, &v) in env[..n].iter().enumerate() {
        let (sin, cos) = (w * i as f64).sin_cos();
        s += v * sin;
        c += v * cos;
        total += v;
    }
    if total <= 0.0 {
        return Err(StiError::ZeroEnvelope {
            band: 0,
            frequency: fm,
        });
    }
    Ok(2.0 * s.hypot(c) / total)
}

/// Input-side depths for [`transfer_ratios`].
#[derive(Debug, Clone, Copy)]
pub enum InputDepths<'a> {
    /// The same nominal depth everywhere: 1 for Full STI, 0.55 for STIPA.
    Nominal(f64),
    Measured(&'a DepthMatrix),
}

impl InputDepths<'_> {
    pub fn nominal_for(scheme: Scheme, coeffs: &StandardCoefficients) -> InputDepths<'static> {
        match scheme {
            Scheme::FullSti => InputDepths::Nominal(1.0),
            Scheme::Stipa => InputDepths::Nominal(coeffs.stipa_modulation_depth),
        }
    }
}

/// `m = m_o / m_i` entry-wise.
pub fn transfer_ratios(output: &DepthMatrix, input: InputDepths<'_>) -> Result<MtfMatrix> {
    let mut out = output.clone();
    for (k, row) in out.values.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mi = match input {
                InputDepths::Nominal(d) => d,
                InputDepths::Measured(m) => {
                    output.check_same_shape(m)?;
                    m.values[k][j]
                }
            };
            if mi == 0.0 {
                return Err(StiError::ZeroInputDepth {
                    band: k + 1,
                    frequency: output.frequencies[k][j],
                });
            }
            *v /= mi;
        }
    }
    Ok(out)
}

/// Entry-wise `min(m, 1)`.
pub fn limit_ratios(m: &MtfMatrix) -> MtfMatrix {
    m.map(|v| v.min(1.0))
}

/// Ambient-noise correction `m * I_s / (I_s + I_n)` per band.
pub fn apply_ambient_noise(
    m: &MtfMatrix,
    signal_levels: &OctaveLevels,
    noise_levels: &OctaveLevels,
) -> MtfMatrix {
    m.scale_bands(&ambient_noise_factors(signal_levels, noise_levels))
}

pub fn ambient_noise_factors(signal: &OctaveLevels, noise: &OctaveLevels) -> [f64; BANDS] {
    let s = signal.intensities();
    let n = noise.intensities();
    std::array::from_fn(|k| s[k] / (s[k] + n[k]))
}

/// Auditory correction `m * I_k / (I_k + I_am,k + I_rt,k)` from the total
/// (signal plus noise) band levels.
pub fn apply_auditory_effects(
    m: &MtfMatrix,
    total_levels: &OctaveLevels,
    coeffs: &StandardCoefficients,
) -> MtfMatrix {
    m.scale_bands(&auditory_factors(total_levels, coeffs))
}

pub fn auditory_factors(total: &OctaveLevels, coeffs: &StandardCoefficients) -> [f64; BANDS] {
    let intensity = total.intensities();
    std::array::from_fn(|k| {
        // no masking into the lowest band
        let masking = if k == 0 {
            0.0
        } else {
            intensity[k - 1] * crate::levels::db_to_intensity(coeffs.masking_db[k])
        };
        let threshold = crate::levels::db_to_intensity(coeffs.threshold_db[k]);
        intensity[k] / (intensity[k] + masking + threshold)
    })
}

/// `10 log10(m / (1 - m))` clipped to ±15 dB.
pub fn effective_snr(m: &MtfMatrix) -> ModulationMatrix {
    m.map(snr_of_ratio)
}

/// Clipped effective SNR of a single ratio.
pub fn snr_of_ratio(m: f64) -> f64 {
    if m <= 0.0 {
        -SNR_LIMIT_DB
    } else if m >= 1.0 {
        SNR_LIMIT_DB
    } else {
        (10.0 * (m / (1.0 - m)).log10()).clamp(-SNR_LIMIT_DB, SNR_LIMIT_DB)
    }
}

/// `(SNR + 15) / 30`.
pub fn transmission_indices(snr: &ModulationMatrix) -> ModulationMatrix {
    snr.map(|s| (s + SNR_LIMIT_DB) / (2.0 * SNR_LIMIT_DB))
}

/// Unweighted mean of each band's transmission indices.
pub fn mti_per_band(ti: &ModulationMatrix) -> [f64; BANDS] {
    std::array::from_fn(|k| {
        let row = &ti.values[k];
        row.iter().sum::<f64>() / row.len() as f64
    })
}

/// Weighted sum minus the adjacent-band redundancy terms, clipped at 1.
/// Values below zero are returned as computed; see [`StiResult::below_zero`].
pub fn sti_from_mti(mti: &[f64; BANDS], coeffs: &StandardCoefficients) -> f64 {
    let weighted: f64 = coeffs.alpha.iter().zip(mti).map(|(a, m)| a * m).sum();
    let redundancy: f64 = coeffs
        .beta
        .iter()
        .enumerate()
        .map(|(k, b)| b * (mti[k] * mti[k + 1]).sqrt())
        .sum();
    (weighted - redundancy).min(1.0)
}

/// Steps shared by every method once unlimited transfer ratios exist:
/// limiting, corrections, SNR, TI, MTI and STI.
pub fn finish_analysis(
    transfer_ratios: MtfMatrix,
    options: &AnalysisOptions,
    coeffs: &StandardCoefficients,
    method: AnalysisMethod,
    reference_used: bool,
) -> Result<StiResult> {
    finish_with(transfer_ratios, options, coeffs, method, reference_used, false)
}

/// As [`finish_analysis`]; `noise_in_ratios` marks ratios that already carry
/// the ambient-noise factor, so the step is not repeated.
pub(crate) fn finish_with(
    transfer_ratios: MtfMatrix,
    options: &AnalysisOptions,
    coeffs: &StandardCoefficients,
    method: AnalysisMethod,
    reference_used: bool,
    noise_in_ratios: bool,
) -> Result<StiResult> {
    options.validate()?;
    let mut m = limit_ratios(&transfer_ratios);
    let mut corrections = CorrectionsApplied {
        reference_input_depths: reference_used,
        ambient_noise: noise_in_ratios,
        ..Default::default()
    };

    if let (Some(signal), Some(noise), false) =
        (&options.signal_levels, &options.noise_levels, noise_in_ratios)
    {
        m = apply_ambient_noise(&m, signal, noise);
        corrections.ambient_noise = true;
    }
    if let (Some(signal), true) = (&options.signal_levels, options.apply_auditory_effects) {
        let total = match &options.noise_levels {
            Some(noise) => signal.power_sum(noise),
            None => signal.to_db(),
        };
        m = apply_auditory_effects(&m, &total, coeffs);
        corrections.auditory_effects = true;
    }

    let snr = effective_snr(&m);
    let ti = transmission_indices(&snr);
    let mti = mti_per_band(&ti);
    let sti = sti_from_mti(&mti, coeffs);
    Ok(StiResult {
        schema_version: crate::result::SCHEMA_VERSION,
        method,
        scheme: m.scheme,
        sti,
        below_zero: sti < 0.0,
        category: coeffs.category(sti).to_string(),
        mti_per_band: mti,
        ti_matrix: ti,
        snr_eff_matrix: snr,
        mtf: m,
        transfer_ratios,
        corrections_applied: corrections,
    })
}

/// Output modulation depths of a STIPA recording: octave bank, envelopes,
/// then the two depths per band.
pub fn stipa_depths(received: &AudioBuffer, coeffs: &StandardCoefficients) -> Result<DepthMatrix> {
    check_stipa_length(received)?;
    let bank = OctaveFilterBank::new(coeffs, received.sample_rate())?;
    let envelopes = (0..BANDS)
        .map(|k| intensity_envelope(&bank.filter_band(received, k)?))
        .collect::<Result<Vec<_>>>()?;
    ModulationMatrix::try_build(Scheme::Stipa, coeffs, |k, _, fm| {
        depth_in_band(&envelopes[k], k, fm)
    })
}

fn depth_in_band(envelope: &AudioBuffer, k: usize, fm: f64) -> Result<f64> {
    modulation_depth(envelope, fm).map_err(|e| match e {
        StiError::ZeroEnvelope { frequency, .. } => StiError::ZeroEnvelope {
            band: k + 1,
            frequency,
        },
        other => other,
    })
}

fn check_stipa_length(received: &AudioBuffer) -> Result<()> {
    let d = received.duration();
    if d < STIPA_MIN_DURATION_S {
        return Err(StiError::SignalTooShort {
            actual_s: d,
            required_s: STIPA_MIN_DURATION_S,
            reason: "two periods of the lowest modulation frequency",
        });
    }
    if d < STIPA_RECOMMENDED_DURATION_S {
        log::warn!("STIPA recording is {d:.1} s; at least {STIPA_RECOMMENDED_DURATION_S} s is recommended");
    }
    Ok(())
}

/// Direct-method STI from a STIPA recording.
pub fn analyze_stipa(
    received: &AudioBuffer,
    options: &AnalysisOptions,
    coeffs: &StandardCoefficients,
) -> Result<StiResult> {
    options.validate()?;
    let output = stipa_depths(received, coeffs)?;
    let (ratios, reference_used) = match &options.reference {
        None => (
            transfer_ratios(&output, InputDepths::nominal_for(Scheme::Stipa, coeffs))?,
            false,
        ),
        Some(Reference::Signal(input)) => {
            let input = stipa_depths(input, coeffs)?;
            (transfer_ratios(&output, InputDepths::Measured(&input))?, true)
        }
        Some(Reference::Set(_)) => {
            return Err(StiError::InvalidArgument(
                "STIPA analysis needs a single reference signal, not a Full STI set".into(),
            ))
        }
    };
    finish_analysis(ratios, options, coeffs, AnalysisMethod::Direct, reference_used)
}

/// Checks that `signals` holds each of the 98 labels exactly once.
pub fn check_full_set(signals: &[LabeledSignal]) -> Result<()> {
    let mut seen = std::collections::BTreeMap::new();
    for s in signals {
        *seen.entry(s.label).or_insert(0usize) += 1;
    }
    let duplicates: Vec<_> = seen
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(l, _)| (l.band, l.modulation))
        .collect();
    if !duplicates.is_empty() {
        return Err(StiError::DuplicateSignals(duplicates));
    }
    let unknown: Vec<_> = seen
        .keys()
        .filter(|l| !(1..=BANDS).contains(&l.band) || !(1..=MODULATION_FREQUENCIES).contains(&l.modulation))
        .map(|l| (l.band, l.modulation))
        .collect();
    if !unknown.is_empty() {
        return Err(StiError::InvalidArgument(format!(
            "labels outside 7 x 14: {unknown:?}"
        )));
    }
    let missing: Vec<_> = SignalLabel::all()
        .filter(|l| !seen.contains_key(l))
        .map(|l| (l.band, l.modulation))
        .collect();
    if !missing.is_empty() {
        return Err(StiError::MissingSignals(missing));
    }
    Ok(())
}

/// Output depths of a Full STI set: each signal is filtered in its own band
/// and evaluated at its own modulation frequency.
pub fn full_sti_depths(
    signals: &[LabeledSignal],
    coeffs: &StandardCoefficients,
) -> Result<DepthMatrix> {
    check_full_set(signals)?;
    let rate = signals[0].buffer.sample_rate();
    let bank = OctaveFilterBank::new(coeffs, rate)?;
    let mut depths = [[0.0; MODULATION_FREQUENCIES]; BANDS];
    for s in signals {
        let (k, j) = (s.label.band - 1, s.label.modulation - 1);
        let env = intensity_envelope(&bank.filter_band(&s.buffer, k)?)?;
        depths[k][j] = depth_in_band(&env, k, coeffs.modulation_frequencies[j])?;
    }
    ModulationMatrix::try_build(Scheme::FullSti, coeffs, |k, j, _| Ok(depths[k][j]))
}

/// Direct-method STI from the 98 Full STI recordings.
pub fn analyze_full_sti(
    received: &[LabeledSignal],
    options: &AnalysisOptions,
    coeffs: &StandardCoefficients,
) -> Result<StiResult> {
    options.validate()?;
    let output = full_sti_depths(received, coeffs)?;
    let (ratios, reference_used) = match &options.reference {
        None => (
            transfer_ratios(&output, InputDepths::nominal_for(Scheme::FullSti, coeffs))?,
            false,
        ),
        Some(Reference::Set(input)) => {
            let input = full_sti_depths(input, coeffs)?;
            (transfer_ratios(&output, InputDepths::Measured(&input))?, true)
        }
        Some(Reference::Signal(_)) => {
            return Err(StiError::InvalidArgument(
                "Full STI analysis needs a complete reference set".into(),
            ))
        }
    };
    finish_analysis(ratios, options, coeffs, AnalysisMethod::Direct, reference_used)
}
