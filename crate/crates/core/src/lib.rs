//! Speech Transmission Index toolkit: test-signal generation, direct
//! (modulated noise) and indirect (impulse response) analysis.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod coefficients;
pub mod convolve;
pub mod error;
pub mod filterbank;
pub mod iir;
pub mod indirect;
pub mod levels;
pub mod matrix;
pub mod mtf;
pub mod result;
pub mod siggen;

pub use audio::{AudioBuffer, MIN_ANALYSIS_RATE};
pub use coefficients::{QualificationBand, StandardCoefficients, BANDS, MODULATION_FREQUENCIES};
pub use error::{CoefficientError, Result, StiError};
pub use filterbank::{apply_octave_filter_bank, intensity_envelope, BandFilterSpec, Bandwidth, OctaveFilterBank};
pub use indirect::{
    analyze_impulse_response, analyze_impulse_response_with, deconvolve_impulse_response,
    schroeder_mtf, ImpulseResponse, IrSettings,
};
pub use levels::{LevelUnit, OctaveLevels};
pub use matrix::{DepthMatrix, ModulationMatrix, MtfMatrix, Scheme};
pub use mtf::{
    analyze_full_sti, analyze_stipa, apply_ambient_noise, apply_auditory_effects, effective_snr,
    limit_ratios, modulation_depth, mti_per_band, sti_from_mti, transfer_ratios,
    transmission_indices, AnalysisOptions, InputDepths, LabeledSignal, Reference, SignalLabel,
};
pub use result::{AnalysisMethod, CorrectionsApplied, StiResult, SCHEMA_VERSION};
pub use siggen::{
    generate_full_sti_signals, generate_pink_noise, generate_stipa_signal, generate_swept_sine,
    CarrierBank, FullStiGenerator, SweepSpec,
};
