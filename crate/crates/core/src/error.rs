use thiserror::Error;

/// Errors raised while loading or validating coefficient data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("coefficient file I/O error: {0}")]
    Io(String),
    #[error("malformed coefficient data at key `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("invalid coefficients: {0}")]
    Validation(String),
}

/// Errors raised by signal generation and STI analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample rate {rate} Hz is too low for octave analysis (need at least {minimum} Hz)")]
    SampleRateTooLow { rate: u32, minimum: u32 },

    #[error("signal too short: {actual_s:.3} s, need at least {required_s:.3} s ({reason})")]
    SignalTooShort {
        actual_s: f64,
        required_s: f64,
        reason: &'static str,
    },

    #[error("envelope of band {band} has zero energy at {frequency} Hz")]
    ZeroEnvelope { band: usize, frequency: f64 },

    #[error("input modulation depth is zero in band {band} at {frequency} Hz")]
    ZeroInputDepth { band: usize, frequency: f64 },

    #[error("modulation matrices do not match: {0}")]
    SchemeMismatch(String),

    #[error("incomplete Full STI set, missing (band, modulation) labels: {}", format_labels(.0))]
    MissingSignals(Vec<(usize, usize)>),

    #[error("duplicate Full STI labels: {}", format_labels(.0))]
    DuplicateSignals(Vec<(usize, usize)>),

    #[error("generated signal peak {peak_dbfs:.2} dBFS exceeds the {limit_dbfs:.1} dBFS ceiling")]
    PeakExceeded { peak_dbfs: f64, limit_dbfs: f64 },

    #[error("no impulse found (peak to RMS ratio {ratio_db:.1} dB < 20 dB)")]
    NoImpulse { ratio_db: f64 },

    #[error("impulse response has zero energy")]
    ZeroEnergy,

    #[error(transparent)]
    Coefficients(#[from] CoefficientError),
}

fn format_labels(labels: &[(usize, usize)]) -> String {
    labels
        .iter()
        .map(|(k, m)| format!("({k}, {m})"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = StiError> = std::result::Result<T, E>;
