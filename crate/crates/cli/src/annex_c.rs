//! `verify annex-c`: replays externally supplied reference recordings and
//! compares the computed STI with the expected value of each case.
//!
//! The directory holds `annex_c.json`:
//!
//! ```json
//! {
//!   "tolerance": 0.01,
//!   "cases": [
//!     { "file": "c1.wav", "method": "stipa", "expectedSti": 0.62 },
//!     { "file": "c2.wav", "method": "ir", "scheme": "stipa", "expectedSti": 0.5,
//!       "signalLevels": [60, 60, 60, 60, 60, 60, 60],
//!       "noiseLevels": [40, 40, 40, 40, 40, 40, 40] }
//!   ]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sti_core::{
    analyze_impulse_response, analyze_stipa, AnalysisOptions, ImpulseResponse, OctaveLevels,
    Scheme, StandardCoefficients,
};

use crate::error::{io_error, CliError};
use crate::wav::read_wav;

pub const MANIFEST: &str = "annex_c.json";
pub const DEFAULT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseMethod {
    Stipa,
    Ir,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Case {
    pub file: PathBuf,
    pub method: CaseMethod,
    pub expected_sti: f64,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub signal_levels: Option<Vec<f64>>,
    #[serde(default)]
    pub noise_levels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub tolerance: Option<f64>,
    pub cases: Vec<Case>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub file: PathBuf,
    pub expected: f64,
    pub measured: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verification {
    /// No fixtures were found; nothing was run.
    Skipped(String),
    Ran {
        tolerance: f64,
        cases: Vec<CaseOutcome>,
    },
}

impl Verification {
    pub fn all_passed(&self) -> bool {
        match self {
            Verification::Skipped(_) => true,
            Verification::Ran { cases, .. } => cases.iter().all(|c| c.passed),
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Verification::Skipped(why) => format!("annex-c: skipped ({why})"),
            Verification::Ran { tolerance, cases } => {
                let mut out = String::new();
                for c in cases {
                    out.push_str(&format!(
                        "{} {}: expected {:.3}, got {:.3}, delta {:+.4}\n",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.file.display(),
                        c.expected,
                        c.measured,
                        c.measured - c.expected
                    ));
                }
                let passed = cases.iter().filter(|c| c.passed).count();
                out.push_str(&format!(
                    "annex-c: {passed}/{} within {tolerance}",
                    cases.len()
                ));
                out
            }
        }
    }
}

fn levels(v: &Option<Vec<f64>>) -> Result<Option<OctaveLevels>, CliError> {
    v.as_deref()
        .map(OctaveLevels::try_from_db_slice)
        .transpose()
        .map_err(|e| CliError::Usage(format!("{MANIFEST}: {e}")))
}

pub fn run_case(dir: &Path, case: &Case, coeffs: &StandardCoefficients) -> Result<f64, CliError> {
    let buffer = read_wav(&dir.join(&case.file))?;
    let options = AnalysisOptions {
        signal_levels: levels(&case.signal_levels)?,
        noise_levels: levels(&case.noise_levels)?,
        ..Default::default()
    };
    let result = match case.method {
        CaseMethod::Stipa => analyze_stipa(&buffer, &options, coeffs)?,
        CaseMethod::Ir => {
            let ir = ImpulseResponse::from_buffer(buffer)?;
            analyze_impulse_response(&ir, case.scheme.unwrap_or(Scheme::FullSti), &options, coeffs)?
        }
    };
    Ok(result.sti)
}

/// Runs every case in `dir`. A missing directory or manifest is a skip.
pub fn verify(
    dir: &Path,
    tolerance: Option<f64>,
    coeffs: &StandardCoefficients,
) -> Result<Verification, CliError> {
    if !dir.is_dir() {
        return Ok(Verification::Skipped(format!("{} not found", dir.display())));
    }
    let path = dir.join(MANIFEST);
    if !path.is_file() {
        return Ok(Verification::Skipped(format!("no {MANIFEST} in {}", dir.display())));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let tolerance = tolerance.or(manifest.tolerance).unwrap_or(DEFAULT_TOLERANCE);

    let mut cases = Vec::with_capacity(manifest.cases.len());
    for case in &manifest.cases {
        let measured = run_case(dir, case, coeffs)?;
        cases.push(CaseOutcome {
            file: case.file.clone(),
            expected: case.expected_sti,
            measured,
            passed: (measured - case.expected_sti).abs() <= tolerance,
        });
    }
    Ok(Verification::Ran { tolerance, cases })
}
