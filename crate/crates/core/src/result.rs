use serde::{Deserialize, Serialize};

use crate::coefficients::BANDS;
use crate::matrix::{ModulationMatrix, MtfMatrix, Scheme};

/// Version of the serialized [`StiResult`] layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AnalysisMethod {
    /// Modulated-noise test signals.
    Direct,
    /// Impulse response through the Schroeder integral.
    Indirect,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrectionsApplied {
    pub ambient_noise: bool,
    pub auditory_effects: bool,
    pub reference_input_depths: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StiResult {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub method: AnalysisMethod,
    pub scheme: Scheme,
    pub sti: f64,
    /// Set when the weighted sum came out negative. The value in `sti` is
    /// left unclipped.
    pub below_zero: bool,
    pub category: String,
    pub mti_per_band: [f64; BANDS],
    pub ti_matrix: ModulationMatrix,
    pub snr_eff_matrix: ModulationMatrix,
    /// Transfer ratios after limiting and corrections.
    pub mtf: MtfMatrix,
    /// Transfer ratios before limiting.
    pub transfer_ratios: MtfMatrix,
    pub corrections_applied: CorrectionsApplied,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl StiResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
