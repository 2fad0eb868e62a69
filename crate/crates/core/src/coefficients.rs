//! Constant tables used by the STI computation.
//!
//! The numbers live in `data/coefficients.json`, compiled into the crate.
//! A user file may override any subset of the fields; the merged set is
//! validated before use.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CoefficientError;

pub const BANDS: usize = 7;
pub const MODULATION_FREQUENCIES: usize = 14;

const BUILTIN: &str = include_str!("../data/coefficients.json");

/// Tolerance on `sum(alpha) - sum(beta) - 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// A STIPA pair frequency must lie this close (relative) to one of the
/// one-third-octave modulation frequencies.
pub const STIPA_PAIR_RELATIVE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QualificationBand {
    pub label: String,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StandardCoefficients {
    pub version: String,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
    pub band_centers: [f64; BANDS],
    pub modulation_frequencies: [f64; MODULATION_FREQUENCIES],
    pub stipa_pairs: [[f64; 2]; BANDS],
    pub band_weights_db: [f64; BANDS],
    pub alpha: [f64; BANDS],
    pub beta: [f64; BANDS - 1],
    /// Masking slope applied from band k-1 to band k. Entry 0 is unused.
    pub masking_db: [f64; BANDS],
    pub threshold_db: [f64; BANDS],
    pub stipa_modulation_depth: f64,
    pub qualification: Vec<QualificationBand>,
}

impl Default for StandardCoefficients {
    fn default() -> Self {
        Self::builtin()
    }
}

impl StandardCoefficients {
    /// The bundled male coefficient set.
    pub fn builtin() -> Self {
        let coeffs: Self =
            serde_json::from_str(BUILTIN).expect("bundled coefficient file is well-formed");
        coeffs
            .validate()
            .expect("bundled coefficient file is valid");
        coeffs
    }

    /// Built-in defaults, optionally merged field by field with an override
    /// file.
    pub fn load(override_path: Option<&Path>) -> Result<Self, CoefficientError> {
        match override_path {
            None => Ok(Self::builtin()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CoefficientError::Io(format!("{}: {e}", path.display())))?;
                Self::builtin().merged_with_json(&text)
            }
        }
    }

    /// Applies the keys present in `json` on top of `self` and validates.
    pub fn merged_with_json(&self, json: &str) -> Result<Self, CoefficientError> {
        let root: Value = serde_json::from_str(json).map_err(|e| CoefficientError::Parse {
            key: "<root>".into(),
            message: e.to_string(),
        })?;
        let Value::Object(map) = root else {
            return Err(CoefficientError::Parse {
                key: "<root>".into(),
                message: "expected a JSON object".into(),
            });
        };

        let mut out = self.clone();
        for (key, value) in map {
            match key.as_str() {
                "version" => out.version = field(&key, value)?,
                "provenance" => out.provenance = field(&key, value)?,
                "bandCenters" => out.band_centers = field(&key, value)?,
                "modulationFrequencies" => out.modulation_frequencies = field(&key, value)?,
                "stipaPairs" => out.stipa_pairs = field(&key, value)?,
                "bandWeightsDb" => out.band_weights_db = field(&key, value)?,
                "alpha" => out.alpha = field(&key, value)?,
                "beta" => out.beta = field(&key, value)?,
                "maskingDb" => out.masking_db = field(&key, value)?,
                "thresholdDb" => out.threshold_db = field(&key, value)?,
                "stipaModulationDepth" => out.stipa_modulation_depth = field(&key, value)?,
                "qualification" => out.qualification = field(&key, value)?,
                _ => {
                    return Err(CoefficientError::Parse {
                        key,
                        message: "unknown key".into(),
                    })
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coefficients serialize")
    }

    pub fn validate(&self) -> Result<(), CoefficientError> {
        let bad = |msg: String| Err(CoefficientError::Validation(msg));

        let all = self
            .band_centers
            .iter()
            .chain(&self.modulation_frequencies)
            .chain(self.stipa_pairs.iter().flatten())
            .chain(&self.band_weights_db)
            .chain(&self.alpha)
            .chain(&self.beta)
            .chain(&self.masking_db)
            .chain(&self.threshold_db);
        if all.clone().any(|x| !x.is_finite()) {
            return bad("all coefficients must be finite".into());
        }

        let weight_sum = self.alpha.iter().sum::<f64>() - self.beta.iter().sum::<f64>();
        if (weight_sum - 1.0).abs() >= WEIGHT_SUM_TOLERANCE {
            return bad(format!(
                "sum(alpha) - sum(beta) must equal 1, got {weight_sum}"
            ));
        }
        if self.alpha.iter().chain(&self.beta).any(|&w| w < 0.0) {
            return bad("alpha and beta must be non-negative".into());
        }

        if self.band_centers[0] <= 0.0 {
            return bad("band centres must be positive".into());
        }
        for w in self.band_centers.windows(2) {
            if (w[1] / w[0] - 2.0).abs() > 1e-9 {
                return bad(format!(
                    "band centres must double from band to band ({} -> {})",
                    w[0], w[1]
                ));
            }
        }

        let fm = &self.modulation_frequencies;
        if fm.windows(2).any(|w| w[1] <= w[0]) {
            return bad("modulation frequencies must be strictly increasing".into());
        }
        if fm[0] != 0.63 || fm[MODULATION_FREQUENCIES - 1] != 12.5 {
            return bad(format!(
                "modulation frequencies must run from 0.63 to 12.5 Hz, got {} to {}",
                fm[0],
                fm[MODULATION_FREQUENCIES - 1]
            ));
        }

        for (k, pair) in self.stipa_pairs.iter().enumerate() {
            if pair[0] >= pair[1] {
                return bad(format!("STIPA pair of band {} must be ascending", k + 1));
            }
            for &f in pair {
                if self.nearest_modulation_index(f).is_none() {
                    return bad(format!(
                        "STIPA frequency {f} Hz of band {} is not a one-third-octave modulation frequency",
                        k + 1
                    ));
                }
            }
        }

        if !(self.stipa_modulation_depth > 0.0 && self.stipa_modulation_depth <= 1.0) {
            return bad("STIPA modulation depth must lie in (0, 1]".into());
        }

        if self.qualification.is_empty() || self.qualification[0].lower_bound != 0.0 {
            return bad("qualification scale must start at 0".into());
        }
        if self
            .qualification
            .windows(2)
            .any(|w| w[1].lower_bound <= w[0].lower_bound)
        {
            return bad("qualification bounds must be strictly increasing".into());
        }
        Ok(())
    }

    /// Index of the one-third-octave modulation frequency matching `f`
    /// within [`STIPA_PAIR_RELATIVE_TOLERANCE`].
    pub fn nearest_modulation_index(&self, f: f64) -> Option<usize> {
        self.modulation_frequencies
            .iter()
            .position(|&m| ((f - m) / m).abs() <= STIPA_PAIR_RELATIVE_TOLERANCE)
    }

    /// Linear amplitude weights `G_k = 10^(L_k / 20)`.
    pub fn band_gains(&self) -> [f64; BANDS] {
        self.band_weights_db.map(crate::audio::db_to_amplitude)
    }

    pub fn category(&self, sti: f64) -> &str {
        self.qualification
            .iter()
            .rev()
            .find(|q| sti >= q.lower_bound)
            .unwrap_or(&self.qualification[0])
            .label
            .as_str()
    }
}

fn field<T: DeserializeOwned>(key: &str, value: Value) -> Result<T, CoefficientError> {
    serde_json::from_value(value).map_err(|e| CoefficientError::Parse {
        key: key.to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_band_centres() {
        let c = StandardCoefficients::builtin();
        assert_eq!(
            c.band_centers,
            [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0]
        );
    }

    #[test]
    fn builtin_modulation_frequencies_are_third_octave_steps() {
        let c = StandardCoefficients::builtin();
        assert_eq!(
            c.modulation_frequencies,
            [0.63, 0.8, 1.0, 1.25, 1.6, 2.0, 2.5, 3.15, 4.0, 5.0, 6.3, 8.0, 10.0, 12.5]
        );
        // 14 nominal values of 10^(n/10) for n = -2..=11, rounded to the
        // preferred-number series.
        for (n, &f) in (-2..=11).zip(c.modulation_frequencies.iter()) {
            let exact = 10f64.powf(n as f64 / 10.0);
            assert!((f / exact - 1.0).abs() < 0.02, "{f} vs {exact}");
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let c = StandardCoefficients::builtin();
        let s = c.alpha.iter().sum::<f64>() - c.beta.iter().sum::<f64>();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn doubled_alpha_is_rejected() {
        let c = StandardCoefficients::builtin();
        let alpha = c.alpha.map(|a| 2.0 * a);
        let json = serde_json::json!({ "alpha": alpha }).to_string();
        let err = c.merged_with_json(&json).unwrap_err();
        assert!(matches!(err, CoefficientError::Validation(_)), "{err}");
    }

    #[test]
    fn parse_error_names_key() {
        let c = StandardCoefficients::builtin();
        let err = c
            .merged_with_json(r#"{"thresholdDb": [1, 2, "x", 4, 5, 6, 7]}"#)
            .unwrap_err();
        assert!(
            matches!(&err, CoefficientError::Parse { key, .. } if key == "thresholdDb"),
            "{err}"
        );
        let err = c.merged_with_json(r#"{"bogus": 1}"#).unwrap_err();
        assert!(matches!(&err, CoefficientError::Parse { key, .. } if key == "bogus"));
        let err = c.merged_with_json(r#"{"alpha": [0.1, 0.2]}"#).unwrap_err();
        assert!(matches!(&err, CoefficientError::Parse { key, .. } if key == "alpha"));
    }

    #[test]
    fn partial_override_merges() {
        let c = StandardCoefficients::builtin();
        let merged = c
            .merged_with_json(r#"{"thresholdDb": [0, 0, 0, 0, 0, 0, 0]}"#)
            .unwrap();
        assert_eq!(merged.threshold_db, [0.0; BANDS]);
        assert_eq!(merged.alpha, c.alpha);
    }

    #[test]
    fn stipa_pairs_match_modulation_frequencies() {
        let c = StandardCoefficients::builtin();
        for pair in c.stipa_pairs {
            for f in pair {
                assert!(c.nearest_modulation_index(f).is_some(), "{f}");
            }
        }
    }

    #[test]
    fn categories() {
        let c = StandardCoefficients::builtin();
        assert_eq!(c.category(0.1), "bad");
        assert_eq!(c.category(0.30), "poor");
        assert_eq!(c.category(0.5), "fair");
        assert_eq!(c.category(0.72), "good");
        assert_eq!(c.category(0.75), "excellent");
        assert_eq!(c.category(-0.01), "bad");
    }
}
