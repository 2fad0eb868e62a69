use serde::{Deserialize, Serialize};

use crate::coefficients::BANDS;
use crate::error::{Result, StiError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LevelUnit {
    Db,
    Intensity,
}

/// Seven per-band levels, either in dB or as linear intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OctaveLevels {
    pub values: [f64; BANDS],
    pub unit: LevelUnit,
}

impl OctaveLevels {
    pub fn from_db(values: [f64; BANDS]) -> Self {
        Self {
            values,
            unit: LevelUnit::Db,
        }
    }

    pub fn from_intensities(values: [f64; BANDS]) -> Self {
        Self {
            values,
            unit: LevelUnit::Intensity,
        }
    }

    /// Parses exactly seven dB values from a slice.
    pub fn try_from_db_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; BANDS] = values.try_into().map_err(|_| {
            StiError::InvalidArgument(format!(
                "expected {BANDS} octave band levels, got {}",
                values.len()
            ))
        })?;
        if arr.iter().any(|v| v.is_nan()) {
            return Err(StiError::InvalidArgument("octave level is NaN".into()));
        }
        Ok(Self::from_db(arr))
    }

    pub fn intensities(&self) -> [f64; BANDS] {
        match self.unit {
            LevelUnit::Intensity => self.values,
            LevelUnit::Db => self.values.map(db_to_intensity),
        }
    }

    pub fn db(&self) -> [f64; BANDS] {
        match self.unit {
            LevelUnit::Db => self.values,
            LevelUnit::Intensity => self.values.map(intensity_to_db),
        }
    }

    /// Band-wise intensity sum, returned in dB.
    pub fn power_sum(&self, other: &OctaveLevels) -> OctaveLevels {
        let a = self.intensities();
        let b = other.intensities();
        OctaveLevels::from_intensities(std::array::from_fn(|k| a[k] + b[k])).to_db()
    }

    pub fn to_db(&self) -> OctaveLevels {
        OctaveLevels::from_db(self.db())
    }
}

pub fn db_to_intensity(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn intensity_to_db(intensity: f64) -> f64 {
    10.0 * intensity.log10()
}
