use serde::{Deserialize, Serialize};

use crate::coefficients::{StandardCoefficients, BANDS};
use crate::error::{Result, StiError};

/// Which modulation frequencies each band carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Scheme {
    /// All 14 modulation frequencies in every band.
    FullSti,
    /// Two modulation frequencies per band.
    Stipa,
}

impl Scheme {
    /// Modulation frequencies of band `k` (0-based).
    pub fn band_frequencies(self, coeffs: &StandardCoefficients, k: usize) -> Vec<f64> {
        match self {
            Scheme::FullSti => coeffs.modulation_frequencies.to_vec(),
            Scheme::Stipa => coeffs.stipa_pairs[k].to_vec(),
        }
    }

    pub fn columns(self) -> usize {
        match self {
            Scheme::FullSti => crate::coefficients::MODULATION_FREQUENCIES,
            Scheme::Stipa => 2,
        }
    }
}

/// Values indexed by octave band and modulation frequency.
///
/// Used for modulation depths, transfer ratios, effective SNRs and
/// transmission indices alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModulationMatrix {
    pub scheme: Scheme,
    /// `frequencies[k][j]` is the modulation frequency of entry `(k, j)`.
    pub frequencies: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

/// Modulation depths `m_o` or `m_i`.
pub type DepthMatrix = ModulationMatrix;
/// Modulation transfer ratios `m_{k, f_m}`.
pub type MtfMatrix = ModulationMatrix;

impl ModulationMatrix {
    /// Builds a matrix for `scheme`, evaluating `f(k, j, fm)` per entry.
    pub fn try_build<F>(scheme: Scheme, coeffs: &StandardCoefficients, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, f64) -> Result<f64>,
    {
        let frequencies: Vec<Vec<f64>> = (0..BANDS)
            .map(|k| scheme.band_frequencies(coeffs, k))
            .collect();
        let mut values = Vec::with_capacity(BANDS);
        for (k, freqs) in frequencies.iter().enumerate() {
            let row = freqs
                .iter()
                .enumerate()
                .map(|(j, &fm)| f(k, j, fm))
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        Ok(Self {
            scheme,
            frequencies,
            values,
        })
    }

    pub fn filled(scheme: Scheme, coeffs: &StandardCoefficients, value: f64) -> Self {
        Self::try_build(scheme, coeffs, |_, _, _| Ok(value)).expect("infallible")
    }

    pub fn get(&self, band: usize, column: usize) -> f64 {
        self.values[band][column]
    }

    pub fn map<F: FnMut(f64) -> f64>(&self, mut f: F) -> Self {
        Self {
            scheme: self.scheme,
            frequencies: self.frequencies.clone(),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// Multiplies every entry of band `k` by `factors[k]`.
    pub fn scale_bands(&self, factors: &[f64; BANDS]) -> Self {
        let mut out = self.clone();
        for (row, &g) in out.values.iter_mut().zip(factors) {
            row.iter_mut().for_each(|v| *v *= g);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.scheme != other.scheme || self.frequencies != other.frequencies {
            return Err(StiError::SchemeMismatch(format!(
                "{:?} vs {:?}",
                self.scheme, other.scheme
            )));
        }
        Ok(())
    }
}
