//! Report files: JSON result, MTF and MTI tables, text panel and an optional
//! PNG pixel map of the transfer ratios.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use sti_core::{StandardCoefficients, StiResult};

use crate::error::{io_error, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportFormats {
    pub json: bool,
    pub csv: bool,
    pub png: bool,
}

impl Default for ReportFormats {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
            png: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub result: StiResult,
    pub json_path: Option<PathBuf>,
    pub mtf_csv_path: Option<PathBuf>,
    pub mti_csv_path: Option<PathBuf>,
    pub text_panel: String,
    pub rendered_image_path: Option<PathBuf>,
}

pub fn text_panel(result: &StiResult) -> String {
    let mut s = format!("STI = {:.2} ({})", result.sti, result.category);
    if result.below_zero {
        s.push_str(" [raw value below zero]");
    }
    s
}

/// MTF table: one row per band, one column per modulation frequency. For
/// STIPA the two columns hold each band's lower and upper frequency; the
/// frequencies themselves are in the JSON report.
pub fn mtf_csv(result: &StiResult, coeffs: &StandardCoefficients) -> String {
    let m = &result.mtf;
    let mut out = String::from("band_hz");
    match m.scheme {
        sti_core::Scheme::FullSti => {
            for f in &m.frequencies[0] {
                let _ = write!(out, ",{f}");
            }
        }
        sti_core::Scheme::Stipa => out.push_str(",m_low,m_high"),
    }
    out.push('\n');
    for (k, row) in m.values.iter().enumerate() {
        let _ = write!(out, "{}", coeffs.band_centers[k]);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Per-band MTI with the weighting and redundancy factors, then the STI.
pub fn mti_csv(result: &StiResult, coeffs: &StandardCoefficients) -> String {
    let mut out = String::from("band_hz,mti,alpha,beta\n");
    for k in 0..sti_core::BANDS {
        let beta = coeffs.beta.get(k).map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            coeffs.band_centers[k], result.mti_per_band[k], coeffs.alpha[k], beta
        );
    }
    let _ = writeln!(out, "sti,{},,", result.sti);
    out
}

const CELL: u32 = 24;

/// Pixel map of the transfer ratios, bands from 125 Hz at the top.
pub fn render_pixel_map(result: &StiResult) -> RgbImage {
    let rows = result.mtf.values.len() as u32;
    let cols = result.mtf.values[0].len() as u32;
    RgbImage::from_fn(cols * CELL, rows * CELL, |x, y| {
        let v = result.mtf.values[(y / CELL) as usize][(x / CELL) as usize];
        colormap(v)
    })
}

/// Dark blue at 0 through teal to yellow at 1.
fn colormap(v: f64) -> Rgb<u8> {
    const STOPS: [[f64; 3]; 3] = [[20.0, 20.0, 110.0], [30.0, 150.0, 140.0], [250.0, 230.0, 40.0]];
    let v = v.clamp(0.0, 1.0) * 2.0;
    let i = (v.floor() as usize).min(1);
    let t = v - i as f64;
    let c: [u8; 3] =
        std::array::from_fn(|ch| (STOPS[i][ch] + t * (STOPS[i + 1][ch] - STOPS[i][ch])).round() as u8);
    Rgb(c)
}

/// Writes the selected report files as `<dir>/<stem>.*`.
pub fn write_report(
    result: StiResult,
    coeffs: &StandardCoefficients,
    dir: &Path,
    stem: &str,
    formats: ReportFormats,
) -> Result<ReportBundle, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let write = |name: String, text: String| -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        Ok(path)
    };

    let json_path = if formats.json {
        Some(write(format!("{stem}.sti.json"), result.to_json() + "\n")?)
    } else {
        None
    };
    let (mtf_csv_path, mti_csv_path) = if formats.csv {
        (
            Some(write(format!("{stem}.mtf.csv"), mtf_csv(&result, coeffs))?),
            Some(write(format!("{stem}.mti.csv"), mti_csv(&result, coeffs))?),
        )
    } else {
        (None, None)
    };
    let rendered_image_path = if formats.png {
        let path = dir.join(format!("{stem}.mtf.png"));
        render_pixel_map(&result)
            .save(&path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Some(path)
    } else {
        None
    };
    Ok(ReportBundle {
        text_panel: text_panel(&result),
        result,
        json_path,
        mtf_csv_path,
        mti_csv_path,
        rendered_image_path,
    })
}
