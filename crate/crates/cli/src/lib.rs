//! Command-line front end: `gen`, `analyze` and `verify` subcommands.
//!
//! [`run`] is what the `sti` binary calls; [`run_command`] returns the
//! outcome as data for use from tests and scripts.

pub mod annex_c;
pub mod error;
pub mod report;
pub mod wav;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sti_core::siggen::{DEFAULT_FADE_FRACTION, FULL_STI_RECOMMENDED_DURATION_S};
use sti_core::{
    analyze_full_sti, analyze_impulse_response_with, analyze_stipa, deconvolve_impulse_response,
    generate_full_sti_signals, generate_stipa_signal, generate_swept_sine, AnalysisOptions,
    ImpulseResponse, IrSettings, LabeledSignal, OctaveLevels, Reference, Scheme, SignalLabel,
    StandardCoefficients, SweepSpec,
};

pub use error::CliError;
pub use report::{ReportBundle, ReportFormats};

use crate::error::io_error;
use crate::wav::{read_wav, write_wav, write_wav_float};

/// Name of the index written next to a generated Full STI set.
pub const FULL_STI_MANIFEST: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "sti", version, about = "Speech Transmission Index signals and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate test signals.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compute the STI of a recording or impulse response.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Check the implementation against external reference signals.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Args)]
pub struct GenCommon {
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 48_000)]
    pub rate: u32,
    /// Noise seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Coefficient override file (JSON).
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// STIPA test signal.
    Stipa {
        #[command(flatten)]
        common: GenCommon,
        /// Length in seconds.
        #[arg(long, default_value_t = 25.0)]
        duration: f64,
        #[arg(long, default_value = "stipa.wav")]
        out: PathBuf,
    },
    /// The 98 Full STI signals, written into a directory.
    Fullsti {
        #[command(flatten)]
        common: GenCommon,
        /// Length of each signal in seconds.
        #[arg(long, default_value_t = FULL_STI_RECOMMENDED_DURATION_S)]
        duration: f64,
        #[arg(long, default_value = "fullsti")]
        out: PathBuf,
    },
    /// Exponential sweep plus its inverse filter (`<stem>.inverse.wav`).
    Sweep {
        #[arg(long, default_value_t = 48_000)]
        rate: u32,
        #[arg(long, default_value_t = 3.0)]
        duration: f64,
        #[arg(long, default_value_t = 20.0)]
        f1: f64,
        #[arg(long, default_value_t = 20_000.0)]
        f2: f64,
        /// Fraction of the sweep covered by each fade.
        #[arg(long, default_value_t = DEFAULT_FADE_FRACTION)]
        fade: f64,
        #[arg(long, default_value = "sweep.wav")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeCommon {
    /// Seven comma-separated octave band signal levels in dB, 125 Hz first.
    #[arg(long, value_parser = parse_levels, allow_hyphen_values = true)]
    pub signal_levels: Option<OctaveLevels>,
    /// Seven comma-separated octave band noise levels in dB.
    #[arg(long, value_parser = parse_levels, allow_hyphen_values = true)]
    pub noise_levels: Option<OctaveLevels>,
    /// Skip the masking and hearing-threshold correction.
    #[arg(long)]
    pub no_auditory_effects: bool,
    /// Coefficient override file (JSON).
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Report directory (default: next to the input).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the JSON report.
    #[arg(long)]
    pub json: bool,
    /// Write the CSV tables.
    #[arg(long)]
    pub csv: bool,
    /// Also render the transfer-ratio pixel map as PNG.
    #[arg(long)]
    pub png: bool,
}

impl AnalyzeCommon {
    /// Neither `--json` nor `--csv` means both.
    pub fn formats(&self) -> ReportFormats {
        let both = !self.json && !self.csv;
        ReportFormats {
            json: self.json || both,
            csv: self.csv || both,
            png: self.png,
        }
    }

    fn options(&self, reference: Option<Reference>) -> AnalysisOptions {
        AnalysisOptions {
            reference,
            signal_levels: self.signal_levels,
            noise_levels: self.noise_levels,
            apply_auditory_effects: !self.no_auditory_effects,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Full,
    Stipa,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Full => Scheme::FullSti,
            SchemeArg::Stipa => Scheme::Stipa,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// STIPA recording.
    Stipa {
        input: PathBuf,
        /// Recording of the signal as sent, for measured input depths.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        common: AnalyzeCommon,
    },
    /// Directory of Full STI recordings named `fullsti_k{band}_m{index}.wav`.
    Fullsti {
        input: PathBuf,
        /// Directory with the signals as sent.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        common: AnalyzeCommon,
    },
    /// Impulse response, or a recorded sweep when `--inverse` is given.
    Ir {
        input: PathBuf,
        /// Inverse filter of the sweep; the input is then deconvolved first.
        #[arg(long)]
        inverse: Option<PathBuf>,
        /// Keep this many seconds after the onset.
        #[arg(long)]
        trim: Option<f64>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Full)]
        scheme: SchemeArg,
        /// Apply the noise term inside the Schroeder integral.
        #[arg(long)]
        strict_eq5: bool,
        /// Do not divide out the analysis filters' own response.
        #[arg(long)]
        no_filter_compensation: bool,
        #[command(flatten)]
        common: AnalyzeCommon,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Reference signals listed in `<dir>/annex_c.json`.
    #[command(name = "annex-c")]
    AnnexC {
        #[arg(long)]
        dir: PathBuf,
        /// Allowed |STI - expected| per case.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Coefficient override file (JSON).
        #[arg(long)]
        coeffs: Option<PathBuf>,
    },
}

fn parse_levels(s: &str) -> Result<OctaveLevels, String> {
    let values = s
        .split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .map_err(|_| format!("`{v}` is not a level in dB"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    OctaveLevels::try_from_db_slice(&values).map_err(|e| e.to_string())
}

/// One entry of the Full STI manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestEntry {
    pub file: String,
    pub band: usize,
    pub modulation: usize,
    pub band_hz: f64,
    pub modulation_hz: f64,
}

pub fn full_sti_file_name(label: SignalLabel) -> String {
    format!("fullsti_k{}_m{}.wav", label.band, label.modulation)
}

fn parse_full_sti_name(name: &str) -> Option<SignalLabel> {
    let rest = name.strip_prefix("fullsti_k")?.strip_suffix(".wav")?;
    let (band, modulation) = rest.split_once("_m")?;
    Some(SignalLabel::new(band.parse().ok()?, modulation.parse().ok()?))
}

/// Result of a successful command.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Generated(Vec<PathBuf>),
    Report(Box<ReportBundle>),
    Verified(annex_c::Verification),
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_command<I, T>(argv: I) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(cli.command)
}

/// Runs the command and prints its output. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Generated(paths)) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Ok(Outcome::Report(bundle)) => {
            println!("{}", bundle.text_panel);
            0
        }
        Ok(Outcome::Verified(v)) => {
            println!("{}", v.summary());
            if v.all_passed() {
                0
            } else {
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_coeffs(path: Option<&Path>) -> Result<StandardCoefficients, CliError> {
    Ok(StandardCoefficients::load(path)?)
}

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Gen(g) => generate(g),
        Command::Analyze(a) => analyze(a),
        Command::Verify(VerifyCommand::AnnexC {
            dir,
            tolerance,
            coeffs,
        }) => {
            let coeffs = load_coeffs(coeffs.as_deref())?;
            Ok(Outcome::Verified(annex_c::verify(&dir, tolerance, &coeffs)?))
        }
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| io_error(p, e)),
        _ => Ok(()),
    }
}

fn generate(command: GenCommand) -> Result<Outcome, CliError> {
    match command {
        GenCommand::Stipa {
            common,
            duration,
            out,
        } => {
            let coeffs = load_coeffs(common.coeffs.as_deref())?;
            let signal = generate_stipa_signal(duration, common.rate, common.seed, &coeffs)?;
            ensure_parent(&out)?;
            write_wav(&out, &signal)?;
            Ok(Outcome::Generated(vec![out]))
        }
        GenCommand::Fullsti {
            common,
            duration,
            out,
        } => {
            let coeffs = load_coeffs(common.coeffs.as_deref())?;
            let signals = generate_full_sti_signals(duration, common.rate, common.seed, &coeffs)?;
            fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
            let mut written = Vec::with_capacity(signals.len() + 1);
            let mut manifest = Vec::with_capacity(signals.len());
            for s in signals {
                let s = s?;
                let name = full_sti_file_name(s.label);
                let path = out.join(&name);
                write_wav(&path, &s.buffer)?;
                manifest.push(ManifestEntry {
                    file: name,
                    band: s.label.band,
                    modulation: s.label.modulation,
                    band_hz: coeffs.band_centers[s.label.band - 1],
                    modulation_hz: coeffs.modulation_frequencies[s.label.modulation - 1],
                });
                written.push(path);
            }
            let path = out.join(FULL_STI_MANIFEST);
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
            written.push(path);
            Ok(Outcome::Generated(written))
        }
        GenCommand::Sweep {
            rate,
            duration,
            f1,
            f2,
            fade,
            out,
        } => {
            let spec = SweepSpec {
                fade_fraction: fade,
                ..SweepSpec::new(duration, f1, f2)
            };
            let (sweep, inverse) = generate_swept_sine(&spec, rate)?;
            ensure_parent(&out)?;
            let inverse_path = out.with_file_name(format!("{}.inverse.wav", file_stem(&out)));
            write_wav(&out, &sweep)?;
            write_wav_float(&inverse_path, &inverse)?;
            Ok(Outcome::Generated(vec![out, inverse_path]))
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into())
}

/// Report directory and file stem for an input path.
fn report_target(input: &Path, out: Option<&Path>) -> (PathBuf, String) {
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => match input.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        },
    };
    (dir, file_stem(input))
}

/// Reads every `fullsti_k*_m*.wav` file of a directory.
pub fn read_full_sti_dir(dir: &Path) -> Result<Vec<LabeledSignal>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| io_error(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(label) = parse_full_sti_name(&name) {
            files.push((label, entry.path()));
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|(label, path)| {
            Ok(LabeledSignal {
                label,
                buffer: read_wav(&path)?,
            })
        })
        .collect()
}

fn analyze(command: AnalyzeCommand) -> Result<Outcome, CliError> {
    let (result, common, input) = match command {
        AnalyzeCommand::Stipa {
            input,
            reference,
            common,
        } => {
            let coeffs = load_coeffs(common.coeffs.as_deref())?;
            let received = read_wav(&input)?;
            let reference = reference
                .map(|r| read_wav(&r).map(Reference::Signal))
                .transpose()?;
            let result = analyze_stipa(&received, &common.options(reference), &coeffs)?;
            (result, common, input)
        }
        AnalyzeCommand::Fullsti {
            input,
            reference,
            common,
        } => {
            let coeffs = load_coeffs(common.coeffs.as_deref())?;
            let received = read_full_sti_dir(&input)?;
            let reference = reference
                .map(|r| read_full_sti_dir(&r).map(Reference::Set))
                .transpose()?;
            let result = analyze_full_sti(&received, &common.options(reference), &coeffs)?;
            (result, common, input)
        }
        AnalyzeCommand::Ir {
            input,
            inverse,
            trim,
            scheme,
            strict_eq5,
            no_filter_compensation,
            common,
        } => {
            let coeffs = load_coeffs(common.coeffs.as_deref())?;
            let recorded = read_wav(&input)?;
            let mut ir = match inverse {
                Some(path) => deconvolve_impulse_response(&recorded, &read_wav(&path)?)?,
                None => ImpulseResponse::from_buffer(recorded)?,
            };
            if let Some(seconds) = trim {
                ir = ir.truncated(seconds)?;
            }
            let settings = IrSettings {
                strict_eq5,
                compensate_analysis_filters: !no_filter_compensation,
            };
            let result = analyze_impulse_response_with(
                &ir,
                scheme.into(),
                &common.options(None),
                &coeffs,
                settings,
            )?;
            (result, common, input)
        }
    };
    let coeffs = load_coeffs(common.coeffs.as_deref())?;
    let (dir, stem) = report_target(&input, common.out.as_deref());
    let bundle = report::write_report(result, &coeffs, &dir, &stem, common.formats())?;
    Ok(Outcome::Report(Box::new(bundle)))
}
