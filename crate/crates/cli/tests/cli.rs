use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use sti_cli::wav::{read_wav, write_wav};
use sti_cli::{run, run_command, CliError, Outcome, ReportBundle};
use sti_core::{AudioBuffer, StiResult};

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

fn report(argv: &[&str]) -> ReportBundle {
    let mut full = vec!["sti"];
    full.extend_from_slice(argv);
    match run_command(full).unwrap() {
        Outcome::Report(b) => *b,
        other => panic!("expected a report, got {other:?}"),
    }
}

fn gen_stipa(path: &Path, duration: &str) {
    let code = run(["sti", "gen", "stipa", "--duration", duration, "--seed", "1", "--out", &s(path)]);
    assert_eq!(code, 0);
}

#[test]
fn generate_then_analyze_stipa() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    let code = run([
        "sti", "gen", "stipa", "--duration", "25", "--rate", "48000", "--seed", "1", "--out", &s(&wav),
    ]);
    assert_eq!(code, 0);
    let b = report(&["analyze", "stipa", &s(&wav)]);
    assert!(b.result.sti >= 0.98, "{}", b.result.sti);
    assert!(b.text_panel.starts_with("STI = "));
    assert_eq!(b.json_path.as_deref(), Some(dir.path().join("s.sti.json").as_path()));
    assert!(b.mtf_csv_path.unwrap().is_file());
    assert!(b.mti_csv_path.unwrap().is_file());
    assert!(b.rendered_image_path.is_none());
}

#[test]
fn level_flags_enable_both_corrections() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    gen_stipa(&wav, "12");
    let b = report(&[
        "analyze",
        "stipa",
        &s(&wav),
        "--signal-levels",
        "62,62,60,55,50,45,40",
        "--noise-levels",
        "40,38,35,30,25,22,20",
        "--json",
    ]);
    assert!(b.result.corrections_applied.ambient_noise);
    assert!(b.result.corrections_applied.auditory_effects);
    assert!(b.mtf_csv_path.is_none());
}

#[test]
fn noise_without_signal_levels_is_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    gen_stipa(&wav, "4");
    let code = run(["sti", "analyze", "stipa", &s(&wav), "--noise-levels", "1,2,3,4,5,6,7"]);
    assert_eq!(code, 3);
}

#[test]
fn missing_input_exits_two() {
    assert_eq!(run(["sti", "analyze", "ir", "missing.wav"]), 2);
    assert!(matches!(
        run_command(["sti", "analyze", "ir", "missing.wav"]),
        Err(CliError::Io(_))
    ));
}

#[test]
fn bad_level_list_exits_one() {
    assert_eq!(run(["sti", "analyze", "stipa", "x.wav", "--signal-levels", "1,2"]), 1);
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        gen_stipa(&d.join("s.wav"), "5");
        report(&["analyze", "stipa", &s(&d.join("s.wav"))]);
    }
    for name in ["s.wav", "s.sti.json", "s.mtf.csv", "s.mti.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn report_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    gen_stipa(&wav, "5");
    let out = dir.path().join("reports");
    let b = report(&["analyze", "stipa", &s(&wav), "--out", &s(&out), "--png"]);
    let text = fs::read_to_string(b.json_path.unwrap()).unwrap();
    assert!(text.contains("\"schemaVersion\": 1"));
    assert_eq!(StiResult::from_json(&text).unwrap(), b.result);
    assert!(b.rendered_image_path.unwrap().starts_with(&out));

    let csv = fs::read_to_string(b.mtf_csv_path.unwrap()).unwrap();
    let rows: Vec<_> = csv.lines().collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 3));
}

#[test]
fn full_scale_24_bit_sine_reads_back_at_unit_peak() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sine.wav");
    let x: Vec<f64> = (0..48_000)
        .map(|i| (2.0 * PI * 1000.0 * i as f64 / 48_000.0 + PI / 4.0).sin())
        .collect();
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let x: Vec<f64> = x.iter().map(|v| v / peak).collect();
    write_wav(&path, &AudioBuffer::new(x, 48_000).unwrap()).unwrap();
    let back = read_wav(&path).unwrap();
    assert!((back.peak() - 1.0).abs() <= 2f64.powi(-23), "{}", back.peak());
    assert_eq!(back.sample_rate(), 48_000);
}

fn stereo_wav(path: &Path) {
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: 44_100,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for i in 0..100 {
        w.write_sample(i as i16 * 100).unwrap();
        w.write_sample(-1000i16).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn stereo_reads_first_channel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("st.wav");
    stereo_wav(&path);
    let buf = read_wav(&path).unwrap();
    assert_eq!(buf.len(), 100);
    assert_eq!(buf.sample_rate(), 44_100);
    assert_eq!(buf.samples()[3], 300.0 / 32768.0);
}

#[test]
fn mu_law_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.wav");
    let mut bytes = b"RIFF".to_vec();
    bytes.extend_from_slice(&(4u32 + 8 + 16 + 8 + 8).to_le_bytes());
    bytes.extend_from_slice(b"WAVEfmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    for v in [7u16, 1] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&8000u32.to_le_bytes());
    bytes.extend_from_slice(&8000u32.to_le_bytes());
    for v in [1u16, 8] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&8u32.to_le_bytes());
    bytes.extend_from_slice(&[0xff; 8]);
    fs::write(&path, bytes).unwrap();
    assert_eq!(run(["sti", "analyze", "stipa", &s(&path)]), 2);
    assert!(read_wav(&path).unwrap_err().to_string().contains("mu-law"));
}

#[test]
fn sweep_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sw.wav");
    match run_command(["sti", "gen", "sweep", "--duration", "2", "--out", &s(&sweep)]).unwrap() {
        Outcome::Generated(p) => assert_eq!(p[1], dir.path().join("sw.inverse.wav")),
        other => panic!("{other:?}"),
    }
    let b = report(&[
        "analyze",
        "ir",
        &s(&sweep),
        "--inverse",
        &s(&dir.path().join("sw.inverse.wav")),
        "--scheme",
        "stipa",
        "--trim",
        "1.0",
    ]);
    assert_eq!(b.result.scheme, sti_core::Scheme::Stipa);
    assert!(b.result.sti > 0.97, "{}", b.result.sti);
}

#[test]
fn full_sti_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set");
    let written = match run_command([
        "sti", "gen", "fullsti", "--duration", "2", "--rate", "24000", "--out", &s(&set),
    ])
    .unwrap()
    {
        Outcome::Generated(p) => p,
        other => panic!("{other:?}"),
    };
    assert_eq!(written.len(), 99);
    assert!(set.join("fullsti_k1_m1.wav").is_file());
    assert!(set.join("fullsti_k7_m14.wav").is_file());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(set.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 98);

    let b = report(&["analyze", "fullsti", &s(&set), "--reference", &s(&set), "--csv"]);
    assert!(b.result.corrections_applied.reference_input_depths);
    assert!((b.result.sti - 1.0).abs() < 1e-9, "{}", b.result.sti);
    let csv = fs::read_to_string(b.mtf_csv_path.unwrap()).unwrap();
    assert!(csv.lines().skip(1).all(|r| r.split(',').count() == 15));

    fs::remove_file(set.join("fullsti_k4_m7.wav")).unwrap();
    let err = run_command(["sti", "analyze", "fullsti", &s(&set)]).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("(4, 7)"), "{err}");
}

#[test]
fn annex_c_without_fixtures_is_skipped() {
    assert_eq!(run(["sti", "verify", "annex-c", "--dir", "/nonexistent/annex-c"]), 0);
}
