use std::f64::consts::PI;

use proptest::prelude::*;
use sti_core::mtf::{
    ambient_noise_factors, auditory_factors, snr_of_ratio as snr, whole_period_length,
};
use sti_core::{
    modulation_depth, schroeder_mtf, sti_from_mti, AudioBuffer, ImpulseResponse, ModulationMatrix,
    OctaveLevels, Scheme, StandardCoefficients,
};

const FS: u32 = 48_000;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest sample count holding a whole number of periods of `f`, which is
/// given to the millihertz.
fn exact_period_samples(f: f64) -> usize {
    let mhz = (f * 1000.0).round() as u64;
    let rate_mhz = FS as u64 * 1000;
    let periods = mhz / gcd(mhz, rate_mhz);
    (periods * rate_mhz / mhz) as usize
}

fn envelope(a: f64, m: f64, f: f64, phi: f64) -> AudioBuffer {
    let n = exact_period_samples(f);
    assert_eq!(whole_period_length(n, FS, f), n);
    AudioBuffer::new(
        (0..n)
            .map(|i| a * (1.0 + m * (2.0 * PI * f * i as f64 / FS as f64 + phi).cos()))
            .collect(),
        FS,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn depth_is_phase_and_scale_invariant(
        m in 0.0f64..1.0,
        phi in 0.0f64..(2.0 * PI),
        a in 0.01f64..100.0,
        j in 0usize..14,
    ) {
        let c = StandardCoefficients::builtin();
        let f = c.modulation_frequencies[j];
        let env = envelope(a, m, f, phi);
        let d = modulation_depth(&env, f).unwrap();
        prop_assert!((d - m).abs() < 1e-9, "{} vs {}", d, m);
    }

    #[test]
    fn corrections_never_increase(
        s in proptest::array::uniform7(-20.0f64..120.0),
        n in proptest::array::uniform7(-20.0f64..120.0),
    ) {
        let c = StandardCoefficients::builtin();
        let signal = OctaveLevels::from_db(s);
        let noise = OctaveLevels::from_db(n);
        for f in ambient_noise_factors(&signal, &noise) {
            prop_assert!((0.0..=1.0).contains(&f));
        }
        for f in auditory_factors(&signal.power_sum(&noise), &c) {
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn snr_chain_is_monotonic(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(snr(lo) <= snr(hi));
        prop_assert!((-15.0..=15.0).contains(&snr(lo)));
    }

    #[test]
    fn schroeder_is_bounded_and_delay_invariant(
        taps in proptest::collection::vec(-1.0f64..1.0, 8..256),
        delay in 0usize..500,
        gain in 0.001f64..1000.0,
        fm in 0.5f64..13.0,
    ) {
        prop_assume!(taps.iter().any(|v| v.abs() > 1e-3));
        let ir = ImpulseResponse::from_buffer(AudioBuffer::new(taps.clone(), FS).unwrap()).unwrap();
        let m = schroeder_mtf(&ir, fm, None).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&m));

        let mut shifted = vec![0.0; delay];
        shifted.extend(taps.iter().map(|v| v * gain));
        let moved = ImpulseResponse::from_buffer(AudioBuffer::new(shifted, FS).unwrap()).unwrap();
        let m2 = schroeder_mtf(&moved, fm, None).unwrap();
        prop_assert!((m - m2).abs() < 1e-9);
    }

    #[test]
    fn uniform_mti_maps_to_itself(c in 0.0f64..=1.0) {
        let coeffs = StandardCoefficients::builtin();
        prop_assert!((sti_from_mti(&[c; 7], &coeffs) - c).abs() < 1e-9);
    }
}

#[test]
fn depth_grid_is_exact() {
    let c = StandardCoefficients::builtin();
    for step in 0..=10 {
        let m = step as f64 / 10.0;
        for &f in &c.modulation_frequencies {
            for phi in [0.0, PI / 3.0, PI] {
                let d = modulation_depth(&envelope(1.0, m, f, phi), f).unwrap();
                assert!((d - m).abs() < 1e-9, "m={m} f={f} phi={phi}: {d}");
            }
        }
    }
}

#[test]
fn decay_mtf_decreases_in_frequency_and_time() {
    let ir = |t60: f64| {
        let n = (6.0 * t60 * FS as f64) as usize;
        let h = (0..n).map(|i| (-6.9 * i as f64 / FS as f64 / t60).exp()).collect();
        ImpulseResponse::new(h, FS, 0).unwrap()
    };
    let c = StandardCoefficients::builtin();
    let irs: Vec<_> = [0.3, 0.6, 1.2, 2.4].map(ir).into_iter().collect();
    for r in &irs {
        let ms: Vec<f64> = c
            .modulation_frequencies
            .iter()
            .map(|&f| schroeder_mtf(r, f, None).unwrap())
            .collect();
        assert!(ms.windows(2).all(|w| w[1] < w[0]));
    }
    for &f in &c.modulation_frequencies {
        let ms: Vec<f64> = irs.iter().map(|r| schroeder_mtf(r, f, None).unwrap()).collect();
        assert!(ms.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn coefficients_round_trip_bit_identical() {
    let c = StandardCoefficients::builtin();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coefficients.json");
    std::fs::write(&path, c.to_json()).unwrap();
    let back = StandardCoefficients::load(Some(&path)).unwrap();
    assert_eq!(back, c);
    for (a, b) in back.alpha.iter().zip(&c.alpha) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn coefficient_sums() {
    let c = StandardCoefficients::builtin();
    let s: f64 = c.alpha.iter().sum::<f64>() - c.beta.iter().sum::<f64>();
    assert!((s - 1.0).abs() < 1e-9);
}

#[test]
fn limited_matrix_stays_in_unit_interval() {
    let c = StandardCoefficients::builtin();
    let m = ModulationMatrix::filled(Scheme::Stipa, &c, 1.7);
    assert!(sti_core::limit_ratios(&m).iter().all(|v| v == 1.0));
}
