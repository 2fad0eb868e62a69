//! Inputs shared by the benchmarks.

use sti_core::{generate_stipa_signal, AudioBuffer, ImpulseResponse, StandardCoefficients};

pub const RATE: u32 = 48_000;

pub fn stipa_signal(seconds: f64) -> AudioBuffer {
    generate_stipa_signal(seconds, RATE, 1, &StandardCoefficients::builtin())
        .expect("benchmark signal")
}

/// Exponentially decaying noise-free response with reverberation time `t60`.
pub fn decay_ir(t60: f64, seconds: f64) -> ImpulseResponse {
    let n = (seconds * RATE as f64) as usize;
    let h = (0..n)
        .map(|i| (-6.9 * i as f64 / RATE as f64 / t60).exp())
        .collect();
    ImpulseResponse::new(h, RATE, 0).expect("benchmark IR")
}
