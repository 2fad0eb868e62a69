//! Butterworth filters as cascades of second-order sections.
//!
//! Designs go through the analog prototype: poles on the unit circle in the
//! left half plane, a lowpass or bandpass frequency transform, then the
//! bilinear transform with pre-warped edge frequencies.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

/// One biquad, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = self.a[0] + self.a[1] * z_inv + self.a[2] * z2;
        num / den
    }
}

/// A cascade of biquads applied in series.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    pub sections: Vec<Biquad>,
}

impl Sos {
    /// Butterworth lowpass with `order` poles and -3 dB at `cutoff` Hz.
    pub fn butterworth_lowpass(order: usize, cutoff: f64, sample_rate: f64) -> Self {
        assert!(order > 0 && cutoff > 0.0 && cutoff < sample_rate / 2.0);
        let fs2 = 2.0 * sample_rate;
        let wc = fs2 * (PI * cutoff / sample_rate).tan();

        let mut sections = Vec::new();
        for p in prototype_poles(order) {
            if p.im < -1e-12 {
                continue;
            }
            let z = bilinear(p * wc, fs2);
            if p.im.abs() <= 1e-12 {
                // real pole: first-order section with a zero at z = -1
                sections.push(Biquad {
                    b: [1.0, 1.0, 0.0],
                    a: [1.0, -z.re, 0.0],
                });
            } else {
                sections.push(Biquad {
                    b: [1.0, 2.0, 1.0],
                    a: [1.0, -2.0 * z.re, z.norm_sqr()],
                });
            }
        }
        let mut sos = Self { sections };
        sos.normalize_at(0.0);
        sos
    }

    /// Butterworth bandpass between `low` and `high` Hz. The resulting filter
    /// order is `2 * prototype_order`; each prototype pole maps to one
    /// conjugate pole pair and therefore one section.
    pub fn butterworth_bandpass(
        prototype_order: usize,
        low: f64,
        high: f64,
        sample_rate: f64,
    ) -> Self {
        assert!(prototype_order > 0);
        assert!(0.0 < low && low < high && high < sample_rate / 2.0);
        let fs2 = 2.0 * sample_rate;
        let w1 = fs2 * (PI * low / sample_rate).tan();
        let w2 = fs2 * (PI * high / sample_rate).tan();
        let w0 = (w1 * w2).sqrt();
        let bw = w2 - w1;

        let mut sections = Vec::with_capacity(prototype_order);
        for p in prototype_poles(prototype_order) {
            // s^2 - p*bw*s + w0^2 = 0
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0 * w0).sqrt();
            for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                let z = bilinear(s, fs2);
                if z.im > 0.0 {
                    sections.push(Biquad {
                        b: [1.0, 0.0, -1.0],
                        a: [1.0, -2.0 * z.re, z.norm_sqr()],
                    });
                }
            }
        }
        assert_eq!(
            sections.len(),
            prototype_order,
            "narrowband design must give complex pole pairs"
        );
        // digital frequency that the analog centre w0 maps to
        let center = sample_rate / PI * (w0 / fs2).atan();
        let mut sos = Self { sections };
        sos.normalize_at(center / sample_rate);
        sos
    }

    /// Scales each section to unit magnitude at normalized frequency
    /// `f_norm` (cycles per sample).
    fn normalize_at(&mut self, f_norm: f64) {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f_norm);
        for s in &mut self.sections {
            let g = s.response(z_inv).norm();
            s.b.iter_mut().for_each(|b| *b /= g);
        }
    }

    /// Complex frequency response at `freq` Hz.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude_db(&self, freq: f64, sample_rate: f64) -> f64 {
        20.0 * self.response(freq, sample_rate).norm().log10()
    }

    /// Filters `input` from zero initial state.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut out = input.to_vec();
        self.filter_in_place(&mut out);
        out
    }

    pub fn filter_in_place(&self, data: &mut [f64]) {
        // transposed direct form II, one pass per section
        for s in &self.sections {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let (mut z1, mut z2) = (0.0, 0.0);
            for x in data.iter_mut() {
                let y = b0 * *x + z1;
                z1 = b1 * *x - a1 * y + z2;
                z2 = b2 * *x - a2 * y;
                *x = y;
            }
        }
    }

    /// Total number of poles.
    pub fn order(&self) -> usize {
        self.sections
            .iter()
            .map(|s| if s.a[2] == 0.0 { 1 } else { 2 })
            .sum()
    }
}

/// Left-half-plane Butterworth poles for cutoff 1 rad/s.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|i| {
            let theta = PI * (2 * i + order + 1) as f64 / (2 * order) as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

fn bilinear(s: Complex64, fs2: f64) -> Complex64 {
    (fs2 + s) / (fs2 - s)
}
