//! Forcing generation, Butterworth filtering and decimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Scaled uniform random forcing, `scale_f * U(lower, upper)`, generated at
/// `rate_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec<T> {
    pub scale_f: T,
    pub lower: T,
    pub upper: T,
    pub seed: u64,
    pub rate_hz: T,
}

impl<T: Real> ForcingSpec<T> {
    pub fn new(scale_f: T, seed: u64, rate_hz: T) -> Self {
        Self {
            scale_f,
            lower: T::lit(-0.5),
            upper: T::lit(0.5),
            seed,
            rate_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_f > T::zero()) {
            return Err(Error::config(format!("forcing scale must be positive, got {}", self.scale_f)));
        }
        if !(self.lower < self.upper) {
            return Err(Error::config("forcing bounds must satisfy lower < upper"));
        }
        if !(self.rate_hz > T::zero()) {
            return Err(Error::config("forcing rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    #[default]
    LowPass,
    HighPass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec<T> {
    pub cutoff_hz: T,
    pub order: usize,
    #[serde(default)]
    pub kind: FilterKind,
    /// Forward-backward filtering (squared magnitude, zero phase).
    #[serde(default)]
    pub zero_phase: bool,
}

impl<T: Real> FilterSpec<T> {
    pub fn lowpass(cutoff_hz: T, order: usize) -> Self {
        Self {
            cutoff_hz,
            order,
            kind: FilterKind::LowPass,
            zero_phase: false,
        }
    }
}

impl<T: Real> Default for FilterSpec<T> {
    fn default() -> Self {
        Self::lowpass(T::lit(3.0), 4)
    }
}

/// Draws `n` i.i.d. samples of `scale_f * U(lower, upper)`.
pub fn generate_forcing<T: Real>(spec: &ForcingSpec<T>, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::EmptyRequest("forcing sample count is zero"));
    }
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let width = spec.upper - spec.lower;
    Ok((0..n)
        .map(|_| spec.scale_f * (spec.lower + width * T::open01(&mut rng)))
        .collect())
}

/// One biquad in transposed direct form II. First-order sections have
/// `b2 = a2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<T> {
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub a1: T,
    pub a2: T,
}

impl<T: Real> Biquad<T> {
    fn run(&self, x: &mut [T]) {
        let (mut s1, mut s2) = (T::zero(), T::zero());
        for v in x.iter_mut() {
            let input = *v;
            let out = self.b0 * input + s1;
            s1 = self.b1 * input - self.a1 * out + s2;
            s2 = self.b2 * input - self.a2 * out;
            *v = out;
        }
    }

    /// Complex response `(re, im)` at normalised angular frequency `omega` (rad/sample).
    fn response(&self, omega: f64) -> (f64, f64) {
        let (c1, s1) = (omega.cos(), -omega.sin());
        let (c2, s2) = ((2.0 * omega).cos(), -(2.0 * omega).sin());
        let (b0, b1, b2) = (self.b0.as_f64(), self.b1.as_f64(), self.b2.as_f64());
        let (a1, a2) = (self.a1.as_f64(), self.a2.as_f64());
        let (nr, ni) = (b0 + b1 * c1 + b2 * c2, b1 * s1 + b2 * s2);
        let (dr, di) = (1.0 + a1 * c1 + a2 * c2, a1 * s1 + a2 * s2);
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }
}

/// Digital Butterworth filter as a cascade of second-order sections,
/// designed by the bilinear transform with cutoff pre-warping.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth<T> {
    sections: Vec<Biquad<T>>,
    zero_phase: bool,
    fs: T,
}

impl<T: Real> Butterworth<T> {
    pub fn design(spec: &FilterSpec<T>, fs: T) -> Result<Self> {
        if spec.order == 0 {
            return Err(Error::config("filter order must be at least 1"));
        }
        if !(fs > T::zero()) {
            return Err(Error::config("sample rate must be positive"));
        }
        let nyquist = fs * T::lit(0.5);
        if !(spec.cutoff_hz > T::zero() && spec.cutoff_hz < nyquist) {
            return Err(Error::config(format!(
                "cutoff {} Hz must lie in (0, {}) Hz for fs = {} Hz",
                spec.cutoff_hz, nyquist, fs
            )));
        }
        let pi = T::lit(std::f64::consts::PI);
        let k = (pi * spec.cutoff_hz / fs).tan();
        let k2 = k * k;
        let one = T::one();
        let two = T::lit(2.0);
        let n = spec.order;
        let mut sections = Vec::with_capacity(n.div_ceil(2));

        if n % 2 == 1 {
            let d = one + k;
            sections.push(match spec.kind {
                FilterKind::LowPass => Biquad { b0: k / d, b1: k / d, b2: T::zero(), a1: (k - one) / d, a2: T::zero() },
                FilterKind::HighPass => Biquad { b0: one / d, b1: -one / d, b2: T::zero(), a1: (k - one) / d, a2: T::zero() },
            });
        }
        for i in 0..n / 2 {
            // Conjugate analog pole pair; 1/Q = 2 sin(theta).
            let theta = pi * T::from_usize_lossy(2 * i + 1) / T::from_usize_lossy(2 * n);
            let inv_q = two * theta.sin();
            let d = one + k * inv_q + k2;
            let a1 = two * (k2 - one) / d;
            let a2 = (one - k * inv_q + k2) / d;
            sections.push(match spec.kind {
                FilterKind::LowPass => {
                    let b0 = k2 / d;
                    Biquad { b0, b1: two * b0, b2: b0, a1, a2 }
                }
                FilterKind::HighPass => {
                    let b0 = one / d;
                    Biquad { b0, b1: -two * b0, b2: b0, a1, a2 }
                }
            });
        }
        Ok(Self { sections, zero_phase: spec.zero_phase, fs })
    }

    pub fn sections(&self) -> &[Biquad<T>] {
        &self.sections
    }

    /// Magnitude of the single-pass frequency response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * std::f64::consts::PI * freq_hz / self.fs.as_f64();
        let mag: f64 = self
            .sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(omega);
                (re * re + im * im).sqrt()
            })
            .product();
        if self.zero_phase {
            mag * mag
        } else {
            mag
        }
    }

    pub fn apply(&self, signal: &[T]) -> Vec<T> {
        let mut out = signal.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, x: &mut [T]) {
        for s in &self.sections {
            s.run(x);
        }
        if self.zero_phase {
            x.reverse();
            for s in &self.sections {
                s.run(x);
            }
            x.reverse();
        }
    }
}

/// Butterworth filtering of `signal` sampled at `fs` Hz.
pub fn butterworth_lowpass<T: Real>(signal: &[T], spec: &FilterSpec<T>, fs: T) -> Result<Vec<T>> {
    Ok(Butterworth::design(spec, fs)?.apply(signal))
}

/// Keeps samples `0, factor, 2*factor, ...`.
pub fn decimate<T: Copy>(signal: &[T], factor: usize) -> Result<Vec<T>> {
    if factor == 0 {
        return Err(Error::config("decimation factor must be at least 1"));
    }
    if signal.is_empty() {
        return Err(Error::EmptyRequest("cannot decimate an empty signal"));
    }
    Ok(signal.iter().step_by(factor).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn steady_amplitude(fs: f64, freq: f64, filter: &Butterworth<f64>, seconds: f64) -> f64 {
        let n = (fs * seconds) as usize;
        let w = 2.0 * std::f64::consts::PI * freq / fs;
        let x: Vec<f64> = (0..n).map(|i| (w * i as f64).sin()).collect();
        let y = filter.apply(&x);
        // Least-squares sin/cos fit on the second half.
        let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, v) in y.iter().enumerate().skip(n / 2) {
            let (s, c) = (w * i as f64).sin_cos();
            ss += s * s;
            sc += s * c;
            cc += c * c;
            ys += v * s;
            yc += v * c;
        }
        let det = ss * cc - sc * sc;
        let a = (ys * cc - yc * sc) / det;
        let b = (yc * ss - ys * sc) / det;
        (a * a + b * b).sqrt()
    }

    #[test]
    fn forcing_bounds_and_moments() {
        let spec = ForcingSpec::new(10.0, 11, 1.0e5);
        let f = generate_forcing(&spec, 1_000_000).unwrap();
        assert!(f.iter().all(|&v| (-5.0..=5.0).contains(&v)));

        let spec = ForcingSpec::new(100.0, 12, 1.0e5);
        let f: Vec<f64> = generate_forcing(&spec, 1_000_000).unwrap();
        let m = crate::scalar::mean(&f);
        let v = crate::scalar::population_variance(&f);
        // Standard error of the mean is ~0.03.
        assert!(m.abs() < 0.15, "mean {m}");
        assert!((v / (1.0e4 / 12.0) - 1.0).abs() < 0.01, "var {v}");
    }

    #[test]
    fn forcing_is_seeded() {
        let spec = ForcingSpec::new(10.0, 3, 1.0e5);
        assert_eq!(generate_forcing(&spec, 100).unwrap(), generate_forcing(&spec, 100).unwrap());
        assert!(matches!(generate_forcing(&spec, 0), Err(Error::EmptyRequest(_))));
        let bad = ForcingSpec::new(-1.0, 3, 1.0e5);
        assert!(generate_forcing(&bad, 10).is_err());
    }

    #[test]
    fn dc_gain_is_unity() {
        let f = Butterworth::design(&FilterSpec::lowpass(3.0, 4), 1000.0).unwrap();
        let y = f.apply(&vec![2.5f64; 20_000]);
        assert!((y[19_999] / 2.5 - 1.0).abs() < 1e-6);
        assert!((f.magnitude(0.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_power_at_cutoff() {
        for order in 1..=6 {
            let f = Butterworth::design(&FilterSpec::lowpass(3.0, order), 1000.0).unwrap();
            let amp = steady_amplitude(1000.0, 3.0, &f, 40.0);
            assert!((amp * 2f64.sqrt() - 1.0).abs() < 0.01, "order {order}: {amp}");
        }
    }

    #[test]
    fn order_four_rolloff() {
        let f = Butterworth::design(&FilterSpec::lowpass(3.0, 4), 1000.0).unwrap();
        let amp = steady_amplitude(1000.0, 30.0, &f, 20.0);
        assert!(20.0 * amp.log10() <= -75.0, "{} dB", 20.0 * amp.log10());
    }

    #[test]
    fn highpass_blocks_dc() {
        let spec = FilterSpec { kind: FilterKind::HighPass, ..FilterSpec::lowpass(3.0, 3) };
        let f = Butterworth::design(&spec, 1000.0).unwrap();
        assert!(f.magnitude(0.0) < 1e-12);
        assert!((f.magnitude(3.0) * 2f64.sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_phase_squares_magnitude() {
        let spec = FilterSpec { zero_phase: true, ..FilterSpec::lowpass(3.0, 4) };
        let f = Butterworth::design(&spec, 1000.0).unwrap();
        assert!((f.magnitude(3.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_cutoff_above_nyquist() {
        assert!(Butterworth::design(&FilterSpec::lowpass(50.0, 4), 100.0).is_err());
        assert!(Butterworth::design(&FilterSpec::lowpass(3.0, 0), 100.0).is_err());
    }

    #[test]
    fn stable_on_long_white_noise() {
        let noise: Vec<f64> = generate_forcing(&ForcingSpec::new(1.0, 5, 1.0e5), 1_000_000).unwrap();
        let y = butterworth_lowpass(&noise, &FilterSpec::lowpass(3.0, 4), 1.0e5).unwrap();
        assert!(y.iter().all(|v| v.is_finite()));
        assert!(y.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1.0);
    }

    #[test]
    fn decimate_selects_indices() {
        assert_eq!(decimate(&[0, 1, 2, 3, 4, 5], 2).unwrap(), vec![0, 2, 4]);
        assert_eq!(decimate(&[1.0, 2.0], 1).unwrap(), vec![1.0, 2.0]);
        assert_eq!(decimate(&vec![0.0; 1_000_000], 1000).unwrap().len(), 1000);
        assert!(decimate(&[1.0], 0).is_err());
        assert!(decimate::<f64>(&[], 2).is_err());
    }

    #[test]
    fn f32_filter_designs() {
        let f = Butterworth::<f32>::design(&FilterSpec::lowpass(3.0, 4), 1000.0).unwrap();
        assert!((f.magnitude(3.0) * 2f64.sqrt() - 1.0).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn filter_is_linear(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            sx in 0u64..1000,
            sy in 1000u64..2000,
        ) {
            let x = generate_forcing(&ForcingSpec::new(1.0, sx, 1000.0), 2000).unwrap();
            let y = generate_forcing(&ForcingSpec::new(1.0, sy, 1000.0), 2000).unwrap();
            let f = Butterworth::design(&FilterSpec::lowpass(3.0, 4), 1000.0).unwrap();
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = f.apply(&combo);
            let (fx, fy) = (f.apply(&x), f.apply(&y));
            let scale = lhs.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
            for i in 0..lhs.len() {
                let rhs = a * fx[i] + b * fy[i];
                prop_assert!((lhs[i] - rhs).abs() <= 1e-10 * scale);
            }
        }

        #[test]
        fn decimation_composes(p in 1usize..12, q in 1usize..12, len in 1usize..500) {
            let x: Vec<usize> = (0..len).collect();
            let two_step = decimate(&decimate(&x, p).unwrap(), q).unwrap();
            prop_assert_eq!(two_step, decimate(&x, p * q).unwrap());
        }

        #[test]
        fn forcing_respects_bounds(scale in 0.01f64..1e4, seed in any::<u64>()) {
            let spec = ForcingSpec::new(scale, seed, 1000.0);
            let f = generate_forcing(&spec, 256).unwrap();
            prop_assert!(f.iter().all(|v| v.abs() <= 0.5 * scale));
            prop_assert_eq!(&f, &generate_forcing(&spec, 256).unwrap());
        }
    }
}
