//! SDOF oscillator with linear and cubic stiffness,
//! `m ÿ + c ẏ + k1 y + k3 y³ = F`, integrated with classic RK4 and
//! assembled into decimated task datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::{all_finite, Real};
use crate::signals::{decimate, generate_forcing, Butterworth, FilterSpec, ForcingSpec};

const NOISE_STREAM: u64 = 0x006e_6f69_7365;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams<T> {
    pub m: T,
    pub c: T,
    pub k1: T,
    pub k3: T,
}

impl<T: Real> Default for OscillatorParams<T> {
    fn default() -> Self {
        Self {
            m: T::one(),
            c: T::lit(0.2),
            k1: T::one(),
            k3: T::one(),
        }
    }
}

impl<T: Real> OscillatorParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > T::zero()) {
            return Err(Error::config("mass must be positive"));
        }
        if !(self.c >= T::zero()) {
            return Err(Error::config("damping must be non-negative"));
        }
        if !self.k1.is_finite() || !self.k3.is_finite() {
            return Err(Error::config("stiffness must be finite"));
        }
        Ok(())
    }

    /// Acceleration from the equation of motion.
    #[inline]
    pub fn acceleration(&self, y: T, ydot: T, force: T) -> T {
        (force - self.c * ydot - self.k1 * y - self.k3 * y * y * y) / self.m
    }

    /// Mechanical energy per unit mass for the undamped, unforced system.
    pub fn energy(&self, y: T, ydot: T) -> T {
        let half = T::lit(0.5);
        half * ydot * ydot + (half * self.k1 * y * y + T::lit(0.25) * self.k3 * y * y * y * y) / self.m
    }
}

/// Which signal the Butterworth filter is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FilterTarget {
    /// Filter the forcing before integration; the recorded data still obey
    /// the equation of motion exactly.
    #[default]
    Forcing,
    /// Filter displacement, velocity and acceleration after integration.
    Response,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig<T> {
    pub dt_fast: T,
    pub duration: T,
    pub decimation: usize,
    pub filter: FilterSpec<T>,
    pub filter_target: FilterTarget,
    pub initial_state: (T, T),
    pub measurement_noise_std: T,
    #[serde(default)]
    pub trim_seconds: T,
}

impl<T: Real> Default for SimulationConfig<T> {
    fn default() -> Self {
        Self {
            dt_fast: T::lit(1e-5),
            duration: T::lit(10.0),
            decimation: 1000,
            filter: FilterSpec::default(),
            filter_target: FilterTarget::Forcing,
            initial_state: (T::zero(), T::zero()),
            measurement_noise_std: T::zero(),
            trim_seconds: T::zero(),
        }
    }
}

impl<T: Real> SimulationConfig<T> {
    /// Number of fast-rate samples, `duration / dt_fast`.
    pub fn fast_samples(&self) -> Result<usize> {
        if !(self.dt_fast > T::zero()) || !(self.duration > T::zero()) {
            return Err(Error::config("dt_fast and duration must be positive"));
        }
        let ratio = (self.duration / self.dt_fast).as_f64();
        let n = ratio.round();
        if (ratio - n).abs() > 1e-6 * n.max(1.0) || n < 2.0 {
            return Err(Error::config(format!(
                "duration / dt_fast = {ratio} is not an integer sample count >= 2"
            )));
        }
        Ok(n as usize)
    }

    pub fn fast_rate_hz(&self) -> T {
        T::one() / self.dt_fast
    }

    pub fn effective_rate_hz(&self) -> T {
        T::one() / (self.dt_fast * T::from_usize_lossy(self.decimation))
    }

    pub fn validate(&self) -> Result<()> {
        self.fast_samples()?;
        if self.decimation == 0 {
            return Err(Error::config("decimation must be at least 1"));
        }
        if !(self.measurement_noise_std >= T::zero()) {
            return Err(Error::config("measurement noise std must be non-negative"));
        }
        if !(self.trim_seconds >= T::zero()) || self.trim_seconds >= self.duration {
            return Err(Error::config("trim must lie in [0, duration)"));
        }
        Ok(())
    }
}

/// Fast-rate RK4 trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub y: Vec<T>,
    pub ydot: Vec<T>,
    pub yddot: Vec<T>,
}

/// One task's decimated time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    pub t: Vec<T>,
    pub y: Vec<T>,
    pub ydot: Vec<T>,
    pub yddot: Vec<T>,
    pub force: Vec<T>,
    pub fs: T,
    pub label: String,
}

impl<T: Real> Dataset<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n == 0 {
            return Err(Error::EmptyRequest("dataset has no samples"));
        }
        for (name, s) in [("y", &self.y), ("ydot", &self.ydot), ("yddot", &self.yddot), ("F", &self.force)] {
            if s.len() != n {
                return Err(Error::Dimension(format!("series {name} has length {} but t has {n}", s.len())));
            }
            if !all_finite(s) {
                return Err(Error::config(format!("series {name} contains non-finite values")));
            }
        }
        if !all_finite(&self.t) || !(self.fs > T::zero()) {
            return Err(Error::config("time stamps or sample rate invalid"));
        }
        let step = T::one() / self.fs;
        let tol = step * T::lit(1e-6);
        for w in self.t.windows(2) {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - step).abs() > tol {
                return Err(Error::config("time stamps must be uniformly spaced at 1/fs"));
            }
        }
        Ok(())
    }

    /// Appends another dataset's rows (time stamps are kept as-is).
    pub fn concat(&self, other: &Dataset<T>) -> Dataset<T> {
        let join = |a: &[T], b: &[T]| a.iter().chain(b).copied().collect::<Vec<_>>();
        Dataset {
            t: join(&self.t, &other.t),
            y: join(&self.y, &other.y),
            ydot: join(&self.ydot, &other.ydot),
            yddot: join(&self.yddot, &other.yddot),
            force: join(&self.force, &other.force),
            fs: self.fs,
            label: format!("{}+{}", self.label, other.label),
        }
    }

    /// RMS of `ÿ - (F - c ẏ - k1 y - k3 y³)/m`.
    pub fn ode_residual_rms(&self, params: &OscillatorParams<T>) -> T {
        let r: Vec<T> = (0..self.len())
            .map(|i| self.yddot[i] - params.acceleration(self.y[i], self.ydot[i], self.force[i]))
            .collect();
        crate::scalar::rms(&r)
    }
}

/// Classic fourth-order Runge–Kutta with the forcing linearly interpolated
/// at the half step. Returns states at every forcing sample.
pub fn rk4_integrate<T: Real>(
    params: &OscillatorParams<T>,
    forcing: &[T],
    dt: T,
    initial_state: (T, T),
) -> Result<Trajectory<T>> {
    params.validate()?;
    if forcing.len() < 2 {
        return Err(Error::config("forcing must contain at least two samples"));
    }
    if !(dt > T::zero()) {
        return Err(Error::config("integration step must be positive"));
    }
    let n = forcing.len();
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    let (mut y, mut v) = initial_state;
    let mut out = Trajectory {
        y: Vec::with_capacity(n),
        ydot: Vec::with_capacity(n),
        yddot: Vec::with_capacity(n),
    };
    for i in 0..n {
        let f0 = forcing[i];
        let a0 = params.acceleration(y, v, f0);
        if !(y.is_finite() && v.is_finite() && a0.is_finite()) {
            return Err(Error::Divergence {
                index: i,
                time: (dt * T::from_usize_lossy(i)).as_f64(),
            });
        }
        out.y.push(y);
        out.ydot.push(v);
        out.yddot.push(a0);
        if i + 1 == n {
            break;
        }
        let f1 = forcing[i + 1];
        let fm = (f0 + f1) * half;
        let h2 = dt * half;

        let (k1y, k1v) = (v, a0);
        let (k2y, k2v) = (v + h2 * k1v, params.acceleration(y + h2 * k1y, v + h2 * k1v, fm));
        let (k3y, k3v) = (v + h2 * k2v, params.acceleration(y + h2 * k2y, v + h2 * k2v, fm));
        let (k4y, k4v) = (v + dt * k3v, params.acceleration(y + dt * k3y, v + dt * k3v, f1));

        y = y + dt * sixth * (k1y + two * k2y + two * k3y + k4y);
        v = v + dt * sixth * (k1v + two * k2v + two * k3v + k4v);
    }
    Ok(out)
}

/// forcing -> optional filter -> RK4 -> decimation -> optional measurement
/// noise on ÿ.
pub fn simulate_dataset<T: Real>(
    params: &OscillatorParams<T>,
    forcing_spec: &ForcingSpec<T>,
    sim: &SimulationConfig<T>,
) -> Result<Dataset<T>> {
    params.validate()?;
    sim.validate()?;
    forcing_spec.validate()?;
    let fast_fs = sim.fast_rate_hz();
    if ((forcing_spec.rate_hz - fast_fs) / fast_fs).abs() > T::lit(1e-9) {
        return Err(Error::config(format!(
            "forcing rate {} Hz does not match integration rate {} Hz",
            forcing_spec.rate_hz, fast_fs
        )));
    }
    let n = sim.fast_samples()?;
    let mut force = generate_forcing(forcing_spec, n)?;

    let filter = match sim.filter_target {
        crate::simulator::FilterTarget::None => None,
        _ => Some(Butterworth::design(&sim.filter, fast_fs)?),
    };
    if let (Some(f), FilterTarget::Forcing) = (&filter, sim.filter_target) {
        f.apply_in_place(&mut force);
    }

    let mut traj = rk4_integrate(params, &force, sim.dt_fast, sim.initial_state)?;
    if let (Some(f), FilterTarget::Response) = (&filter, sim.filter_target) {
        f.apply_in_place(&mut traj.y);
        f.apply_in_place(&mut traj.ydot);
        f.apply_in_place(&mut traj.yddot);
    }

    let t_fast: Vec<T> = (0..n).map(|i| sim.dt_fast * T::from_usize_lossy(i)).collect();
    let q = sim.decimation;
    let mut data = Dataset {
        t: decimate(&t_fast, q)?,
        y: decimate(&traj.y, q)?,
        ydot: decimate(&traj.ydot, q)?,
        yddot: decimate(&traj.yddot, q)?,
        force: decimate(&force, q)?,
        fs: sim.effective_rate_hz(),
        label: format!("f={}", forcing_spec.scale_f),
    };

    if sim.trim_seconds > T::zero() {
        let start = data.t.iter().position(|&t| t >= sim.trim_seconds).unwrap_or(data.t.len());
        for s in [&mut data.t, &mut data.y, &mut data.ydot, &mut data.yddot, &mut data.force] {
            s.drain(..start);
        }
    }

    if sim.measurement_noise_std > T::zero() {
        let mut rng = rng_from_seed(derive_seed(forcing_spec.seed, &[NOISE_STREAM]));
        for a in data.yddot.iter_mut() {
            *a = *a + sim.measurement_noise_std * T::standard_normal(&mut rng);
        }
    }

    data.validate()?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> OscillatorParams<f64> {
        OscillatorParams { m: 1.0, c: 0.0, k1: 1.0, k3: 0.0 }
    }

    fn free_response_error(dt: f64) -> f64 {
        let t_end = 2.0 * std::f64::consts::PI;
        let steps = (t_end / dt).round() as usize;
        let dt = t_end / steps as f64;
        let traj = rk4_integrate(&linear(), &vec![0.0; steps + 1], dt, (1.0, 0.0)).unwrap();
        // Exact state after one period is (1, 0).
        (traj.y[steps] - 1.0).abs().max(traj.ydot[steps].abs())
    }

    #[test]
    fn equilibrium_stays_at_rest() {
        let traj = rk4_integrate(&OscillatorParams::default(), &vec![0.0; 1000], 1e-3, (0.0, 0.0)).unwrap();
        assert!(traj.y.iter().chain(&traj.ydot).chain(&traj.yddot).all(|&v| v == 0.0));
    }

    #[test]
    fn linear_oscillator_returns_after_one_period() {
        assert!(free_response_error(1e-3) < 1e-6);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let e4 = free_response_error(4e-3);
        let e2 = free_response_error(2e-3);
        let e1 = free_response_error(1e-3);
        for ratio in [e4 / e2, e2 / e1] {
            assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
        }
    }

    #[test]
    fn acceleration_is_exact_rhs() {
        let p = OscillatorParams::default();
        let f: Vec<f64> = (0..500).map(|i| (i as f64 * 0.01).sin()).collect();
        let traj = rk4_integrate(&p, &f, 1e-2, (0.3, -0.1)).unwrap();
        for (i, &fi) in f.iter().enumerate() {
            assert_eq!(traj.yddot[i], p.acceleration(traj.y[i], traj.ydot[i], fi));
        }
    }

    #[test]
    fn divergence_is_reported() {
        let p = OscillatorParams { m: 1.0, c: 0.0, k1: 1.0, k3: 1.0 };
        let err = rk4_integrate(&p, &vec![0.0; 200], 1.0, (1e3, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn invalid_inputs() {
        assert!(rk4_integrate(&linear(), &[0.0], 1e-3, (0.0, 0.0)).is_err());
        assert!(rk4_integrate(&linear(), &[0.0, 0.0], 0.0, (0.0, 0.0)).is_err());
        let bad = OscillatorParams { m: 0.0, ..linear() };
        assert!(rk4_integrate(&bad, &[0.0, 0.0], 1e-3, (0.0, 0.0)).is_err());
    }

    #[test]
    fn rate_mismatch_is_rejected() {
        let sim = SimulationConfig::<f64> { duration: 0.1, ..Default::default() };
        let spec = ForcingSpec::new(10.0, 1, 1.0e4);
        assert!(simulate_dataset(&OscillatorParams::default(), &spec, &sim).is_err());
    }

    #[test]
    fn non_integer_sample_count_rejected() {
        let sim = SimulationConfig::<f64> { duration: 1.0, dt_fast: 0.3, ..Default::default() };
        assert!(sim.fast_samples().is_err());
    }

    #[test]
    fn trim_and_noise() {
        let sim = SimulationConfig::<f64> {
            duration: 1.0,
            decimation: 100,
            trim_seconds: 0.5,
            measurement_noise_std: 0.01,
            ..Default::default()
        };
        let spec = ForcingSpec::new(100.0, 9, 1.0e5);
        let d = simulate_dataset(&OscillatorParams::default(), &spec, &sim).unwrap();
        assert_eq!(d.len(), 500);
        assert!((d.t[0] - 0.5).abs() < 1e-12);
        let r = d.ode_residual_rms(&OscillatorParams::default());
        assert!(r > 0.005 && r < 0.02, "noise rms {r}");
    }
}
