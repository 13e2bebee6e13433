//! Generalized inverse Gaussian and inverse-gamma variates.
//!
//! GIG(p, chi, psi) has density proportional to
//! `x^(p-1) exp(-(chi/x + psi x)/2)` on `x > 0`. Sampling follows the
//! Hörmann–Leydold scheme: reduce to the two-parameter form
//! `x^(lambda-1) exp(-omega (x + 1/x)/2)` with `lambda = |p|`,
//! `omega = sqrt(chi psi)`, pick one of three rejection samplers by
//! regime, then rescale by `sqrt(chi/psi)` (inverting when `p < 0`).

use rand::Rng;

use crate::scalar::Real;

/// Inverse-gamma draw with the given shape and scale (density
/// `∝ x^(-shape-1) exp(-scale/x)`).
pub fn sample_inverse_gamma<T: Real, R: Rng + ?Sized>(shape: T, scale: T, rng: &mut R) -> T {
    let g = T::sample_gamma(shape, T::one(), rng).unwrap_or_else(T::nan);
    scale / g
}

/// One GIG(p, chi, psi) draw. Requires `chi >= 0`, `psi >= 0` and the
/// density to be proper (`chi > 0` when `p <= 0`, `psi > 0` when `p >= 0`).
/// Returns NaN for improper parameters.
pub fn sample_gig<T: Real, R: Rng + ?Sized>(p: T, chi: T, psi: T, rng: &mut R) -> T {
    T::lit(sample_gig_f64(p.as_f64(), chi.as_f64(), psi.as_f64(), rng))
}

fn unif<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    f64::open01(rng)
}

pub(crate) fn sample_gig_f64<R: Rng + ?Sized>(p: f64, chi: f64, psi: f64, rng: &mut R) -> f64 {
    if !(p.is_finite() && chi >= 0.0 && psi >= 0.0 && chi.is_finite() && psi.is_finite()) {
        return f64::NAN;
    }
    // Boundary cases reduce to gamma / inverse-gamma.
    if psi == 0.0 {
        if p < 0.0 && chi > 0.0 {
            return sample_inverse_gamma(-p, chi / 2.0, rng);
        }
        return f64::NAN;
    }
    if chi == 0.0 {
        if p > 0.0 {
            return f64::sample_gamma(p, 2.0 / psi, rng).unwrap_or(f64::NAN);
        }
        return f64::NAN;
    }

    let lambda = p.abs();
    let omega = (chi * psi).sqrt();
    let alpha = (chi / psi).sqrt();

    // Numerically negligible omega: the density is indistinguishable from
    // its gamma / inverse-gamma limit on the relevant scale.
    if omega < 1e-12 && lambda > 0.5 {
        return if p < 0.0 {
            sample_inverse_gamma(lambda, chi / 2.0, rng)
        } else {
            f64::sample_gamma(lambda, 2.0 / psi, rng).unwrap_or(f64::NAN)
        };
    }

    let x = if lambda > 2.0 || omega > 3.0 {
        rou_shift(lambda, omega, rng)
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_noshift(lambda, omega, rng)
    } else if omega > 0.0 {
        dominating_hat(lambda, omega, rng)
    } else {
        f64::NAN
    };
    let x = if x.is_finite() && x > 0.0 {
        x
    } else {
        slice_fallback(lambda, omega, rng)
    };
    if p < 0.0 {
        alpha / x
    } else {
        alpha * x
    }
}

fn gig_mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        ((lambda - 1.0).hypot(omega) + (lambda - 1.0)) / omega
    } else {
        omega / ((1.0 - lambda).hypot(omega) + (1.0 - lambda))
    }
}

/// Log of the two-parameter unnormalised density.
fn log_density(lambda: f64, omega: f64, x: f64) -> f64 {
    (lambda - 1.0) * x.ln() - 0.5 * omega * (x + 1.0 / x)
}

/// Ratio-of-uniforms without mode shift.
fn rou_noshift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + (lambda + 1.0).hypot(omega)) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    if !um.is_finite() {
        return f64::NAN;
    }
    for _ in 0..100_000 {
        let u = um * unif(rng);
        let v = unif(rng);
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
    f64::NAN
}

/// Ratio-of-uniforms with the mode shifted to the origin; bounds come from
/// the roots of a depressed cubic.
fn rou_shift<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);

    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let pp = b - a * a / 3.0;
    let qq = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
    let arg = (-qq / (2.0 * (-(pp * pp * pp) / 27.0).sqrt())).clamp(-1.0, 1.0);
    let phi = arg.acos();
    let fak = 2.0 * (-pp / 3.0).sqrt();
    let y1 = fak * (phi / 3.0).cos() - a / 3.0;
    let y2 = fak * (phi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;

    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    if !(uplus.is_finite() && uminus.is_finite() && uplus > uminus) {
        return f64::NAN;
    }
    for _ in 0..100_000 {
        let u = uminus + unif(rng) * (uplus - uminus);
        let v = unif(rng);
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
    f64::NAN
}

/// Rejection from a three-piece dominating density, for `0 <= lambda < 1`
/// and small `omega` where the density is not T-concave.
fn dominating_hat<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    let xm = gig_mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    for _ in 0..100_000 {
        let mut v = total * unif(rng);
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                let edge = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * edge).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = unif(rng) * hx;
        if u.ln() <= log_density(lambda, omega, x) {
            return x;
        }
    }
    f64::NAN
}

/// Slice sampler on `log x`, started at the mode. Only reached when the
/// rejection samplers cannot set up their envelopes.
fn slice_fallback<R: Rng + ?Sized>(lambda: f64, omega: f64, rng: &mut R) -> f64 {
    // Density of z = ln x picks up the Jacobian e^z.
    let logf = |z: f64| lambda * z - 0.5 * omega * (z.exp() + (-z).exp());
    let mut z = gig_mode(lambda, omega).ln();
    if !z.is_finite() {
        return f64::NAN;
    }
    let width = 1.0 / (lambda + omega).sqrt().max(1e-3);
    for _ in 0..64 {
        let level = logf(z) + unif(rng).ln();
        let mut lo = z - width * unif(rng);
        let mut hi = lo + width;
        while logf(lo) > level {
            lo -= width;
        }
        while logf(hi) > level {
            hi += width;
        }
        loop {
            let cand = lo + (hi - lo) * unif(rng);
            if logf(cand) > level {
                z = cand;
                break;
            }
            if cand < z {
                lo = cand;
            } else {
                hi = cand;
            }
        }
    }
    z.exp()
}
