//! Bessel functions of the first kind (J0, J1) and modified Bessel functions
//! of the second kind (K0, K1) for real arguments.
//!
//! J0/J1 use the power series for small arguments and Miller's backward
//! recurrence otherwise. K0/K1 use the logarithmic series for x <= 2 and
//! Steed's continued fraction above.

use thiserror::Error;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// First zero of J0, the single-mode cutoff constant of a step-index fiber.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("{function} is undefined for x = {x}")]
    Domain { function: &'static str, x: f64 },
}

fn check_finite(function: &'static str, x: f64) -> Result<(), SpecialFunctionError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(SpecialFunctionError::Domain { function, x })
    }
}

fn check_positive(function: &'static str, x: f64) -> Result<(), SpecialFunctionError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(SpecialFunctionError::Domain { function, x })
    }
}

/// J0(x) for any finite real x.
pub fn bessel_j0(x: f64) -> Result<f64, SpecialFunctionError> {
    check_finite("J0", x)?;
    Ok(j0(x))
}

/// J1(x) for any finite real x.
pub fn bessel_j1(x: f64) -> Result<f64, SpecialFunctionError> {
    check_finite("J1", x)?;
    Ok(j1(x))
}

/// K0(x) for finite x > 0.
pub fn bessel_k0(x: f64) -> Result<f64, SpecialFunctionError> {
    check_positive("K0", x)?;
    Ok(k0(x))
}

/// K1(x) for finite x > 0.
pub fn bessel_k1(x: f64) -> Result<f64, SpecialFunctionError> {
    check_positive("K1", x)?;
    Ok(k1(x))
}

/// Unchecked J0. Returns NaN for NaN input.
pub fn j0(x: f64) -> f64 {
    j01(x.abs()).0
}

/// Unchecked J1 (odd in x).
pub fn j1(x: f64) -> f64 {
    let v = j01(x.abs()).1;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Unchecked K0 for x > 0.
pub fn k0(x: f64) -> f64 {
    k01(x).0
}

/// Unchecked K1 for x > 0.
pub fn k1(x: f64) -> f64 {
    k01(x).1
}

/// Both J0 and J1 at x >= 0.
pub fn j01(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x < 2.0 {
        j01_series(x)
    } else {
        j01_miller(x)
    }
}

/// Both K0 and K1 at x > 0.
pub fn k01(x: f64) -> (f64, f64) {
    if x.is_nan() || x <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    if x <= 2.0 {
        k01_series(x)
    } else {
        k01_steed(x)
    }
}

fn j01_series(x: f64) -> (f64, f64) {
    let y = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut s0 = 1.0;
    let mut s1 = 1.0;
    for k in 1..30 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-17 * s0.abs() && t1.abs() < 1e-17 * s1.abs() {
            break;
        }
    }
    (s0, 0.5 * x * s1)
}

fn j01_miller(x: f64) -> (f64, f64) {
    let start = 2 * ((1.1 * x) as usize / 2) + 60;
    let two_over_x = 2.0 / x;
    let mut next = 0.0;
    let mut cur = 1e-30;
    let mut norm = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order == 1 {
            j1 = cur;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    let mut t = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..40 {
        let kf = k as f64;
        if k > 0 {
            t *= y / (kf * kf);
            harmonic += 1.0 / kf;
        }
        let t1 = t / (kf + 1.0);
        let psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (kf + 1.0);
        i0 += t;
        s0 += t * harmonic;
        i1 += t1;
        s1 += t1 * psi_sum;
        if t < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + 0.5 * x * i1 * log_half - 0.25 * x * s1;
    (k0, k1)
}

fn k01_steed(x: f64) -> (f64, f64) {
    let (a, b) = k01_steed_scaled(x);
    let e = (-x).exp();
    (a * e, b * e)
}

fn k01_steed_scaled(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// Exponentially scaled pair (e^x K0(x), e^x K1(x)) for x > 0.
pub fn k01_scaled(x: f64) -> (f64, f64) {
    if x.is_nan() || x <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    if x <= 2.0 {
        let (a, b) = k01_series(x);
        let e = x.exp();
        (a * e, b * e)
    } else {
        let (a, b) = k01_steed_scaled(x);
        (a, b)
    }
}

/// Ratio K1(x)/K0(x), stable for large x where both underflow.
pub fn k1_over_k0(x: f64) -> f64 {
    let (a, b) = k01_scaled(x);
    b / a
}

/// Ratio J1(x)/J0(x).
pub fn j1_over_j0(x: f64) -> f64 {
    let (a, b) = j01(x);
    b / a
}
