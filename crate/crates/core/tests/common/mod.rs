//! Independent oracles shared by the integration tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// J_n(x) for n = 0, 1 from the power series summed in exact rational
/// arithmetic, so cancellation at large x costs nothing.
pub fn j_series(n: u32, x: f64) -> f64 {
    let x = BigRational::from_float(x).unwrap();
    let half = &x / BigRational::from_integer(BigInt::from(2));
    let h2 = &half * &half;
    let mut term = if n == 0 { BigRational::one() } else { half.clone() };
    let mut sum = BigRational::zero();
    let tiny = BigRational::new(BigInt::one(), BigInt::from(10).pow(40));
    let mut k = 0u32;
    loop {
        sum += &term;
        k += 1;
        term = -term * &h2 / BigRational::from_integer(BigInt::from(k * (k + n)));
        if k > 10 && term.abs() < tiny {
            break;
        }
    }
    sum.to_f64().unwrap()
}

/// Trapezoid rule over one period of the Bessel integral
/// J_n(x) = (1/π)∫₀^π cos(nτ - x sin τ) dτ; exponentially convergent.
pub fn j_quadrature(n: u32, x: f64) -> f64 {
    let m = 4096;
    let h = std::f64::consts::PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / std::f64::consts::PI
}

/// e^x K_ν(x) = ∫₀^∞ exp(-x(cosh t - 1)) cosh(νt) dt by the trapezoid rule.
pub fn k_scaled_quadrature(nu: u32, x: f64) -> f64 {
    let h = 0.005;
    let mut s = 0.5;
    let mut i = 1;
    loop {
        let t = i as f64 * h;
        let e = x * (t.cosh() - 1.0);
        if e > 800.0 {
            break;
        }
        s += (-e).exp() * (nu as f64 * t).cosh();
        i += 1;
    }
    s * h
}

pub fn grid() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=60).map(|i| 1e-3 * 10f64.powf(i as f64 * (30f64.log10() + 3.0) / 60.0)).collect();
    xs.extend([0.5, 1.0, 2.0, 2.0 + 1e-9, 2.404825557695773, 3.8317, 5.5201, 8.0, 12.5, 17.3, 25.0, 29.999]);
    xs
}
