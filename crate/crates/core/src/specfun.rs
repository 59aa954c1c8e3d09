//! Error function family and incomplete gamma functions.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Returns `2s` when `s` is a positive integer or half-integer.
fn twice_order(s: f64) -> Result<u32> {
    let t = 2.0 * s;
    if !(s > 0.0) || t.fract() != 0.0 || t > 400.0 {
        return Err(Error::UnsupportedGammaOrder(s));
    }
    Ok(t as u32)
}

/// Complete gamma function at a positive integer or half-integer.
pub fn gamma(s: f64) -> Result<f64> {
    let t = twice_order(s)?;
    let (mut acc, mut order) = if t % 2 == 0 { (1.0, 1.0) } else { (SQRT_PI, 0.5) };
    while order < s {
        acc *= order;
        order += 1.0;
    }
    Ok(acc)
}

/// Upper incomplete gamma `Γ(s, x)` for `x ≥ 0`.
///
/// Series for the lower function when `x < s + 1`, Lentz continued fraction otherwise.
pub fn upper_gamma(s: f64, x: f64) -> Result<f64> {
    let g = gamma(s)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("upper_gamma needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(g);
    }
    if x < s + 1.0 {
        Ok(g - lower_series(s, x))
    } else {
        Ok(upper_continued_fraction(s, x))
    }
}

/// Lower incomplete gamma `γ(s, x) = Γ(s) − Γ(s, x)` for `x ≥ 0`.
pub fn lower_gamma(s: f64, x: f64) -> Result<f64> {
    let g = gamma(s)?;
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("lower_gamma needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        Ok(lower_series(s, x))
    } else {
        Ok(g - upper_continued_fraction(s, x))
    }
}

fn prefactor(s: f64, x: f64) -> f64 {
    (s * x.ln() - x).exp()
}

fn lower_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut a = s;
    for _ in 0..1000 {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * prefactor(s, x)
}

fn upper_continued_fraction(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    prefactor(s, x) * h
}

/// `Γ(n, z) / Γ(n)` for a positive integer `n` and any complex `z`, via the finite sum
/// `e^{-z} Σ_{k<n} z^k / k!`.
pub fn regularized_upper_gamma_int(n: u32, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::UnsupportedGammaOrder(0.0));
    }
    Ok((-z).exp() * exp_partial_sum(n, z))
}

/// `Σ_{k<n} z^k / k!`.
pub fn exp_partial_sum(n: u32, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..n {
        term *= z / k as f64;
        sum += term;
    }
    sum
}

/// Upper incomplete gamma `Γ(n, z)` for integer order and complex argument.
pub fn upper_gamma_complex(s: f64, z: Complex64) -> Result<Complex64> {
    let t = twice_order(s)?;
    if t % 2 != 0 {
        return Err(Error::UnsupportedGammaOrder(s));
    }
    let n = t / 2;
    Ok(regularized_upper_gamma_int(n, z)? * gamma(s)?)
}

/// `∫_{-∞}^{∞} z^k e^{-z²/2} dz`.
pub fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut m = SQRT_2PI;
    let mut j = 1;
    while j < k {
        m *= j as f64;
        j += 2;
    }
    m
}

/// Tail moments `U_k(x) = ∫_x^∞ z^k e^{-z²/2} dz` for `k = 0..=kmax` and `x ≥ 0`.
///
/// Upward recurrence `U_k = x^{k-1} e^{-x²/2} + (k-1) U_{k-2}`; every term is nonnegative.
pub fn gaussian_tail_moments(kmax: usize, x: f64) -> Vec<f64> {
    debug_assert!(x >= 0.0);
    let mut u = vec![0.0; kmax + 1];
    let w = (-0.5 * x * x).exp();
    u[0] = (PI / 2.0).sqrt() * erfc(x / std::f64::consts::SQRT_2);
    if kmax >= 1 {
        u[1] = w;
    }
    let mut xp = 1.0;
    for k in 2..=kmax {
        xp *= x;
        u[k] = xp * w + (k as f64 - 1.0) * u[k - 2];
    }
    u
}

/// `Ψ_k(x) = ∫ sgn(x − z) z^k e^{-z²/2} dz` for `k = 0..=kmax`.
pub fn signed_gaussian_moments(kmax: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let u = gaussian_tail_moments(kmax, ax);
    (0..=kmax)
        .map(|k| {
            let v = gaussian_moment(k) - 2.0 * u[k];
            if x < 0.0 && k % 2 == 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}
