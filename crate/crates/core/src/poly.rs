//! Dense real polynomials in the monomial basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `Σ coeffs[k] x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_monic_of_degree(&self, k: usize) -> bool {
        self.coeffs.len() == k + 1 && self.coeffs[k] == 1.0
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    #[inline]
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `p(x) e^{-v}` computed through `ln|p(x)| - v`, so large `|p|` and tiny `e^{-v}` do not
    /// overflow or underflow separately.
    pub fn eval_weighted(&self, x: f64, v: f64) -> f64 {
        let p = self.eval(x);
        if p == 0.0 || !p.is_finite() {
            return if p == 0.0 { 0.0 } else { p * (-v).exp() };
        }
        p.signum() * (p.abs().ln() - v).exp()
    }

    /// `self + s * other`, padding to the longer length.
    pub fn add_scaled(&self, other: &Poly, s: f64) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![0.0; n];
        for (i, v) in self.coeffs.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in other.coeffs.iter().enumerate() {
            c[i] += s * v;
        }
        Poly { coeffs: c }
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly { coeffs: vec![0.0] };
        }
        Poly { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_real_and_complex() {
        let p = Poly::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 24.0);
        let z = Complex64::new(0.5, -1.0);
        let expect = 1.0 - 2.0 * z + 3.0 * z * z * z;
        assert!((p.eval_complex(z) - expect).norm() < 1e-14);
        assert_eq!(p.degree(), 3);
        assert!(!p.is_monic_of_degree(3));
        assert!(Poly::monomial(4).is_monic_of_degree(4));
    }

    #[test]
    fn weighted_avoids_overflow() {
        let p = Poly::monomial(30);
        let x: f64 = 40.0;
        let v = x * x / 2.0;
        let direct = (30.0 * x.ln() - v).exp();
        assert!((p.eval_weighted(x, v) / direct - 1.0).abs() < 1e-12);
        assert_eq!(Poly::new(vec![0.0]).eval_weighted(1.0, 0.5), 0.0);
    }

    #[test]
    fn arithmetic() {
        let a = Poly::new(vec![1.0, 1.0]);
        let b = Poly::monomial(2);
        assert_eq!(a.add_scaled(&b, -2.0).coeffs, vec![1.0, 1.0, -2.0]);
        assert_eq!(b.derivative().coeffs, vec![0.0, 2.0]);
    }
}
