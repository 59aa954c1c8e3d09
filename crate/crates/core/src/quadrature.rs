//! Composite Gauss-Legendre quadrature on truncated lines and the upper half plane.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::sync::OnceLock;

/// Points per Gauss-Legendre panel.
pub const GL_ORDER: usize = 20;
/// Panel width before refinement.
const BASE_PANEL: f64 = 1.0;
/// Number of panel doublings tried before giving up.
const MAX_LEVEL: u32 = 6;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Region a rule was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite { a: f64, b: f64 },
    /// `[a, ∞)` truncated at `a + radius`.
    HalfLine { a: f64, radius: f64 },
    /// `(-∞, ∞)` truncated to `[-radius, radius]`.
    Line { radius: f64 },
}

impl Domain {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Finite { a, b } => (a, b),
            Domain::HalfLine { a, radius } => (a, a + radius),
            Domain::Line { radius } => (-radius, radius),
        }
    }
}

/// Fixed one-dimensional rule: nodes, positive weights and the domain they cover.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: Domain,
}

impl QuadratureRule {
    /// Composite rule over `domain` with panels of width at most `panel`, split at `breakpoints`.
    pub fn composite(domain: Domain, breakpoints: &[f64], panel: f64) -> Result<Self> {
        let (a, b) = domain.bounds();
        if !(a < b) || !a.is_finite() || !b.is_finite() || !(panel > 0.0) {
            return Err(Error::InvalidArgument(format!("bad quadrature interval [{a}, {b}]")));
        }
        let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let (gx, gw) = base_rule();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for seg in cuts.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            let m = ((hi - lo) / panel).ceil().max(1.0) as usize;
            let h = (hi - lo) / m as f64;
            for p in 0..m {
                let c = lo + (p as f64 + 0.5) * h;
                for (x, w) in gx.iter().zip(gw) {
                    nodes.push(c + 0.5 * h * x);
                    weights.push(0.5 * h * w);
                }
            }
        }
        Ok(Self { nodes, weights, domain })
    }

    pub fn integrate<T: Scalar>(&self, f: impl Fn(f64) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }
}

/// Truncation radius for integrands bounded by `|x|^degree e^{-x²/2}`.
pub fn gaussian_radius(degree: usize) -> f64 {
    let mut t = 10f64.max((2.0 * (degree as f64 + 10.0) * 10f64.ln()).sqrt());
    while (-0.5 * t * t + degree as f64 * t.ln()).exp() > 1e-16 {
        t += 0.5;
    }
    t
}

/// Truncation and kink description for [`integrate_line`].
#[derive(Debug, Clone, PartialEq)]
pub struct LineDecay {
    pub radius: f64,
    pub breakpoints: Vec<f64>,
}

impl LineDecay {
    /// Gaussian-type weight against a polynomial of the given degree.
    pub fn gaussian(degree: usize) -> Self {
        Self { radius: gaussian_radius(degree), breakpoints: Vec::new() }
    }

    pub fn radius(radius: f64) -> Self {
        Self { radius, breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(points);
        self
    }
}

fn refine<T: Scalar>(tol: f64, mut at_level: impl FnMut(u32) -> Result<T>) -> Result<T> {
    let mut prev = at_level(0)?;
    let mut estimate = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        let next = at_level(level)?;
        estimate = (next - prev).modulus();
        if !next.is_finite_value() {
            break;
        }
        if estimate <= tol.max(4.0 * f64::EPSILON * next.modulus()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNonConvergence { estimate, tol })
}

/// `∫_a^b f` by composite Gauss-Legendre with panel doubling until two levels agree to `tol`.
pub fn integrate_interval<T: Scalar>(f: impl Fn(f64) -> T, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let v = refine(tol, |level| {
        let rule = QuadratureRule::composite(Domain::Finite { a: lo, b: hi }, breakpoints, BASE_PANEL / (1u32 << level) as f64)?;
        Ok(rule.integrate(&f))
    })?;
    Ok(v * sign)
}

/// `∫_ℝ f` truncated to `[-radius, radius]` as described by `decay`.
pub fn integrate_line<T: Scalar>(f: impl Fn(f64) -> T, decay: &LineDecay, tol: f64) -> Result<T> {
    integrate_interval(f, -decay.radius, decay.radius, &decay.breakpoints, tol)
}

/// Truncation of the upper half plane `{x + iy : y > 0}` for [`integrate_halfplane`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneDecay {
    pub radius_x: f64,
    pub radius_y: f64,
}

impl PlaneDecay {
    /// Integrands bounded by `|w|^degree e^{-x²-y²}` (the `e^{y²-x²} erfc(√2 y)` weight).
    pub fn gaussian(degree: usize) -> Self {
        let r = gaussian_radius(degree);
        Self { radius_x: r, radius_y: r.min(12.0) }
    }
}

/// Tensor-product nodes `(x, y, weight)` for the truncated half plane at refinement `level`.
pub fn halfplane_nodes(decay: &PlaneDecay, level: u32) -> Result<Vec<(f64, f64, f64)>> {
    let h = BASE_PANEL / (1u32 << level) as f64;
    let rx = QuadratureRule::composite(Domain::Line { radius: decay.radius_x }, &[], h)?;
    let ry = QuadratureRule::composite(Domain::HalfLine { a: 0.0, radius: decay.radius_y }, &[], h)?;
    let mut out = Vec::with_capacity(rx.nodes.len() * ry.nodes.len());
    for (&x, &wx) in rx.nodes.iter().zip(&rx.weights) {
        for (&y, &wy) in ry.nodes.iter().zip(&ry.weights) {
            out.push((x, y, wx * wy));
        }
    }
    Ok(out)
}

/// `∫_{y>0} f(x, y) dx dy` by a tensor-product rule with one panel doubling per level.
pub fn integrate_halfplane<T: Scalar>(f: impl Fn(f64, f64) -> T, decay: &PlaneDecay, tol: f64) -> Result<T> {
    refine(tol, |level| {
        if level > 2 {
            return Err(Error::QuadratureNonConvergence { estimate: f64::NAN, tol });
        }
        Ok(halfplane_nodes(decay, level)?.iter().map(|&(x, y, w)| f(x, y) * w).sum())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{erf, SQRT_2PI};
    use std::f64::consts::PI;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(GL_ORDER);
        assert!(w.iter().all(|&v| v > 0.0));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| x.powi(8) * w).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn constant_over_finite_interval() {
        let r = QuadratureRule::composite(Domain::Finite { a: -1.3, b: 2.9 }, &[0.1], 1.0).unwrap();
        assert!(r.nodes.len() >= 2);
        assert!((r.integrate(|_| 1.0) - 4.2).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integrals() {
        let d = LineDecay::gaussian(2);
        let i0 = integrate_line(|x| (-0.5 * x * x).exp(), &d, 1e-13).unwrap();
        let i2 = integrate_line(|x| x * x * (-0.5 * x * x).exp(), &d, 1e-13).unwrap();
        assert!((i0 - SQRT_2PI).abs() < 1e-12);
        assert!((i2 - SQRT_2PI).abs() < 1e-12);
    }

    #[test]
    fn sign_kink_with_breakpoint() {
        let d = LineDecay::gaussian(0).with_breakpoints(&[0.3]);
        let v = integrate_line(|x: f64| (x - 0.3).signum() * (-0.5 * x * x).exp(), &d, 1e-13).unwrap();
        let expect = -SQRT_2PI * erf(0.3 / 2f64.sqrt());
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn halfplane_gaussian() {
        let d = PlaneDecay::gaussian(0);
        let v = integrate_halfplane(|x, y| (-x * x - y * y).exp(), &d, 1e-11).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-10);
        assert_eq!(integrate_halfplane(|_, _| 0.0, &d, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let f = |x: f64| x.cos();
        let a = integrate_interval(f, 0.0, 1.0, &[], 1e-13).unwrap();
        let b = integrate_interval(f, 1.0, 0.0, &[], 1e-13).unwrap();
        assert!((a - 1f64.sin()).abs() < 1e-14);
        assert_eq!(a, -b);
    }

    #[test]
    fn reports_nonconvergence() {
        let err = integrate_interval(|x: f64| if x > 0.123456 { 1.0 } else { 0.0 }, 0.0, 1.0, &[], 1e-14);
        assert!(matches!(err, Err(Error::QuadratureNonConvergence { .. })));
    }
}
