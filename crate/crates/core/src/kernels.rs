//! Correlation kernels for β=1 ensembles on the line and the real Ginibre ensemble, for even
//! and odd `N`, and n-point correlations as Pfaffians of kernel blocks.

use crate::error::{Error, Result};
use crate::pfaffian::{pfaffian_balanced as pfaffian, AntisymmetricMatrix};
use crate::poly::Poly;
use crate::quadrature::{integrate_interval, integrate_line};
use crate::skew::{build_family_beta1, ginoe_family, hatted_beta1, hatted_ginoe, HattedFamily, SkewOrthogonalFamily, WeightSpec};
use crate::specfun::{erfc, exp_partial_sum, gamma, lower_gamma, SQRT_2PI, SQRT_PI};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Antisymmetry tolerance for assembled correlation matrices.
pub const ASSEMBLY_TOL: f64 = 1e-9;

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Neumaier-compensated sum.
pub fn ksum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

fn ksum_c(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let v: Vec<Complex64> = values.into_iter().collect();
    Complex64::new(ksum(v.iter().map(|z| z.re)), ksum(v.iter().map(|z| z.im)))
}

/// `e^{-z²/2} √erfc(√2 |Im z|)`, with the large-`|Im z|` tail taken in log form.
pub fn complex_weight(z: Complex64) -> Complex64 {
    let t = std::f64::consts::SQRT_2 * z.im.abs();
    let log_root = {
        let e = erfc(t);
        if e > 1e-290 {
            0.5 * e.ln()
        } else {
            0.5 * (-t * t - (t * SQRT_PI).ln())
        }
    };
    let z2 = z * z;
    Complex64::from_polar((-0.5 * z2.re + log_root).exp(), -0.5 * z2.im)
}

/// An eigenvalue argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Real(f64),
    Complex(Complex64),
}

impl Point {
    pub fn is_real(&self) -> bool {
        matches!(self, Point::Real(_))
    }

    pub fn as_complex(&self) -> Complex64 {
        match *self {
            Point::Real(x) => Complex64::new(x, 0.0),
            Point::Complex(z) => z,
        }
    }

    pub fn conj(&self) -> Point {
        match *self {
            Point::Real(x) => Point::Real(x),
            Point::Complex(z) => Point::Complex(z.conj()),
        }
    }
}

/// Real points `x_1..x_{n1}` and upper-half-plane points `w_1..w_{n2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    reals: Vec<f64>,
    complexes: Vec<Complex64>,
}

impl PointConfiguration {
    pub fn new(reals: Vec<f64>, complexes: Vec<Complex64>) -> Result<Self> {
        if let Some(x) = reals.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("real point {x} is not finite")));
        }
        if let Some(w) = complexes.iter().find(|w| !(w.im > 0.0) || !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("complex point {w} is not in the open upper half plane")));
        }
        for i in 0..reals.len() {
            if reals[..i].contains(&reals[i]) {
                return Err(Error::DuplicatePoint(format!("{}", reals[i])));
            }
        }
        for i in 0..complexes.len() {
            if complexes[..i].contains(&complexes[i]) {
                return Err(Error::DuplicatePoint(format!("{}", complexes[i])));
            }
        }
        Ok(Self { reals, complexes })
    }

    pub fn real(reals: Vec<f64>) -> Result<Self> {
        Self::new(reals, Vec::new())
    }

    pub fn reals(&self) -> &[f64] {
        &self.reals
    }

    pub fn complexes(&self) -> &[Complex64] {
        &self.complexes
    }

    pub fn len(&self) -> usize {
        self.reals.len() + self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reals first, then complexes.
    pub fn points(&self) -> Vec<Point> {
        self.reals.iter().map(|&x| Point::Real(x)).chain(self.complexes.iter().map(|&w| Point::Complex(w))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Beta1Line,
    Ginoe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Per-point values of the β=1 kernel ingredients: `w_k = e^{-V} R̂_k` and `φ_k = Φ̂_k`.
#[derive(Debug, Clone)]
pub struct Beta1Basis {
    pub x: f64,
    pub w: Vec<f64>,
    pub phi: Vec<f64>,
}

/// β=1 kernel `S, D, Ĩ` for a weight on the line.
#[derive(Debug, Clone)]
pub struct Beta1Kernel {
    n: usize,
    family: SkewOrthogonalFamily,
    hatted: Option<HattedFamily>,
}

fn truncate_family(family: &SkewOrthogonalFamily, n: usize) -> Result<SkewOrthogonalFamily> {
    if family.n < n {
        return Err(Error::InvalidArgument(format!("family of size {} cannot serve N = {n}", family.n)));
    }
    let mut f = family.clone();
    f.n = n;
    f.coeffs.truncate(n);
    f.norms.truncate(n / 2);
    Ok(f)
}

impl Beta1Kernel {
    /// Even-`N` kernel from a family of size at least `N`.
    pub fn even(family: &SkewOrthogonalFamily, n: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("even kernel needs even N, got {n}")));
        }
        Ok(Self { n, family: truncate_family(family, n)?, hatted: None })
    }

    /// Odd-`N` kernel from its hatted family.
    pub fn odd(hatted: &HattedFamily) -> Result<Self> {
        let n = hatted.n();
        if n % 2 != 1 {
            return Err(Error::InvalidArgument(format!("odd kernel needs odd N, got {n}")));
        }
        Ok(Self { n, family: hatted.base.clone(), hatted: Some(hatted.clone()) })
    }

    /// Builds the family (and hats it when `N` is odd) for the given weight.
    pub fn for_weight(weight: &WeightSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        if n == 1 {
            let base = SkewOrthogonalFamily {
                n: 1,
                coeffs: vec![Poly::monomial(0)],
                norms: Vec::new(),
                weight: weight.clone(),
                kind: crate::skew::FamilyKind::GeneralBeta1,
            };
            return Self::odd(&hatted_beta1(&base)?);
        }
        let family = build_family_beta1(weight, n)?;
        if n % 2 == 0 {
            Self::even(&family, n)
        } else {
            Self::odd(&hatted_beta1(&family)?)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &SkewOrthogonalFamily {
        &self.family
    }

    pub fn hatted(&self) -> Option<&HattedFamily> {
        self.hatted.as_ref()
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.family.weight
    }

    fn polys(&self) -> &[Poly] {
        match &self.hatted {
            Some(h) => &h.coeffs,
            None => &self.family.coeffs,
        }
    }

    fn pair_norms(&self) -> &[f64] {
        &self.family.norms[..self.n / 2]
    }

    /// Basis at `x`; `weighted = false` drops the `e^{-V(x)}` factor from `w_k`.
    pub fn basis_with(&self, x: f64, weighted: bool) -> Beta1Basis {
        let phi = match &self.hatted {
            Some(h) => h.phi_all(x),
            None => self.family.phi_all(x),
        };
        let v = self.weight().v(x);
        let w = self.polys().iter().map(|p| if weighted { p.eval_weighted(x, v) } else { p.eval(x) }).collect();
        Beta1Basis { x, w, phi }
    }

    pub fn basis(&self, x: f64) -> Beta1Basis {
        self.basis_with(x, true)
    }

    fn odd_terms(&self) -> Option<(usize, f64, f64)> {
        self.hatted.as_ref().map(|h| (self.n - 1, h.f_const, h.last_norm()))
    }

    pub fn s_basis(&self, a: &Beta1Basis, b: &Beta1Basis) -> f64 {
        let mut s = ksum(self.pair_norms().iter().enumerate().map(|(k, r)| (a.phi[2 * k] * b.w[2 * k + 1] - a.phi[2 * k + 1] * b.w[2 * k]) / r));
        if let Some((l, f, r)) = self.odd_terms() {
            s += b.w[l] * f / r;
        }
        s
    }

    pub fn d_basis(&self, a: &Beta1Basis, b: &Beta1Basis) -> f64 {
        ksum(self.pair_norms().iter().enumerate().map(|(k, r)| (a.w[2 * k] * b.w[2 * k + 1] - a.w[2 * k + 1] * b.w[2 * k]) / r))
    }

    pub fn i_basis(&self, a: &Beta1Basis, b: &Beta1Basis) -> f64 {
        let mut s = ksum(self.pair_norms().iter().enumerate().map(|(k, r)| (a.phi[2 * k + 1] * b.phi[2 * k] - a.phi[2 * k] * b.phi[2 * k + 1]) / r));
        s += 0.5 * sgn(b.x - a.x);
        if let Some((l, f, r)) = self.odd_terms() {
            s += (a.phi[l] * f - f * b.phi[l]) / r;
        }
        s
    }

    pub fn s(&self, x: f64, y: f64) -> f64 {
        self.s_basis(&self.basis(x), &self.basis(y))
    }

    pub fn d(&self, x: f64, y: f64) -> f64 {
        self.d_basis(&self.basis(x), &self.basis(y))
    }

    pub fn i_tilde(&self, x: f64, y: f64) -> f64 {
        self.i_basis(&self.basis(x), &self.basis(y))
    }

    /// `[[−Ĩ(a,b), S(a,b)], [−S(b,a), D(a,b)]]`.
    pub fn cell(&self, a: &Beta1Basis, b: &Beta1Basis) -> [[f64; 2]; 2] {
        [[-self.i_basis(a, b), self.s_basis(a, b)], [-self.s_basis(b, a), self.d_basis(a, b)]]
    }

    /// `ρ_(n)` from precomputed bases.
    pub fn rho_bases(&self, bases: &[&Beta1Basis]) -> Result<f64> {
        Ok(pfaffian(&self.matrix_bases(bases)?))
    }

    pub fn matrix_bases(&self, bases: &[&Beta1Basis]) -> Result<AntisymmetricMatrix<f64>> {
        let n = bases.len();
        let mut m = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                let c = self.cell(bases[i], bases[j]);
                for (a, row) in c.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        m[2 * i + a][2 * j + b] = *v;
                    }
                }
            }
        }
        AntisymmetricMatrix::with_tolerance(m, ASSEMBLY_TOL)
    }
}

/// Per-point Ginibre kernel ingredients `q_k, τ_k` and the indicator `u`.
#[derive(Debug, Clone)]
pub struct GinoeBasis {
    pub point: Point,
    pub q: Vec<Complex64>,
    pub tau: Vec<Complex64>,
    pub u: f64,
}

/// Real Ginibre kernel blocks `D, S, I`.
#[derive(Debug, Clone)]
pub struct GinoeKernel {
    n: usize,
    family: SkewOrthogonalFamily,
    hatted: Option<HattedFamily>,
}

impl GinoeKernel {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        if n % 2 == 0 {
            Ok(Self { n, family: ginoe_family(n)?, hatted: None })
        } else {
            let h = hatted_ginoe(n)?;
            Ok(Self { n, family: h.base.clone(), hatted: Some(h) })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &SkewOrthogonalFamily {
        &self.family
    }

    pub fn hatted(&self) -> Option<&HattedFamily> {
        self.hatted.as_ref()
    }

    fn polys(&self) -> &[Poly] {
        match &self.hatted {
            Some(h) => &h.coeffs,
            None => &self.family.coeffs,
        }
    }

    fn nu_n(&self) -> Option<f64> {
        self.hatted.as_ref().map(|h| h.last_norm())
    }

    /// Basis at a point; non-real points may lie in either half plane. `weighted = false`
    /// drops the `e^{-x²/2}` factor from `q_k` at a real point.
    pub fn basis_with(&self, p: Point, weighted: bool) -> GinoeBasis {
        match p {
            Point::Real(x) => {
                let phi = match &self.hatted {
                    Some(h) => h.phi_all(x),
                    None => self.family.phi_all(x),
                };
                let v = 0.5 * x * x;
                let q = self
                    .polys()
                    .iter()
                    .map(|c| Complex64::new(if weighted { c.eval_weighted(x, v) } else { c.eval(x) }, 0.0))
                    .collect();
                let tau = phi.iter().map(|f| Complex64::new(-0.5 * f, 0.0)).collect();
                GinoeBasis { point: p, q, tau, u: 1.0 }
            }
            Point::Complex(z) => {
                let g = complex_weight(z);
                let q: Vec<Complex64> = self.polys().iter().map(|c| g * c.eval_complex(z)).collect();
                let tau = q.iter().map(|v| I * v.conj()).collect();
                GinoeBasis { point: p, q, tau, u: 0.0 }
            }
        }
    }

    pub fn basis(&self, p: Point) -> GinoeBasis {
        self.basis_with(p, true)
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.family.norms[..self.n / 2].iter().copied().enumerate()
    }

    pub fn d_basis(&self, a: &GinoeBasis, b: &GinoeBasis) -> Complex64 {
        ksum_c(self.pairs().map(|(k, r)| (a.q[2 * k] * b.q[2 * k + 1] - a.q[2 * k + 1] * b.q[2 * k]) * (2.0 / r)))
    }

    pub fn s_basis(&self, a: &GinoeBasis, b: &GinoeBasis) -> Complex64 {
        let mut s = ksum_c(self.pairs().map(|(k, r)| (a.q[2 * k] * b.tau[2 * k + 1] - a.q[2 * k + 1] * b.tau[2 * k]) * (2.0 / r)));
        if let Some(nu) = self.nu_n() {
            s += a.q[self.n - 1] * (b.u / (2.0 * nu));
        }
        s
    }

    pub fn i_basis(&self, a: &GinoeBasis, b: &GinoeBasis) -> Complex64 {
        let mut s = ksum_c(self.pairs().map(|(k, r)| (a.tau[2 * k] * b.tau[2 * k + 1] - a.tau[2 * k + 1] * b.tau[2 * k]) * (2.0 / r)));
        if let (Point::Real(x), Point::Real(y)) = (a.point, b.point) {
            s += 0.5 * sgn(x - y);
        }
        if let Some(nu) = self.nu_n() {
            let l = self.n - 1;
            s += (a.tau[l] * b.u - b.tau[l] * a.u) / (2.0 * nu);
        }
        s
    }

    /// `κ(μ, η)`, zero for even `N`.
    pub fn kappa(&self, mu: Point, eta: Point) -> Complex64 {
        match self.nu_n() {
            Some(nu) => {
                let (a, b) = (self.basis(mu), self.basis(eta));
                a.q[self.n - 1] * (b.u / (2.0 * nu))
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `θ(μ, η)`, zero for even `N`.
    pub fn theta(&self, mu: Point, eta: Point) -> Complex64 {
        match self.nu_n() {
            Some(nu) => {
                let (a, b) = (self.basis(mu), self.basis(eta));
                let l = self.n - 1;
                (a.tau[l] * b.u - b.tau[l] * a.u) / (2.0 * nu)
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn s(&self, mu: Point, eta: Point) -> Complex64 {
        self.s_basis(&self.basis(mu), &self.basis(eta))
    }

    pub fn d(&self, mu: Point, eta: Point) -> Complex64 {
        self.d_basis(&self.basis(mu), &self.basis(eta))
    }

    pub fn i(&self, mu: Point, eta: Point) -> Complex64 {
        self.i_basis(&self.basis(mu), &self.basis(eta))
    }

    /// `[[D(a,b), S(a,b)], [−S(b,a), I(a,b)]]`.
    pub fn cell(&self, a: &GinoeBasis, b: &GinoeBasis) -> [[Complex64; 2]; 2] {
        [[self.d_basis(a, b), self.s_basis(a, b)], [-self.s_basis(b, a), self.i_basis(a, b)]]
    }

    pub fn matrix_bases(&self, bases: &[&GinoeBasis]) -> Result<AntisymmetricMatrix<Complex64>> {
        let n = bases.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut m = vec![vec![zero; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                let c = self.cell(bases[i], bases[j]);
                for (a, row) in c.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        m[2 * i + a][2 * j + b] = *v;
                    }
                }
            }
        }
        AntisymmetricMatrix::with_tolerance(m, ASSEMBLY_TOL)
    }

    pub fn rho_bases(&self, bases: &[&GinoeBasis]) -> Result<Complex64> {
        Ok(pfaffian(&self.matrix_bases(bases)?))
    }
}

/// Either kernel, tagged with its ensemble and parity.
#[derive(Debug, Clone)]
pub enum KernelBundle {
    Beta1(Beta1Kernel),
    Ginoe(GinoeKernel),
}

impl KernelBundle {
    pub fn beta1_even(family: &SkewOrthogonalFamily, n: usize) -> Result<Self> {
        Ok(Self::Beta1(Beta1Kernel::even(family, n)?))
    }

    pub fn beta1_odd(hatted: &HattedFamily) -> Result<Self> {
        Ok(Self::Beta1(Beta1Kernel::odd(hatted)?))
    }

    pub fn beta1(weight: &WeightSpec, n: usize) -> Result<Self> {
        Ok(Self::Beta1(Beta1Kernel::for_weight(weight, n)?))
    }

    pub fn ginoe_even(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("even kernel needs even N, got {n}")));
        }
        Ok(Self::Ginoe(GinoeKernel::new(n)?))
    }

    pub fn ginoe_odd(n: usize) -> Result<Self> {
        if n % 2 != 1 {
            return Err(Error::InvalidArgument(format!("odd kernel needs odd N, got {n}")));
        }
        Ok(Self::Ginoe(GinoeKernel::new(n)?))
    }

    pub fn ginoe(n: usize) -> Result<Self> {
        Ok(Self::Ginoe(GinoeKernel::new(n)?))
    }

    pub fn ensemble(&self) -> Ensemble {
        match self {
            Self::Beta1(_) => Ensemble::Beta1Line,
            Self::Ginoe(_) => Ensemble::Ginoe,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Beta1(k) => k.n(),
            Self::Ginoe(k) => k.n(),
        }
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.n())
    }

    fn real_only(p: Point) -> Result<f64> {
        match p {
            Point::Real(x) => Ok(x),
            Point::Complex(z) => Err(Error::InvalidArgument(format!("β=1 line kernel takes real points, got {z}"))),
        }
    }

    pub fn s(&self, mu: Point, eta: Point) -> Result<Complex64> {
        match self {
            Self::Beta1(k) => Ok(k.s(Self::real_only(mu)?, Self::real_only(eta)?).into()),
            Self::Ginoe(k) => Ok(k.s(mu, eta)),
        }
    }

    pub fn d(&self, mu: Point, eta: Point) -> Result<Complex64> {
        match self {
            Self::Beta1(k) => Ok(k.d(Self::real_only(mu)?, Self::real_only(eta)?).into()),
            Self::Ginoe(k) => Ok(k.d(mu, eta)),
        }
    }

    /// `Ĩ` for β=1, `I` for the Ginibre ensemble.
    pub fn i(&self, mu: Point, eta: Point) -> Result<Complex64> {
        match self {
            Self::Beta1(k) => Ok(k.i_tilde(Self::real_only(mu)?, Self::real_only(eta)?).into()),
            Self::Ginoe(k) => Ok(k.i(mu, eta)),
        }
    }
}

/// A correlation value and its discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoValue {
    pub value: f64,
    pub imag_residue: f64,
}

/// The assembled `2n x 2n` correlation matrix, complex for uniformity.
pub fn correlation_matrix(bundle: &KernelBundle, config: &PointConfiguration) -> Result<AntisymmetricMatrix<Complex64>> {
    if config.is_empty() {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    match bundle {
        KernelBundle::Beta1(k) => {
            if !config.complexes().is_empty() {
                return Err(Error::InvalidArgument("β=1 line kernel takes real points only".into()));
            }
            let bases: Vec<Beta1Basis> = config.reals().iter().map(|&x| k.basis(x)).collect();
            let m = k.matrix_bases(&bases.iter().collect::<Vec<_>>())?;
            AntisymmetricMatrix::from_upper(m.dim(), |i, j| Complex64::new(m.get(i, j), 0.0))
        }
        KernelBundle::Ginoe(k) => {
            let bases: Vec<GinoeBasis> = config.points().into_iter().map(|p| k.basis(p)).collect();
            k.matrix_bases(&bases.iter().collect::<Vec<_>>())
        }
    }
}

/// `ρ_(n)` (β=1) or `ρ_(n1,n2)` (Ginibre) at the configuration.
pub fn rho(bundle: &KernelBundle, config: &PointConfiguration) -> Result<RhoValue> {
    let v = match bundle {
        KernelBundle::Beta1(k) => {
            if !config.complexes().is_empty() {
                return Err(Error::InvalidArgument("β=1 line kernel takes real points only".into()));
            }
            if config.is_empty() {
                return Err(Error::InvalidArgument("need at least one point".into()));
            }
            let bases: Vec<Beta1Basis> = config.reals().iter().map(|&x| k.basis(x)).collect();
            Complex64::new(k.rho_bases(&bases.iter().collect::<Vec<_>>())?, 0.0)
        }
        KernelBundle::Ginoe(_) => pfaffian(&correlation_matrix(bundle, config)?),
    };
    let scale = v.norm().max(1.0);
    if v.im.abs() > 1e-9 * scale {
        return Err(Error::ImaginaryResidue(v.im.abs()));
    }
    Ok(RhoValue { value: v.re, imag_residue: v.im.abs() })
}

/// CSV of evaluated configurations: one column (or Re/Im pair) per point, then `rho`.
pub fn rho_csv(rows: &[(PointConfiguration, RhoValue)]) -> String {
    let mut out = String::new();
    if let Some((c, _)) = rows.first() {
        let mut head: Vec<String> = (1..=c.reals().len()).map(|i| format!("x{i}")).collect();
        for i in 1..=c.complexes().len() {
            head.push(format!("re_w{i}"));
            head.push(format!("im_w{i}"));
        }
        head.push("rho".into());
        head.push("imag_residue".into());
        let _ = writeln!(out, "{}", head.join(","));
    }
    for (c, r) in rows {
        let mut cols: Vec<String> = c.reals().iter().map(|x| format!("{x:.17e}")).collect();
        for w in c.complexes() {
            cols.push(format!("{:.17e}", w.re));
            cols.push(format!("{:.17e}", w.im));
        }
        cols.push(format!("{:.17e}", r.value));
        cols.push(format!("{:.3e}", r.imag_residue));
        let _ = writeln!(out, "{}", cols.join(","));
    }
    out
}

/// Argument blocks of the Ginibre kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Rr,
    Rc,
    Cr,
    Cc,
}

impl std::str::FromStr for Block {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rr" => Ok(Block::Rr),
            "rc" => Ok(Block::Rc),
            "cr" => Ok(Block::Cr),
            "cc" => Ok(Block::Cc),
            _ => Err(Error::InvalidArgument(format!("unknown block '{s}'"))),
        }
    }
}

/// Closed-form `S` of the Ginibre kernel for either parity of `N ≥ 2`.
pub fn ginoe_summed_s(n: usize, block: Block, mu: Point, eta: Point) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("summed kernel needs N >= 2, got {n}")));
    }
    let g = gamma((n - 1) as f64)?;
    let m = (n - 1) as u32;
    let root = |z: Complex64| erfc(std::f64::consts::SQRT_2 * z.im.abs()).sqrt();
    let real_tail = |a: Complex64, y: f64| -> Result<Complex64> {
        let parity = if (n - 1) % 2 == 1 { sgn(y) } else { 1.0 };
        let lg = lower_gamma((n - 1) as f64 / 2.0, 0.5 * y * y)?;
        Ok((-0.5 * a * a).exp() * a.powu(m) * (2f64.powf((n as f64 - 3.0) / 2.0) * parity * lg / g))
    };
    match (block, mu, eta) {
        (Block::Rr, Point::Real(x), Point::Real(y)) => {
            let (xc, yc) = (Complex64::new(x, 0.0), Complex64::new(y, 0.0));
            let head = (-0.5 * (x * x + y * y)) * 1.0;
            let first = Complex64::new(head.exp(), 0.0) * exp_partial_sum(m, xc * yc);
            Ok((first + real_tail(xc, y)?) / SQRT_2PI)
        }
        (Block::Cr, Point::Complex(w), Point::Real(x)) => {
            let xc = Complex64::new(x, 0.0);
            let first = (-0.5 * (w * w + xc * xc)).exp() * exp_partial_sum(m, w * xc);
            Ok((first + real_tail(w, x)?) * (root(w) / SQRT_2PI))
        }
        (Block::Rc, Point::Real(x), Point::Complex(w)) => {
            let (xc, wb) = (Complex64::new(x, 0.0), w.conj());
            let head = (-0.5 * (xc * xc + wb * wb)).exp() * exp_partial_sum(m, xc * wb);
            Ok(I * head * (wb - xc) * (root(w) / SQRT_2PI))
        }
        (Block::Cc, Point::Complex(w), Point::Complex(z)) => {
            let zb = z.conj();
            let head = (-0.5 * (w * w + zb * zb)).exp() * exp_partial_sum(m, w * zb);
            Ok(I * head * (zb - w) * (root(w) * root(z) / SQRT_2PI))
        }
        _ => Err(Error::InvalidArgument(format!("points do not match block {block:?}"))),
    }
}

/// Largest deviation per checked relation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relations: Vec<(String, f64)>,
}

impl RelationReport {
    fn record(&mut self, name: &str, dev: f64) {
        match self.relations.iter_mut().find(|(n, _)| n == name) {
            Some((_, d)) => *d = d.max(dev),
            None => self.relations.push((name.to_string(), dev)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }

    pub fn max(&self) -> f64 {
        self.relations.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }
}

/// `|a − b| / max(|b|, 1e-6)`.
pub fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-6)
}

const FD_STEP: f64 = 1e-5;
const INTEGRAL_TOL: f64 = 1e-12;

/// Checks the differential, integral and conjugation relations among `S, D, I` at all pairs
/// drawn from `reals` and `complexes` (upper half plane).
pub fn interrelations_check(bundle: &KernelBundle, reals: &[f64], complexes: &[Complex64]) -> Result<RelationReport> {
    let mut rep = RelationReport::default();
    match bundle {
        KernelBundle::Beta1(k) => {
            for &x in reals {
                for &y in reals {
                    // D vanishes on the diagonal, where a relative finite-difference test is noise
                    if x != y {
                        let ds = (k.s(x + FD_STEP, y) - k.s(x - FD_STEP, y)) / (2.0 * FD_STEP);
                        rep.record("D = dS/dx", rel_dev(ds.into(), k.d(x, y).into()));
                        let di = (k.i_tilde(x, y + FD_STEP) - k.i_tilde(x, y - FD_STEP)) / (2.0 * FD_STEP);
                        rep.record("dI/dy = -S", rel_dev(di.into(), (-k.s(x, y)).into()));
                    }
                }
            }
        }
        KernelBundle::Ginoe(k) => {
            let r = Point::Real;
            let c = Point::Complex;
            for &x in reals {
                for &y in reals {
                    let ds = (k.s(r(x), r(y + FD_STEP)) - k.s(r(x), r(y - FD_STEP))) / (2.0 * FD_STEP);
                    rep.record("D_rr = -dS_rr/dy", rel_dev(-ds, k.d(r(x), r(y))));
                    if x != y {
                        let int = integrate_interval(|z| k.s(r(z), r(y)), x, y, &[], INTEGRAL_TOL)?;
                        rep.record("I_rr = int_x^y S_rr + sgn/2", rel_dev(int + 0.5 * sgn(x - y), k.i(r(x), r(y))));
                    }
                }
                for &w in complexes {
                    rep.record("D_rc(x,w) = -i S(x,conj w)", rel_dev(-I * k.s(r(x), c(w.conj())), k.d(r(x), c(w))));
                    rep.record("D_rc(x,w) = -D_cr(w,x)", rel_dev(-k.d(c(w), r(x)), k.d(r(x), c(w))));
                    rep.record("I_cr(w,x) = i S(conj w,x)", rel_dev(I * k.s(c(w.conj()), r(x)), k.i(c(w), r(x))));
                    rep.record("I_cr(w,x) = -I_rc(x,w)", rel_dev(-k.i(r(x), c(w)), k.i(c(w), r(x))));
                    let ds = (k.s(c(w), r(x + FD_STEP)) - k.s(c(w), r(x - FD_STEP))) / (2.0 * FD_STEP);
                    rep.record("D_cr = -dS_cr/dx", rel_dev(-ds, k.d(c(w), r(x))));
                    for &x0 in reals {
                        if x0 == x {
                            continue;
                        }
                        let int = integrate_interval(|z| k.s(r(z), c(w)), x0, x, &[], INTEGRAL_TOL)?;
                        let lhs = k.i(r(x), c(w)) - k.i(r(x0), c(w));
                        rep.record("I_rc(x,w) - I_rc(x0,w) = -int S_rc", rel_dev(lhs, -int));
                    }
                }
            }
            for &w in complexes {
                for &z in complexes {
                    rep.record("D_cc(w,z) = -i S(w,conj z)", rel_dev(-I * k.s(c(w), c(z.conj())), k.d(c(w), c(z))));
                    rep.record("I_cc(w,z) = i S(conj w,z)", rel_dev(I * k.s(c(w.conj()), c(z)), k.i(c(w), c(z))));
                }
            }
        }
    }
    Ok(rep)
}

/// Relative deviation of `∫ ρ_(n+1)(x_1..x_n, y) dy` from `(N − n) ρ_(n)(x_1..x_n)`.
pub fn dyson_recurrence_check(bundle: &KernelBundle, points: &[f64]) -> Result<f64> {
    let KernelBundle::Beta1(k) = bundle else {
        return Err(Error::InvalidArgument("Dyson recurrence check is for β=1 line kernels".into()));
    };
    let n = points.len();
    if n > 3 {
        return Err(Error::InvalidArgument("recurrence check supports n <= 3".into()));
    }
    let big_n = k.n();
    if n >= big_n {
        return Err(Error::InvalidArgument(format!("n = {n} must be below N = {big_n}")));
    }
    PointConfiguration::real(points.to_vec())?;
    let fixed: Vec<Beta1Basis> = points.iter().map(|&x| k.basis(x)).collect();
    let decay = k.weight().line_decay(4 * big_n).with_breakpoints(points);
    let lhs = integrate_line(
        |y| {
            if points.contains(&y) {
                return 0.0;
            }
            let by = k.basis(y);
            let mut all: Vec<&Beta1Basis> = fixed.iter().collect();
            all.push(&by);
            k.rho_bases(&all).unwrap_or(f64::NAN)
        },
        &decay,
        1e-11,
    )?;
    let rhs = if n == 0 { big_n as f64 } else { (big_n - n) as f64 * k.rho_bases(&fixed.iter().collect::<Vec<_>>())? };
    Ok((lhs - rhs).abs() / rhs.abs().max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_halfplane, LineDecay, PlaneDecay};

    fn gauss(n: usize) -> KernelBundle {
        KernelBundle::beta1(&WeightSpec::gaussian(), n).unwrap()
    }

    fn density_integral(b: &KernelBundle) -> f64 {
        let KernelBundle::Beta1(k) = b else { unreachable!() };
        integrate_line(|x| k.s(x, x), &LineDecay::gaussian(4 * k.n()), 1e-12).unwrap()
    }

    #[test]
    fn beta1_normalization() {
        for n in 1..=6 {
            let v = density_integral(&gauss(n));
            assert!((v - n as f64).abs() < 1e-8, "N={n}: {v}");
        }
    }

    #[test]
    fn beta1_single_eigenvalue() {
        let KernelBundle::Beta1(k) = gauss(1) else { unreachable!() };
        for &x in &[-1.2, 0.0, 0.8] {
            assert!((k.s(x, x) - (-0.5 * x * x).exp() / SQRT_2PI).abs() < 1e-14);
        }
    }

    #[test]
    fn beta1_two_point_n2() {
        // N=2 jpdf: |x−y| e^{-(x²+y²)/2} / (4√π), ρ_(2) = 2 × jpdf
        let b = gauss(2);
        for &(x, y) in &[(0.3, -0.8), (1.1, 1.4)] {
            let c = PointConfiguration::real(vec![x, y]).unwrap();
            let r = rho(&b, &c).unwrap().value;
            let expect = (x - y).abs() * (-(x * x + y * y) / 2.0).exp() / (2.0 * SQRT_PI);
            assert!((r - expect).abs() < 1e-13, "{r} vs {expect}");
        }
    }

    #[test]
    fn beta1_antisymmetry_and_zero_diagonal() {
        for n in [3, 4] {
            let KernelBundle::Beta1(k) = gauss(n) else { unreachable!() };
            for &(x, y) in &[(0.4, -1.3), (2.0, 0.1)] {
                assert!(k.d(x, x).abs() < 1e-15);
                assert!((k.d(x, y) + k.d(y, x)).abs() < 1e-14);
                assert!((k.i_tilde(x, y) + k.i_tilde(y, x)).abs() < 1e-14);
                assert!((k.s(x, x) - k.s(-x, -x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta1_interrelations() {
        for n in [3, 4] {
            let rep = interrelations_check(&gauss(n), &[0.5, -0.3, 1.2], &[]).unwrap();
            assert!(rep.max() < 1e-5, "{rep:?}");
        }
    }

    #[test]
    fn dyson_recurrence() {
        for n in [3, 4] {
            let b = gauss(n);
            assert!(dyson_recurrence_check(&b, &[0.7]).unwrap() < 1e-5);
            assert!(dyson_recurrence_check(&b, &[]).unwrap() < 1e-8);
        }
        assert!(dyson_recurrence_check(&gauss(4), &[0.2, -0.9]).unwrap() < 1e-5);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(PointConfiguration::real(vec![0.1, 0.1]), Err(Error::DuplicatePoint(_))));
        assert!(PointConfiguration::new(vec![], vec![Complex64::new(0.0, -1.0)]).is_err());
        let c = PointConfiguration::new(vec![0.2], vec![Complex64::new(0.1, 0.5)]).unwrap();
        assert!(rho(&gauss(2), &c).is_err());
        assert_eq!(c.points().len(), 2);
    }

    #[test]
    fn ginoe_real_density_at_origin() {
        let b = KernelBundle::ginoe(2).unwrap();
        let r = rho(&b, &PointConfiguration::real(vec![0.0]).unwrap()).unwrap();
        assert!((r.value - 1.0 / SQRT_2PI).abs() < 1e-14);
    }

    fn expected_real(n: usize) -> f64 {
        let s2 = 2f64.sqrt();
        [0.0, 1.0, s2, 1.0 + s2 / 2.0, s2 * (1.0 + 3.0 / 8.0), 1.0 + s2 * (0.5 + 15.0 / 48.0)][n]
    }

    #[test]
    fn ginoe_expected_counts() {
        for n in 1..=5 {
            let KernelBundle::Ginoe(k) = KernelBundle::ginoe(n).unwrap() else { unreachable!() };
            let real = integrate_line(|x| k.s(Point::Real(x), Point::Real(x)).re, &LineDecay::gaussian(4 * n), 1e-12).unwrap();
            assert!((real - expected_real(n)).abs() < 1e-9, "N={n}: {real}");
            if n >= 2 {
                let cplx = integrate_halfplane(
                    |x, y| {
                        let w = Point::Complex(Complex64::new(x, y));
                        k.s(w, w).re
                    },
                    &PlaneDecay::gaussian(2 * n),
                    1e-9,
                )
                .unwrap();
                assert!((cplx - (n as f64 - expected_real(n)) / 2.0).abs() < 1e-8, "N={n}: {cplx}");
            }
        }
    }

    #[test]
    fn summed_forms_match_finite_sums() {
        let pts_r = [0.7, -1.3, 0.0, 2.1];
        let pts_c = [Complex64::new(0.4, 0.6), Complex64::new(-0.9, 1.1)];
        for n in 2..=7 {
            let KernelBundle::Ginoe(k) = KernelBundle::ginoe(n).unwrap() else { unreachable!() };
            let (r, c) = (Point::Real, Point::Complex);
            for &x in &pts_r {
                for &y in &pts_r {
                    assert!(rel_dev(ginoe_summed_s(n, Block::Rr, r(x), r(y)).unwrap(), k.s(r(x), r(y))) < 1e-10, "N={n} rr {x} {y}");
                }
                for &w in &pts_c {
                    assert!(rel_dev(ginoe_summed_s(n, Block::Cr, c(w), r(x)).unwrap(), k.s(c(w), r(x))) < 1e-10, "N={n} cr");
                    assert!(rel_dev(ginoe_summed_s(n, Block::Rc, r(x), c(w)).unwrap(), k.s(r(x), c(w))) < 1e-10, "N={n} rc");
                }
            }
            for &w in &pts_c {
                for &z in &pts_c {
                    assert!(rel_dev(ginoe_summed_s(n, Block::Cc, c(w), c(z)).unwrap(), k.s(c(w), c(z))) < 1e-10, "N={n} cc");
                }
            }
        }
        assert!(ginoe_summed_s(4, Block::Rr, Point::Real(0.1), Point::Complex(Complex64::new(0.0, 1.0))).is_err());
    }

    #[test]
    fn ginoe_interrelations() {
        for n in [4, 5] {
            let b = KernelBundle::ginoe(n).unwrap();
            let rep = interrelations_check(&b, &[0.5, -0.3], &[Complex64::new(0.4, 0.6), Complex64::new(-0.9, 1.1)]).unwrap();
            for (name, d) in &rep.relations {
                assert!(*d < 1e-5, "N={n} {name}: {d}");
            }
        }
    }

    #[test]
    fn theta_cases() {
        let KernelBundle::Ginoe(k) = KernelBundle::ginoe(3).unwrap() else { unreachable!() };
        let (w, z) = (Point::Complex(Complex64::new(0.3, 0.5)), Point::Complex(Complex64::new(-0.2, 0.9)));
        assert_eq!(k.theta(w, z), Complex64::new(0.0, 0.0));
        let x = Point::Real(0.4);
        assert!((k.theta(x, w) + k.theta(w, x)).norm() < 1e-15);
        assert_eq!(k.kappa(x, w), Complex64::new(0.0, 0.0));
        let KernelBundle::Ginoe(e) = KernelBundle::ginoe(4).unwrap() else { unreachable!() };
        assert_eq!(e.theta(x, Point::Real(0.1)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn ginoe_level_repulsion_and_residue() {
        let b = KernelBundle::ginoe(2).unwrap();
        let near = rho(&b, &PointConfiguration::real(vec![0.3, 0.3 + 1e-6]).unwrap()).unwrap();
        assert!(near.value.abs() < 1e-5);
        let c = PointConfiguration::new(vec![0.2], vec![Complex64::new(0.1, 0.7)]).unwrap();
        let r = rho(&KernelBundle::ginoe(5).unwrap(), &c).unwrap();
        assert!(r.imag_residue < 1e-12 && r.value > 0.0);
    }

    #[test]
    fn csv_layout() {
        let c = PointConfiguration::new(vec![0.5], vec![Complex64::new(0.1, 0.2)]).unwrap();
        let csv = rho_csv(&[(c, RhoValue { value: 0.25, imag_residue: 0.0 })]);
        assert!(csv.starts_with("x1,re_w1,im_w1,rho,imag_residue\n"));
    }
}
