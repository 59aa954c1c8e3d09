//! Skew inner products and skew-orthogonal polynomial families for β=1 weights and the real
//! Ginibre ensemble, including the odd-size (hatted) companions.

use crate::error::{Error, Result};
use crate::pfaffian::{pfaffian, AntisymmetricMatrix};
use crate::poly::Poly;
use crate::quadrature::{gauss_legendre, halfplane_nodes, integrate_line, LineDecay, PlaneDecay, GL_ORDER};
use crate::specfun::{erfc, gamma, gaussian_moment, signed_gaussian_moments, SQRT_2PI};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// Tolerance used for the one-dimensional integrals behind inner products and moments.
pub const INNER_TOL: f64 = 1e-13;
/// Highest monomial degree supported by the custom-weight moment table.
const MAX_MONOMIAL: usize = 64;

type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Weight `e^{-V(x)}` on the real line.
#[derive(Clone)]
pub struct WeightSpec {
    label: String,
    potential: Potential,
}

#[derive(Clone)]
enum Potential {
    Gaussian,
    Custom { v: PotentialFn, radius: f64, table: Arc<OnceLock<MomentTable>> },
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec").field("label", &self.label).finish()
    }
}

impl PartialEq for WeightSpec {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

impl WeightSpec {
    /// `V(x) = x²/2`.
    pub fn gaussian() -> Self {
        Self { label: "gaussian".into(), potential: Potential::Gaussian }
    }

    /// A user potential, integrated on `[-radius, radius]`.
    ///
    /// Rejected unless `∫ e^{-V}` is finite and positive and the weight is negligible at the
    /// truncation edges.
    pub fn custom(label: impl Into<String>, v: impl Fn(f64) -> f64 + Send + Sync + 'static, radius: f64) -> Result<Self> {
        let label = label.into();
        if label == "gaussian" {
            return Err(Error::InvalidArgument("label 'gaussian' is reserved".into()));
        }
        let v: PotentialFn = Arc::new(v);
        let total = integrate_line(|x| (-v(x)).exp(), &LineDecay::radius(radius), 1e-12)?;
        let edge = (-v(radius)).exp().max((-v(-radius)).exp());
        if !(total.is_finite() && total > 0.0) || edge > 1e-14 * total {
            return Err(Error::InvalidArgument(format!("weight '{label}' is not integrable on [-{radius}, {radius}]")));
        }
        Ok(Self { label, potential: Potential::Custom { v, radius, table: Arc::new(OnceLock::new()) } })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.potential, Potential::Gaussian)
    }

    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        match &self.potential {
            Potential::Gaussian => 0.5 * x * x,
            Potential::Custom { v, .. } => v(x),
        }
    }

    /// Truncation for integrands `e^{-V}` times a polynomial of the given degree.
    pub fn line_decay(&self, degree: usize) -> LineDecay {
        match &self.potential {
            Potential::Gaussian => LineDecay::gaussian(degree),
            Potential::Custom { radius, .. } => LineDecay::radius(*radius),
        }
    }

    /// `∫ sgn(x − y) y^j e^{-V(y)} dy` for `j = 0..=kmax`.
    pub fn signed_moments(&self, kmax: usize, x: f64) -> Vec<f64> {
        match &self.potential {
            Potential::Gaussian => signed_gaussian_moments(kmax, x),
            Potential::Custom { v, radius, table } => {
                table.get_or_init(|| MomentTable::build(v.as_ref(), *radius)).signed(kmax, x, v.as_ref())
            }
        }
    }

    /// `∫ y^j e^{-V(y)} dy` for `j = 0..=kmax`.
    pub fn moments(&self, kmax: usize) -> Vec<f64> {
        match &self.potential {
            Potential::Gaussian => (0..=kmax).map(gaussian_moment).collect(),
            Potential::Custom { v, radius, table } => {
                let t = table.get_or_init(|| MomentTable::build(v.as_ref(), *radius));
                t.total[..=kmax].to_vec()
            }
        }
    }
}

/// Cumulative monomial moments of a custom weight at fine panel edges.
struct MomentTable {
    edges: Vec<f64>,
    cum: Vec<Vec<f64>>,
    total: Vec<f64>,
}

impl MomentTable {
    const PANEL: f64 = 0.125;

    fn build(v: &(dyn Fn(f64) -> f64 + Send + Sync), radius: f64) -> Self {
        let panels = (2.0 * radius / Self::PANEL).ceil() as usize;
        let h = 2.0 * radius / panels as f64;
        let edges: Vec<f64> = (0..=panels).map(|p| -radius + p as f64 * h).collect();
        let mut cum = vec![vec![0.0; MAX_MONOMIAL + 1]];
        for p in 0..panels {
            let mut next = cum[p].clone();
            accumulate_panel(&mut next, edges[p], edges[p + 1], v);
            cum.push(next);
        }
        let total = cum[panels].clone();
        Self { edges, cum, total }
    }

    fn cumulative(&self, kmax: usize, x: f64, v: &(dyn Fn(f64) -> f64 + Send + Sync)) -> Vec<f64> {
        let (lo, hi) = (self.edges[0], *self.edges.last().unwrap());
        if x <= lo {
            return vec![0.0; kmax + 1];
        }
        if x >= hi {
            return self.total[..=kmax].to_vec();
        }
        let h = self.edges[1] - self.edges[0];
        let p = (((x - lo) / h).floor() as usize).min(self.edges.len() - 2);
        let mut out = self.cum[p][..=kmax].to_vec();
        accumulate_panel(&mut out, self.edges[p], x, v);
        out
    }

    fn signed(&self, kmax: usize, x: f64, v: &(dyn Fn(f64) -> f64 + Send + Sync)) -> Vec<f64> {
        self.cumulative(kmax, x, v).iter().zip(&self.total).map(|(c, t)| 2.0 * c - t).collect()
    }
}

fn legendre20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(GL_ORDER))
}

fn accumulate_panel(out: &mut [f64], a: f64, b: f64, v: &(dyn Fn(f64) -> f64 + Send + Sync)) {
    if b <= a {
        return;
    }
    let (gx, gw) = legendre20();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    for (x, w) in gx.iter().zip(gw) {
        let y = c + r * x;
        let mut term = r * w * (-v(y)).exp();
        for o in out.iter_mut() {
            *o += term;
            term *= y;
        }
    }
}

/// Which convention a family follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `Φ_k(x) = ½∫ sgn(x−y) R_k(y) e^{-V(y)} dy`.
    GeneralBeta1,
    /// `Φ_j(x) = ∫ sgn(x−z) p_j(z) e^{-z²/2} dz`.
    Ginoe,
}

/// Monic skew-orthogonal polynomials `R_0..R_{N-1}` with pair norms `r_0..r_{⌊N/2⌋-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewOrthogonalFamily {
    pub n: usize,
    pub coeffs: Vec<Poly>,
    pub norms: Vec<f64>,
    pub weight: WeightSpec,
    pub kind: FamilyKind,
}

/// Plain JSON form of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub n: usize,
    pub kind: FamilyKind,
    pub weight: String,
    pub coeffs: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl SkewOrthogonalFamily {
    fn phi_scale(&self) -> f64 {
        match self.kind {
            FamilyKind::GeneralBeta1 => 0.5,
            FamilyKind::Ginoe => 1.0,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.iter().map(|p| p.coeffs.len() - 1).max().unwrap_or(0)
    }

    /// `Φ` of an arbitrary polynomial under this family's convention.
    pub fn phi_of(&self, p: &Poly, x: f64) -> f64 {
        let psi = self.weight.signed_moments(p.coeffs.len() - 1, x);
        self.phi_scale() * dot(&p.coeffs, &psi)
    }

    /// `Φ_k(x)` for every member.
    pub fn phi_all(&self, x: f64) -> Vec<f64> {
        let psi = self.weight.signed_moments(self.max_degree(), x);
        let s = self.phi_scale();
        self.coeffs.iter().map(|p| s * dot(&p.coeffs, &psi)).collect()
    }

    pub fn to_record(&self) -> FamilyRecord {
        FamilyRecord {
            n: self.n,
            kind: self.kind,
            weight: self.weight.label.clone(),
            coeffs: self.coeffs.iter().map(|p| p.coeffs.clone()).collect(),
            norms: self.norms.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("family serialization cannot fail")
    }

    /// Rebuilds a family from its record; `weight` must carry the recorded label.
    pub fn from_record(rec: FamilyRecord, weight: WeightSpec) -> Result<Self> {
        if rec.weight != weight.label {
            return Err(Error::InvalidArgument(format!("record weight '{}' != '{}'", rec.weight, weight.label)));
        }
        if rec.coeffs.len() != rec.n || rec.norms.len() != rec.n / 2 {
            return Err(Error::InvalidArgument("record sizes inconsistent with n".into()));
        }
        for (k, c) in rec.coeffs.iter().enumerate() {
            if !(c.len() == k + 1 && c[k] == 1.0) {
                return Err(Error::InvalidArgument(format!("polynomial {k} is not monic of degree {k}")));
            }
        }
        Ok(Self { n: rec.n, coeffs: rec.coeffs.into_iter().map(Poly::new).collect(), norms: rec.norms, weight, kind: rec.kind })
    }

    pub fn from_json(s: &str, weight: WeightSpec) -> Result<Self> {
        let rec: FamilyRecord = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::from_record(rec, weight)
    }

    /// Largest violation of the skew-orthogonality conditions, relative to the smallest norm.
    /// β=1 families only; Ginibre families are checked with [`ginoe_gram`].
    pub fn skew_orthogonality_defect(&self) -> Result<f64> {
        let rmin = self.norms.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            for k in j + 1..self.n {
                let g = skew_inner(&self.coeffs[j], &self.coeffs[k], &self.weight)?;
                let dev = if j % 2 == 0 && k == j + 1 { (g / self.norms[j / 2] - 1.0).abs() } else { g.abs() / rmin };
                worst = worst.max(dev);
            }
        }
        Ok(worst)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Φ_k(x)` of family member `k`.
pub fn phi_transform(family: &SkewOrthogonalFamily, k: usize, x: f64) -> Result<f64> {
    let p = family
        .coeffs
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("k = {k} outside 0..{}", family.n)))?;
    Ok(family.phi_of(p, x))
}

/// `⟨f|g⟩ = ½∬ e^{-V(x)} f(x) e^{-V(y)} g(y) sgn(y−x) dx dy = −∫ e^{-V} f Φ_g`.
pub fn skew_inner(f: &Poly, g: &Poly, weight: &WeightSpec) -> Result<f64> {
    let degree = f.coeffs.len() + g.coeffs.len();
    let dg = g.coeffs.len() - 1;
    let integrand = |x: f64| {
        let psi = weight.signed_moments(dg, x);
        let phi_g = 0.5 * dot(&g.coeffs, &psi);
        f.eval_weighted(x, weight.v(x)) * phi_g
    };
    // Tolerance tracks the largest even moment reached, which bounds the integrand mass.
    let mass = weight.moments(degree.min(MAX_MONOMIAL)).iter().step_by(2).cloned().fold(1.0, f64::max);
    let scale = norm1(f) * norm1(g) * mass;
    Ok(-integrate_line(integrand, &weight.line_decay(degree), INNER_TOL * scale.max(1.0))?)
}

fn norm1(p: &Poly) -> f64 {
    p.coeffs.iter().map(|c| c.abs()).sum()
}

/// Skew Gram-Schmidt over monomials in degree order; `R_{2n+1}` carries no `R_{2n}` component.
pub fn build_family_beta1(weight: &WeightSpec, n: usize) -> Result<SkewOrthogonalFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("family size must be at least 2, got {n}")));
    }
    let mut coeffs: Vec<Poly> = Vec::with_capacity(n);
    let mut norms: Vec<f64> = Vec::new();
    for k in 0..n {
        let mut c = Poly::monomial(k);
        for m in 0..norms.len() {
            let (even, odd) = (&coeffs[2 * m], &coeffs[2 * m + 1]);
            let a = skew_inner(&c, odd, weight)? / norms[m];
            let b = skew_inner(&c, even, weight)? / norms[m];
            c = c.add_scaled(even, -a).add_scaled(odd, b);
        }
        c.coeffs.truncate(k + 1);
        c.coeffs[k] = 1.0;
        if k % 2 == 1 {
            let r = skew_inner(&coeffs[k - 1], &c, weight)?;
            if !(r.abs() >= 1e-12) {
                return Err(Error::SkewBreakdown { pair: k / 2, norm: r.abs() });
            }
            norms.push(r);
        }
        coeffs.push(c);
    }
    Ok(SkewOrthogonalFamily { n, coeffs, norms, weight: weight.clone(), kind: FamilyKind::GeneralBeta1 })
}

/// `p_{2j} = x^{2j}`, `p_{2j+1} = x^{2j+1} − 2j x^{2j−1}`, `r_{j-1} = 2√(2π) Γ(2j−1)`.
pub fn ginoe_family(n: usize) -> Result<SkewOrthogonalFamily> {
    if n < 1 {
        return Err(Error::InvalidArgument("family size must be positive".into()));
    }
    let coeffs = (0..n)
        .map(|i| {
            let mut p = Poly::monomial(i);
            if i % 2 == 1 && i >= 3 {
                p.coeffs[i - 2] = -((i - 1) as f64);
            }
            p
        })
        .collect();
    let norms = (1..=n / 2).map(|j| Ok(2.0 * SQRT_2PI * gamma((2 * j - 1) as f64)?)).collect::<Result<Vec<_>>>()?;
    Ok(SkewOrthogonalFamily { n, coeffs, norms, weight: WeightSpec::gaussian(), kind: FamilyKind::Ginoe })
}

/// `α_{j,k}[1]` for all pairs (0-based), `−∫ e^{-x²/2} p_j(x) Φ_k(x) dx`.
pub fn ginoe_alpha(family: &SkewOrthogonalFamily) -> Result<Vec<Vec<f64>>> {
    let n = family.n;
    let deg = 2 * family.max_degree();
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in j + 1..n {
            let (pj, pk) = (&family.coeffs[j], &family.coeffs[k]);
            let v = integrate_line(
                |x| -pj.eval_weighted(x, 0.5 * x * x) * family.phi_of(pk, x),
                &LineDecay::gaussian(deg),
                INNER_TOL * (1.0 + family.norms.last().copied().unwrap_or(1.0)),
            )?;
            out[j][k] = v;
            out[k][j] = -v;
        }
    }
    Ok(out)
}

/// `β_{j,k}[1]` for all pairs (0-based) via the half-plane rule, with the imaginary residue.
pub fn ginoe_beta(family: &SkewOrthogonalFamily, tol: f64) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = family.n;
    let decay = PlaneDecay::gaussian(2 * family.max_degree());
    let sweep = |level: u32| -> Result<Vec<Complex64>> {
        let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
        let mut pw = vec![Complex64::new(0.0, 0.0); n];
        let mut pb = vec![Complex64::new(0.0, 0.0); n];
        for (x, y, w) in halfplane_nodes(&decay, level)? {
            let z = Complex64::new(x, y);
            let weight = 2.0 * w * (y * y - x * x).exp() * erfc(std::f64::consts::SQRT_2 * y);
            if weight == 0.0 {
                continue;
            }
            for i in 0..n {
                pw[i] = family.coeffs[i].eval_complex(z);
                pb[i] = family.coeffs[i].eval_complex(z.conj());
            }
            for j in 0..n {
                for k in j + 1..n {
                    acc[j * n + k] += Complex64::i() * weight * (pw[j] * pb[k] - pw[k] * pb[j]);
                }
            }
        }
        Ok(acc)
    };
    let coarse = sweep(1)?;
    let fine = sweep(2)?;
    let mut out = vec![vec![0.0; n]; n];
    let mut residue: f64 = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            let v = fine[j * n + k];
            let est = (v - coarse[j * n + k]).norm();
            let scale = 1.0 + v.norm();
            if est > tol * scale {
                return Err(Error::QuadratureNonConvergence { estimate: est, tol: tol * scale });
            }
            residue = residue.max(v.im.abs() / scale);
            out[j][k] = v.re;
            out[k][j] = -v.re;
        }
    }
    Ok((out, residue))
}

/// Full skew Gram matrix `G_{j,k} = α_{j,k} + β_{j,k}` (0-based indices).
pub fn ginoe_gram(family: &SkewOrthogonalFamily) -> Result<Vec<Vec<f64>>> {
    let a = ginoe_alpha(family)?;
    let (b, residue) = ginoe_beta(family, 1e-9)?;
    if residue > 1e-9 {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(a.iter().zip(&b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect()).collect())
}

/// `G_{j,k}` for 1-based `j, k`.
pub fn ginoe_skew_inner(family: &SkewOrthogonalFamily, j: usize, k: usize) -> Result<f64> {
    if j == 0 || k == 0 || j > family.n || k > family.n {
        return Err(Error::InvalidArgument(format!("indices ({j}, {k}) outside 1..={}", family.n)));
    }
    if j == k {
        return Ok(0.0);
    }
    let (lo, hi) = (j.min(k) - 1, j.max(k) - 1);
    let sub = SkewOrthogonalFamily {
        n: 2,
        coeffs: vec![family.coeffs[lo].clone(), family.coeffs[hi].clone()],
        norms: vec![1.0],
        weight: family.weight.clone(),
        kind: family.kind,
    };
    let g = ginoe_gram(&sub)?[0][1];
    Ok(if j < k { g } else { -g })
}

/// `ν_l = ½∫ e^{-V} R_{l-1}` for `l = 1..=N`, by quadrature.
pub fn half_moments(family: &SkewOrthogonalFamily) -> Result<Vec<f64>> {
    family
        .coeffs
        .iter()
        .map(|p| {
            let w = &family.weight;
            integrate_line(|x| 0.5 * p.eval_weighted(x, w.v(x)), &w.line_decay(p.coeffs.len()), INNER_TOL * norm1(p))
        })
        .collect()
}

/// `2^{-N(N+1)/4} / ∏_{l=1}^N Γ(l/2)`.
pub fn sinclair_prefactor(n: usize) -> Result<f64> {
    let mut denom = 1.0;
    for l in 1..=n {
        denom *= gamma(l as f64 / 2.0)?;
    }
    Ok(2f64.powf(-((n * (n + 1)) as f64) / 4.0) / denom)
}

fn bordered(g: &[Vec<f64>], border: Option<&[f64]>) -> Result<AntisymmetricMatrix<f64>> {
    let n = g.len();
    match border {
        None => AntisymmetricMatrix::from_upper(n, |i, j| g[i][j]),
        Some(b) => AntisymmetricMatrix::from_upper(n + 1, |i, j| if j == n { b[i] } else { g[i][j] }),
    }
}

/// `Z_N[1,1]`: prefactor times `Pf[G]`, bordered by the moments `2ν_l` when `N` is odd.
pub fn sinclair_normalization(n: usize) -> Result<f64> {
    let fam = ginoe_family(n)?;
    let g = ginoe_gram(&fam)?;
    let border: Option<Vec<f64>> = if n % 2 == 1 { Some(half_moments(&fam)?.iter().map(|v| 2.0 * v).collect()) } else { None };
    Ok(sinclair_prefactor(n)? * pfaffian(&bordered(&g, border.as_deref())?))
}

/// Probability that all `N` eigenvalues of an `N x N` real Ginibre matrix are real:
/// `Z_N[1, 0]`, the prefactor times `Pf[α]` (bordered for odd `N`).
pub fn ginoe_all_real_probability(n: usize) -> Result<f64> {
    let fam = ginoe_family(n)?;
    let a = ginoe_alpha(&fam)?;
    let border: Option<Vec<f64>> = if n % 2 == 1 { Some(half_moments(&fam)?.iter().map(|v| 2.0 * v).collect()) } else { None };
    if n == 1 {
        return Ok(1.0);
    }
    Ok(sinclair_prefactor(n)? * pfaffian(&bordered(&a, border.as_deref())?))
}

/// Odd-size companion: `R̂_n = R_n − c_n R_{N-1}` with `c_n = ν_{n+1}/ν_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HattedFamily {
    pub base: SkewOrthogonalFamily,
    pub coeffs: Vec<Poly>,
    /// `c_n`, with `c_{N-1} = 0` since `R̂_{N-1} = R_{N-1}`.
    pub corrections: Vec<f64>,
    /// `r̂_0..r̂_{(N-1)/2}`; the last entry is `∫ e^{-V} F R_{N-1}` (β=1) or `ν_N` (Ginibre).
    pub norms: Vec<f64>,
    /// `ν_1..ν_N`.
    pub nu: Vec<f64>,
    pub f_const: f64,
}

impl HattedFamily {
    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn last_norm(&self) -> f64 {
        *self.norms.last().unwrap()
    }

    /// `Φ̂_n(x)` for every member, from `Φ̂_n = Φ_n − c_n Φ_{N-1}`.
    pub fn phi_all(&self, x: f64) -> Vec<f64> {
        let phi = self.base.phi_all(x);
        let last = phi[self.n() - 1];
        phi.iter().zip(&self.corrections).map(|(p, c)| p - c * last).collect()
    }
}

fn hat(base: SkewOrthogonalFamily) -> Result<HattedFamily> {
    let n = base.n;
    if n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("hatted family needs odd N, got {n}")));
    }
    let nu = half_moments(&base)?;
    let nu_n = nu[n - 1];
    if !(nu_n.abs() >= 1e-12) {
        return Err(Error::DegenerateWeight(nu_n.abs()));
    }
    let last = base.coeffs[n - 1].clone();
    // moments at quadrature-noise level are parity zeros
    let floor = 1e-14 * nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut corrections: Vec<f64> = nu.iter().map(|v| if v.abs() <= floor { 0.0 } else { v / nu_n }).collect();
    corrections[n - 1] = 0.0;
    let coeffs = base.coeffs.iter().zip(&corrections).map(|(p, &c)| if c == 0.0 { p.clone() } else { p.add_scaled(&last, -c) }).collect();
    let mut norms = base.norms.clone();
    norms.push(nu_n);
    Ok(HattedFamily { base, coeffs, corrections, norms, nu, f_const: 0.5 })
}

/// Hatted β=1 family for odd `N` (Gram-Schmidt family of size `N`, whose `R_{N-1}` is unpaired).
pub fn hatted_beta1(family: &SkewOrthogonalFamily) -> Result<HattedFamily> {
    if family.kind != FamilyKind::GeneralBeta1 {
        return Err(Error::InvalidArgument("hatted_beta1 needs a β=1 family".into()));
    }
    hat(family.clone())
}

/// Hatted Ginibre family for odd `N`.
pub fn hatted_ginoe(n: usize) -> Result<HattedFamily> {
    if n == 1 {
        let base = ginoe_family(1)?;
        let nu = half_moments(&base)?;
        return Ok(HattedFamily { coeffs: base.coeffs.clone(), corrections: vec![0.0], norms: vec![nu[0]], nu, base, f_const: 0.5 });
    }
    hat(ginoe_family(n)?)
}

/// Assembled generating-function Pfaffian and its matrix.
#[derive(Debug, Clone)]
pub struct GeneratingPfaffian {
    pub matrix: AntisymmetricMatrix<f64>,
    pub value: f64,
}

/// `γ_{j,k} = ⟨R_{j-1}|R_{k-1}⟩` for all members.
pub fn gamma_matrix(family: &SkewOrthogonalFamily) -> Result<Vec<Vec<f64>>> {
    let n = family.n;
    let mut g = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in j + 1..n {
            let v = skew_inner(&family.coeffs[j], &family.coeffs[k], &family.weight)?;
            g[j][k] = v;
            g[k][j] = -v;
        }
    }
    Ok(g)
}

/// `Pf[γ_{j,k}]` at `a = 1`, even `N`.
pub fn generating_pfaffian_even(family: &SkewOrthogonalFamily) -> Result<GeneratingPfaffian> {
    if family.n % 2 != 0 {
        return Err(Error::InvalidArgument("even generating Pfaffian needs even N".into()));
    }
    let matrix = bordered(&gamma_matrix(family)?, None)?;
    Ok(GeneratingPfaffian { value: pfaffian(&matrix), matrix })
}

/// `Pf[[γ, ν], [−νᵀ, 0]]` at `a = 1`, odd `N`.
pub fn generating_pfaffian_odd(family: &SkewOrthogonalFamily) -> Result<GeneratingPfaffian> {
    if family.n % 2 != 1 {
        return Err(Error::InvalidArgument("odd generating Pfaffian needs odd N".into()));
    }
    let nu = half_moments(family)?;
    let g = if family.n == 1 { vec![vec![0.0]] } else { gamma_matrix(family)? };
    let matrix = bordered(&g, Some(&nu))?;
    Ok(GeneratingPfaffian { value: pfaffian(&matrix), matrix })
}
