//! Odd-`N` correlations from even-`N` kernels: eliminate one eigenvalue's rows and columns
//! from the correlation Pfaffian, then send that eigenvalue to `+∞`.

use crate::error::{Error, Result};
use crate::kernels::{rel_dev, Beta1Basis, Beta1Kernel, Ensemble, GinoeBasis, GinoeKernel, Point, PointConfiguration};
use crate::pfaffian::{pfaffian_balanced as pfaffian, AntisymmetricMatrix};
use crate::scalar::Scalar;
use crate::skew::{build_family_beta1, half_moments, hatted_beta1, WeightSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Default `x_m` schedule.
pub const DEFAULT_SCHEDULE: [f64; 4] = [6.0, 8.0, 10.0, 12.0];
/// `x_m` used for the weight-stripped evaluation of the limit itself.
pub const LIMIT_X_M: f64 = 1e12;
/// Smallest usable `|S(x_m, x_m)|`.
pub const UNDERFLOW_GUARD: f64 = 1e-300;
/// Allowed growth between successive deviations on the schedule.
pub const MONOTONE_SLACK: f64 = 1.1;
/// Required agreement between reduced and direct odd kernels at the last schedule entry.
pub const LIMIT_TOL: f64 = 1e-3;

/// `(D*, S*, Ĩ*)` at one pair of points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Starred {
    pub d: f64,
    pub s: f64,
    pub i_tilde: f64,
}

fn require_even(n: usize) -> Result<()> {
    if n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("reduction starts from an even kernel, got N = {n}")));
    }
    Ok(())
}

fn largest_usable(s_diag: impl Fn(f64) -> f64, x_m: f64) -> f64 {
    let mut x = x_m;
    while x > 0.0 && !(s_diag(x).abs() > UNDERFLOW_GUARD) {
        x -= 0.25;
    }
    x.max(0.0)
}

fn guard(s_mm: f64, x_m: f64, s_diag: impl Fn(f64) -> f64) -> Result<()> {
    if !(s_mm.abs() > UNDERFLOW_GUARD) {
        return Err(Error::Underflow { x_m, largest_usable: largest_usable(s_diag, x_m) });
    }
    Ok(())
}

/// Starred combinations from precomputed bases.
pub fn starred_from(k: &Beta1Kernel, bi: &Beta1Basis, bj: &Beta1Basis, bm: &Beta1Basis) -> Starred {
    let smm = k.s_basis(bm, bm);
    let d = k.d_basis(bi, bj) - k.d_basis(bi, bm) * k.s_basis(bm, bj) / smm - k.s_basis(bm, bi) * k.d_basis(bm, bj) / smm;
    let s = k.s_basis(bi, bj) - k.s_basis(bi, bm) * k.s_basis(bm, bj) / smm - k.d_basis(bm, bj) * k.i_basis(bi, bm) / smm;
    let i_tilde = k.i_basis(bi, bj) - k.s_basis(bi, bm) * k.i_basis(bm, bj) / smm - k.s_basis(bj, bm) * k.i_basis(bi, bm) / smm;
    Starred { d, s, i_tilde }
}

/// `D*, S*, Ĩ*` at `(x_i, x_j)` after eliminating `x_m`, for an even β=1 kernel.
pub fn reduce_star(k: &Beta1Kernel, x_i: f64, x_j: f64, x_m: f64) -> Result<Starred> {
    require_even(k.n())?;
    let bm = k.basis(x_m);
    guard(k.s_basis(&bm, &bm), x_m, |x| k.s(x, x))?;
    Ok(starred_from(k, &k.basis(x_i), &k.basis(x_j), &bm))
}

/// Matrix of starred cells `[[−Ĩ*, S*], [−S*(b,a), D*]]` over `points`.
pub fn starred_matrix(k: &Beta1Kernel, points: &[f64], bm: &Beta1Basis) -> Result<AntisymmetricMatrix<f64>> {
    let bases: Vec<Beta1Basis> = points.iter().map(|&x| k.basis(x)).collect();
    let n = bases.len();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let a = starred_from(k, &bases[i], &bases[j], bm);
            let b = starred_from(k, &bases[j], &bases[i], bm);
            m[2 * i][2 * j] = -a.i_tilde;
            m[2 * i][2 * j + 1] = a.s;
            m[2 * i + 1][2 * j] = -b.s;
            m[2 * i + 1][2 * j + 1] = a.d;
        }
    }
    AntisymmetricMatrix::with_tolerance(m, 1e-9)
}

/// Eliminates the last two rows and columns: returns `c = A[n-2, n-1]` and the complement
/// `A' = A_11 − A_12 C⁻¹ A_21`, so that `Pf A = c · Pf A'`.
pub fn schur_reduce<T: Scalar>(full: &AntisymmetricMatrix<T>) -> Result<(T, AntisymmetricMatrix<T>)> {
    let n = full.dim();
    if n < 4 {
        return Err(Error::InvalidDimension { dim: n, reason: "Schur reduction needs dimension >= 4" });
    }
    let (p, q) = (n - 2, n - 1);
    let c = full.get(p, q);
    if !(c.modulus() > UNDERFLOW_GUARD) {
        return Err(Error::InvalidArgument("eliminated pivot underflowed".into()));
    }
    let inv = T::one() / c;
    let r = AntisymmetricMatrix::from_upper(n - 2, |a, b| full.get(a, b) + (full.get(a, p) * full.get(q, b) - full.get(a, q) * full.get(p, b)) * inv)?;
    Ok((c, r))
}

fn pf_rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// Relative gap between `Pf[full]` and `S(x_m, x_m) Pf[starred]` for β=1.
pub fn pf3_check_beta1(k: &Beta1Kernel, points: &[f64], x_m: f64) -> Result<f64> {
    require_even(k.n())?;
    require_occupiable(k.n(), points.len() + 1)?;
    let mut all: Vec<f64> = points.to_vec();
    all.push(x_m);
    PointConfiguration::real(all.clone())?;
    let bases: Vec<Beta1Basis> = all.iter().map(|&x| k.basis(x)).collect();
    let full = pfaffian(&k.matrix_bases(&bases.iter().collect::<Vec<_>>())?);
    let bm = &bases[points.len()];
    let smm = k.s_basis(bm, bm);
    guard(smm, x_m, |x| k.s(x, x))?;
    let reduced = smm * pfaffian(&starred_matrix(k, points, bm)?);
    Ok(pf_rel(reduced.into(), full.into()))
}

/// Relative gap between `Pf[full]` and the pivot times the Pfaffian of the Schur complement
/// for the Ginibre kernel, with the real point `x_m` moved last.
pub fn pf3_check_ginoe(k: &GinoeKernel, config: &PointConfiguration, x_m: f64) -> Result<f64> {
    require_even(k.n())?;
    require_occupiable(k.n(), config.reals().len() + 2 * config.complexes().len() + 1)?;
    let pts = with_last_real(config, x_m)?;
    let bases: Vec<GinoeBasis> = pts.iter().map(|&p| k.basis(p)).collect();
    let full = k.matrix_bases(&bases.iter().collect::<Vec<_>>())?;
    let (c, reduced) = schur_reduce(&full)?;
    Ok(pf_rel(c * pfaffian(&reduced), pfaffian(&full)))
}

/// Configurations holding more eigenvalues than `N` have identically vanishing correlations.
fn require_occupiable(n: usize, eigenvalues: usize) -> Result<()> {
    if eigenvalues > n {
        return Err(Error::InvalidArgument(format!("{eigenvalues} eigenvalues cannot be placed in a size-{n} spectrum")));
    }
    Ok(())
}

fn with_last_real(config: &PointConfiguration, x_m: f64) -> Result<Vec<Point>> {
    let mut reals = config.reals().to_vec();
    reals.push(x_m);
    PointConfiguration::new(reals, config.complexes().to_vec())?;
    let mut pts = config.points();
    pts.push(Point::Real(x_m));
    Ok(pts)
}

/// Relative gap between the Pfaffians with `x_m` in its natural position (after the other reals)
/// and moved to the last row and column block.
pub fn block_move_check(k: &GinoeKernel, config: &PointConfiguration, x_m: f64) -> Result<f64> {
    require_occupiable(k.n(), config.reals().len() + 2 * config.complexes().len() + 1)?;
    let moved = with_last_real(config, x_m)?;
    let n1 = config.reals().len();
    let mut natural = config.points();
    natural.insert(n1, Point::Real(x_m));
    let eval = |pts: &[Point]| -> Result<Complex64> {
        let bases: Vec<GinoeBasis> = pts.iter().map(|&p| k.basis(p)).collect();
        k.rho_bases(&bases.iter().collect::<Vec<_>>())
    };
    Ok(pf_rel(eval(&moved)?, eval(&natural)?))
}

/// Exact kernel value next to its large-`x_m` leading form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEntry {
    pub name: String,
    pub exact: f64,
    pub asymptotic: f64,
}

impl AsymptoticEntry {
    pub fn ratio(&self) -> f64 {
        self.exact / self.asymptotic
    }
}

/// The five leading-order forms of the even β=1 kernel with one argument at `x_m`.
pub fn asymptotic_forms(k: &Beta1Kernel, x_i: f64, x_m: f64) -> Result<Vec<AsymptoticEntry>> {
    let n = k.n();
    require_even(n)?;
    let fam = k.family();
    let nu = half_moments(fam)?;
    let r = &fam.norms;
    let last = r[n / 2 - 1];
    let w = k.weight();
    let (vi, vm) = (w.v(x_i), w.v(x_m));
    let rm = fam.coeffs[n - 1].eval(x_m);
    let phi_i = fam.phi_all(x_i);
    let ri: Vec<f64> = fam.coeffs.iter().map(|p| p.eval(x_i)).collect();
    let d = (-(vi + vm)).exp() / last * ri[n - 2] * rm;
    let s_im = (-vm).exp() / last * phi_i[n - 2] * rm;
    let s_mi: f64 = (0..n / 2).map(|k| (-vi).exp() / r[k] * (ri[2 * k + 1] * nu[2 * k] - ri[2 * k] * nu[2 * k + 1])).sum();
    let s_mm = (-vm).exp() / last * rm * nu[n - 2];
    let i_im: f64 = (0..n / 2).map(|k| (phi_i[2 * k + 1] * nu[2 * k] - phi_i[2 * k] * nu[2 * k + 1]) / r[k]).sum::<f64>() + 0.5;
    let entry = |name: &str, exact: f64, asymptotic: f64| AsymptoticEntry { name: name.into(), exact, asymptotic };
    Ok(vec![
        entry("D(x_i,x_m)", k.d(x_i, x_m), d),
        entry("S(x_i,x_m)", k.s(x_i, x_m), s_im),
        entry("S(x_m,x_i)", k.s(x_m, x_i), s_mi),
        entry("S(x_m,x_m)", k.s(x_m, x_m), s_mm),
        entry("I(x_i,x_m)", k.i_tilde(x_i, x_m), i_im),
    ])
}

/// Deviation history of one kernel entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryTrace {
    pub name: String,
    pub direct: f64,
    pub deviations: Vec<f64>,
    pub limit_deviation: f64,
}

impl EntryTrace {
    pub fn final_deviation(&self) -> f64 {
        *self.deviations.last().unwrap_or(&f64::NAN)
    }

    pub fn monotone(&self) -> bool {
        self.deviations.windows(2).all(|w| w[1] <= MONOTONE_SLACK * w[0])
    }
}

/// Reduced-vs-direct comparison over an `x_m` schedule plus the stripped limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub ensemble: Ensemble,
    pub n_even: usize,
    pub x_m: Vec<f64>,
    pub limit_x_m: f64,
    pub tolerance: f64,
    pub entries: Vec<EntryTrace>,
}

impl ReductionReport {
    pub fn final_max(&self) -> f64 {
        self.entries.iter().map(|e| e.final_deviation()).fold(0.0, f64::max)
    }

    pub fn limit_max(&self) -> f64 {
        self.entries.iter().map(|e| e.limit_deviation).fold(0.0, f64::max)
    }

    pub fn monotone(&self) -> bool {
        self.entries.iter().all(|e| e.monotone())
    }

    pub fn entries_matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a EntryTrace> + 'a {
        self.entries.iter().filter(move |e| e.name.starts_with(prefix))
    }

    pub fn passes(&self) -> bool {
        self.final_max() <= self.tolerance && self.monotone()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Long format: `entry,x_m,deviation`, the stripped limit included.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("entry,x_m,deviation\n");
        for e in &self.entries {
            for (x, d) in self.x_m.iter().zip(&e.deviations) {
                let _ = writeln!(out, "{},{x},{d:.6e}", e.name);
            }
            let _ = writeln!(out, "{},{:e},{:.6e}", e.name, self.limit_x_m, e.limit_deviation);
        }
        out
    }
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("x_m schedule must be nonempty and increasing".into()));
    }
    Ok(())
}

fn fmt_point(p: &Point) -> String {
    match p {
        Point::Real(x) => format!("{x}"),
        Point::Complex(z) => format!("{}{:+}i", z.re, z.im),
    }
}

/// Starred β=1 kernels from the size-`N` even kernel against the odd kernel built
/// independently at size `N − 1`, over all ordered pairs of `points`.
pub fn verify_odd_limit_beta1(weight: &WeightSpec, n_even: usize, points: &[f64], schedule: &[f64]) -> Result<ReductionReport> {
    require_even(n_even)?;
    if n_even < 4 {
        return Err(Error::InvalidArgument(format!("reduction check needs N >= 4, got {n_even}")));
    }
    check_schedule(schedule)?;
    PointConfiguration::real(points.to_vec())?;
    let even = Beta1Kernel::even(&build_family_beta1(weight, n_even)?, n_even)?;
    let odd = Beta1Kernel::odd(&hatted_beta1(&build_family_beta1(weight, n_even - 1)?)?)?;
    let be: Vec<Beta1Basis> = points.iter().map(|&x| even.basis(x)).collect();
    let bo: Vec<Beta1Basis> = points.iter().map(|&x| odd.basis(x)).collect();

    struct Slot {
        name: String,
        pick: fn(&Starred) -> f64,
        i: usize,
        j: usize,
        direct: f64,
    }
    let mut slots = Vec::new();
    for i in 0..points.len() {
        for j in 0..points.len() {
            let tag = format!("({},{})", points[i], points[j]);
            slots.push(Slot { name: format!("S*{tag}"), pick: |s| s.s, i, j, direct: odd.s_basis(&bo[i], &bo[j]) });
            if i < j {
                slots.push(Slot { name: format!("D*{tag}"), pick: |s| s.d, i, j, direct: odd.d_basis(&bo[i], &bo[j]) });
                slots.push(Slot { name: format!("I*{tag}"), pick: |s| s.i_tilde, i, j, direct: odd.i_basis(&bo[i], &bo[j]) });
            }
        }
    }
    let devs_at = |bm: &Beta1Basis| -> Vec<f64> {
        slots.iter().map(|sl| rel_dev(((sl.pick)(&starred_from(&even, &be[sl.i], &be[sl.j], bm))).into(), sl.direct.into())).collect()
    };
    let mut table: Vec<Vec<f64>> = Vec::new();
    for &x_m in schedule {
        let bm = even.basis(x_m);
        guard(even.s_basis(&bm, &bm), x_m, |x| even.s(x, x))?;
        table.push(devs_at(&bm));
    }
    let limit = devs_at(&even.basis_with(LIMIT_X_M, false));
    let entries = slots
        .iter()
        .enumerate()
        .map(|(e, sl)| EntryTrace { name: sl.name.clone(), direct: sl.direct, deviations: table.iter().map(|row| row[e]).collect(), limit_deviation: limit[e] })
        .collect();
    Ok(ReductionReport { ensemble: Ensemble::Beta1Line, n_even, x_m: schedule.to_vec(), limit_x_m: LIMIT_X_M, tolerance: LIMIT_TOL, entries })
}

fn slot_name(points: &[Point], a: usize, b: usize) -> String {
    let (i, j) = (a / 2, b / 2);
    let kind = |p: &Point| if p.is_real() { 'r' } else { 'c' };
    let f = match (a % 2, b % 2) {
        (0, 0) => "D",
        (0, 1) => "S",
        (1, 0) => "-S^T",
        _ => "I",
    };
    format!("{f}_{}{}({},{})", kind(&points[i]), kind(&points[j]), fmt_point(&points[i]), fmt_point(&points[j]))
}

/// Schur-reduced Ginibre kernel of size `N` against the odd kernel at `N − 1`, entrywise over
/// the configuration, with a real `x_m` moved to the last block.
pub fn verify_odd_limit_ginoe(n_even: usize, config: &PointConfiguration, schedule: &[f64]) -> Result<ReductionReport> {
    require_even(n_even)?;
    if n_even < 4 {
        return Err(Error::InvalidArgument(format!("reduction check needs N >= 4, got {n_even}")));
    }
    check_schedule(schedule)?;
    let even = GinoeKernel::new(n_even)?;
    let odd = GinoeKernel::new(n_even - 1)?;
    let points = config.points();
    let bo: Vec<GinoeBasis> = points.iter().map(|&p| odd.basis(p)).collect();
    let direct = odd.matrix_bases(&bo.iter().collect::<Vec<_>>())?;
    let be: Vec<GinoeBasis> = points.iter().map(|&p| even.basis(p)).collect();
    let dim = direct.dim();
    let reduced_at = |bm: GinoeBasis| -> Result<AntisymmetricMatrix<Complex64>> {
        let mut all: Vec<&GinoeBasis> = be.iter().collect();
        all.push(&bm);
        let full = even.matrix_bases(&all)?;
        Ok(schur_reduce(&full)?.1)
    };
    let mut table = Vec::new();
    for &x_m in schedule {
        with_last_real(config, x_m)?;
        let bm = even.basis(Point::Real(x_m));
        let smm = even.s_basis(&bm, &bm).re;
        guard(smm, x_m, |x| even.s(Point::Real(x), Point::Real(x)).re)?;
        table.push(reduced_at(bm)?);
    }
    let limit = reduced_at(even.basis_with(Point::Real(LIMIT_X_M), false))?;
    let mut entries = Vec::new();
    for a in 0..dim {
        for b in a + 1..dim {
            let d = direct.get(a, b);
            entries.push(EntryTrace {
                name: slot_name(&points, a, b),
                direct: d.re,
                deviations: table.iter().map(|m| rel_dev(m.get(a, b), d)).collect(),
                limit_deviation: rel_dev(limit.get(a, b), d),
            });
        }
    }
    Ok(ReductionReport { ensemble: Ensemble::Ginoe, n_even, x_m: schedule.to_vec(), limit_x_m: LIMIT_X_M, tolerance: LIMIT_TOL, entries })
}

/// Ensemble selector for the factorisation test.
#[derive(Debug, Clone)]
pub enum FactorisationTarget {
    Beta1(WeightSpec),
    Ginoe,
}

/// `ρ^N_(m)(x_1..x_{m−1}, x_m) / [ρ^N_(1)(x_m) ρ^{N−1}_(m−1)(x_1..x_{m−1})]` along the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorisationReport {
    pub n: usize,
    pub m: usize,
    pub points: Vec<f64>,
    pub x_m: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl FactorisationReport {
    pub fn final_deviation(&self) -> f64 {
        (self.ratios.last().copied().unwrap_or(f64::NAN) - 1.0).abs()
    }

    pub fn monotone(&self) -> bool {
        self.ratios.windows(2).all(|w| (w[1] - 1.0).abs() <= MONOTONE_SLACK * (w[0] - 1.0).abs())
    }
}

enum Rho {
    Beta1(Beta1Kernel),
    Ginoe(GinoeKernel),
}

impl Rho {
    fn new(t: &FactorisationTarget, n: usize) -> Result<Self> {
        Ok(match t {
            FactorisationTarget::Beta1(w) => Rho::Beta1(Beta1Kernel::for_weight(w, n)?),
            FactorisationTarget::Ginoe => Rho::Ginoe(GinoeKernel::new(n)?),
        })
    }

    fn eval(&self, xs: &[f64]) -> Result<f64> {
        match self {
            Rho::Beta1(k) => {
                let b: Vec<Beta1Basis> = xs.iter().map(|&x| k.basis(x)).collect();
                k.rho_bases(&b.iter().collect::<Vec<_>>())
            }
            Rho::Ginoe(k) => {
                let b: Vec<GinoeBasis> = xs.iter().map(|&x| k.basis(Point::Real(x))).collect();
                Ok(k.rho_bases(&b.iter().collect::<Vec<_>>())?.re)
            }
        }
    }
}

/// Factorisation of the `m`-point correlation as the last real point goes to `+∞`; `points` holds
/// the `m − 1` fixed points. Works for either parity of `N ≥ 2`.
pub fn factorisation_check(target: &FactorisationTarget, n: usize, points: &[f64], schedule: &[f64]) -> Result<FactorisationReport> {
    let m = points.len() + 1;
    if !(1..=4).contains(&m) || n < 2 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= min(4, N), got m = {m}, N = {n}")));
    }
    check_schedule(schedule)?;
    if m == 1 {
        return Ok(FactorisationReport { n, m, points: Vec::new(), x_m: schedule.to_vec(), ratios: vec![1.0; schedule.len()] });
    }
    let big = Rho::new(target, n)?;
    let small = Rho::new(target, n - 1)?;
    let base = small.eval(points)?;
    let mut ratios = Vec::new();
    for &x_m in schedule {
        let mut all = points.to_vec();
        all.push(x_m);
        PointConfiguration::real(all.clone())?;
        let one = big.eval(&[x_m])?;
        guard(one, x_m, |x| big.eval(&[x]).unwrap_or(0.0))?;
        ratios.push(big.eval(&all)? / (one * base));
    }
    Ok(FactorisationReport { n, m, points: points.to_vec(), x_m: schedule.to_vec(), ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfaffian::pfaffian_laplace;

    fn even4() -> Beta1Kernel {
        Beta1Kernel::for_weight(&WeightSpec::gaussian(), 4).unwrap()
    }

    #[test]
    fn schur_identity_on_random_matrix() {
        let vals = [0.3, -1.2, 0.7, 2.1, -0.4, 0.9, 1.5, -0.8, 0.2, -1.7, 1.1, 0.6, -0.3, 0.45, -2.2];
        let mut it = vals.iter().cycle();
        let a = AntisymmetricMatrix::from_upper(6, |_, _| *it.next().unwrap()).unwrap();
        let (c, r) = schur_reduce(&a).unwrap();
        assert!((c * pfaffian(&r) - pfaffian_laplace(&a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn starred_equals_schur_complement() {
        let k = even4();
        let pts = [0.5, -0.2, 1.1];
        let bm = k.basis(4.0);
        let star = starred_matrix(&k, &pts, &bm).unwrap();
        let mut all: Vec<Beta1Basis> = pts.iter().map(|&x| k.basis(x)).collect();
        all.push(bm);
        let full = k.matrix_bases(&all.iter().collect::<Vec<_>>()).unwrap();
        let (_, schur) = schur_reduce(&full).unwrap();
        for a in 0..star.dim() {
            for b in 0..star.dim() {
                assert!((star.get(a, b) - schur.get(a, b)).abs() < 1e-12, "({a},{b})");
            }
        }
    }

    #[test]
    fn starred_diagonal() {
        let s = reduce_star(&even4(), 0.3, 0.3, 6.0).unwrap();
        assert!(s.d.abs() < 1e-12 && s.i_tilde.abs() < 1e-12);
    }

    #[test]
    fn pf3_identity() {
        let k = even4();
        assert!(pf3_check_beta1(&k, &[0.5], 6.0).unwrap() < 1e-8);
        assert!(pf3_check_beta1(&k, &[0.5, -0.2], 6.0).unwrap() < 1e-8);
        assert!(pf3_check_beta1(&k, &[0.5, -0.2, 0.1, 0.9], 6.0).is_err());
        let over = PointConfiguration::new(vec![0.3, -0.4], vec![Complex64::new(0.2, 0.5)]).unwrap();
        for (n, c) in [
            (4, PointConfiguration::new(vec![0.3], vec![Complex64::new(0.2, 0.5)]).unwrap()),
            (4, PointConfiguration::real(vec![0.3, -0.4]).unwrap()),
            (6, over.clone()),
        ] {
            let g = GinoeKernel::new(n).unwrap();
            assert!(pf3_check_ginoe(&g, &c, 6.0).unwrap() < 1e-8);
            assert!(block_move_check(&g, &c, 6.0).unwrap() < 1e-12);
            let pts = with_last_real(&c, 6.0).unwrap();
            let b: Vec<GinoeBasis> = pts.iter().map(|&p| g.basis(p)).collect();
            assert!(g.rho_bases(&b.iter().collect::<Vec<_>>()).unwrap().norm() > 1e-30);
        }
        let g = GinoeKernel::new(4).unwrap();
        assert!(pf3_check_ginoe(&g, &over, 6.0).is_err());
    }

    #[test]
    fn underflow_reported() {
        let err = reduce_star(&even4(), 0.1, 0.2, 60.0).unwrap_err();
        match err {
            Error::Underflow { largest_usable, .. } => assert!(largest_usable > 30.0 && largest_usable < 60.0),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn asymptotic_ratios() {
        let k = even4();
        let mut prev = f64::INFINITY;
        for x_m in [4.0, 6.0, 8.0, 10.0] {
            let f = asymptotic_forms(&k, 0.5, x_m).unwrap();
            let dev = (f[0].ratio() - 1.0).abs();
            assert!(dev < prev);
            prev = dev;
            assert_eq!(f[3].exact.signum(), f[3].asymptotic.signum());
        }
        let a = asymptotic_forms(&k, 0.5, 10.0).unwrap()[4].exact;
        let b = asymptotic_forms(&k, 0.5, 14.0).unwrap()[4].exact;
        assert!((a - b).abs() < 1e-6);
        assert!(prev < 0.5);
    }

    #[test]
    fn stripped_limit_beta1() {
        for n in [4, 6] {
            let r = verify_odd_limit_beta1(&WeightSpec::gaussian(), n, &[0.5, -0.2], &DEFAULT_SCHEDULE).unwrap();
            assert!(r.limit_max() < 1e-8, "N={n}: {}", r.limit_max());
            assert!(r.final_max() < 0.1);
        }
    }

    #[test]
    fn stripped_limit_ginoe() {
        let c = PointConfiguration::new(vec![0.3, -0.4], vec![Complex64::new(0.2, 0.5)]).unwrap();
        let r = verify_odd_limit_ginoe(4, &c, &DEFAULT_SCHEDULE).unwrap();
        assert!(r.limit_max() < 1e-8, "{}", r.limit_max());
        assert!(r.to_csv().lines().count() > r.entries.len());
    }

    #[test]
    fn factorisation_trend() {
        let f = factorisation_check(&FactorisationTarget::Beta1(WeightSpec::gaussian()), 4, &[0.3], &[6.0, 8.0, 10.0, 12.0]).unwrap();
        assert!(f.final_deviation() < 2e-2, "{f:?}");
        let one = factorisation_check(&FactorisationTarget::Ginoe, 4, &[], &[10.0]).unwrap();
        assert_eq!(one.ratios, vec![1.0]);
    }
}
