//! Verification batteries driven by `oddrmt verify`.

use crate::args::EnsembleArg;
use crate::{bundle_for, CliError, CliResult};
use nalgebra::DMatrix;
use num_complex::Complex64;
use oddrmt::kernels::{dyson_recurrence_check, ginoe_summed_s, interrelations_check, Block, KernelBundle, Point, PointConfiguration};
use oddrmt::mc::ginoe_expected_real_count;
use oddrmt::pfaffian::{dual, pfaffian, pfaffian_laplace, qdet, AntisymmetricMatrix, QuaternionBlockMatrix};
use oddrmt::reduction::{block_move_check, pf3_check_beta1, pf3_check_ginoe, verify_odd_limit_beta1, verify_odd_limit_ginoe, ReductionReport, DEFAULT_SCHEDULE};
use oddrmt::skew::{build_family_beta1, ginoe_family, ginoe_gram, sinclair_normalization, WeightSpec};
use oddrmt::specfun::{gamma, SQRT_2PI};
use oddrmt::Scalar;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Relative accuracy of the Ginibre pair norms and of the Sinclair normalisation.
pub const NORM_TOL: f64 = 1e-5;
pub const SINCLAIR_TOL: f64 = 1e-4;
/// Probe points shared by the kernel, reduction and factorisation checks.
pub const BETA1_PROBES: [f64; 2] = [0.5, -0.2];
pub const GINOE_REAL_PROBES: [f64; 2] = [0.3, -0.4];
pub const GINOE_COMPLEX_PROBE: Complex64 = Complex64::new(0.2, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Pfaffian,
    Skew,
    Kernels,
    Reduction,
    All,
}

impl SuiteName {
    pub fn parse(s: &str) -> CliResult<Self> {
        Ok(match s {
            "pfaffian" => Self::Pfaffian,
            "skew" => Self::Skew,
            "kernels" => Self::Kernels,
            "reduction" => Self::Reduction,
            "all" => Self::All,
            _ => return Err(CliError::Usage(format!("unknown suite {s:?}; expected pfaffian, skew, kernels, reduction or all"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub pfaffian: f64,
    pub skew: f64,
    pub kernels: f64,
    pub summed: f64,
    pub reduction: f64,
    pub pf3: f64,
}

impl Tolerances {
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("tol_pfaffian", self.pfaffian),
            ("tol_skew", self.skew),
            ("tol_kernels", self.kernels),
            ("tol_summed", self.summed),
            ("tol_reduction", self.reduction),
            ("tol_pf3", self.pf3),
        ]
    }

    pub fn validate(&self) -> CliResult<()> {
        for (k, v) in self.named() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Usage(format!("{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

pub fn run_suite(suite: SuiteName, ensemble: EnsembleArg, n: usize, tols: &Tolerances, seed: u64) -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    let prefixed = |name: &str, checks: Vec<Check>| -> Vec<Check> {
        checks.into_iter().map(|c| Check { name: format!("{name}.{}", c.name), ..c }).collect()
    };
    if matches!(suite, SuiteName::Pfaffian | SuiteName::All) {
        out.extend(prefixed("pfaffian", pfaffian_suite(tols, seed)?));
    }
    if matches!(suite, SuiteName::Skew | SuiteName::All) {
        out.extend(prefixed("skew", skew_suite(ensemble, n, tols)?));
    }
    if matches!(suite, SuiteName::Kernels | SuiteName::All) {
        out.extend(prefixed("kernels", kernel_suite(ensemble, n, tols)?));
    }
    if matches!(suite, SuiteName::Reduction | SuiteName::All) {
        out.extend(prefixed("reduction", reduction_suite(ensemble, n, tols)?));
    }
    Ok(out)
}

fn uniform<R: Rng>(rng: &mut R) -> f64 {
    2.0 * rng.random::<f64>() - 1.0
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn random_antisymmetric<T: Scalar>(dim: usize, mut entry: impl FnMut() -> T) -> CliResult<AntisymmetricMatrix<T>> {
    Ok(AntisymmetricMatrix::from_upper(dim, |_, _| entry())?)
}

fn det_real(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant()
}

fn det_complex(rows: &[Vec<Complex64>]) -> Complex64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant()
}

/// `Pf² = det` on random real and complex matrices, Laplace against elimination, and
/// `qdet² = det` on random self-dual quaternion matrices.
pub fn pfaffian_suite(tols: &Tolerances, seed: u64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut real, mut cplx, mut laplace, mut quat) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for dim in (2..=20).step_by(2) {
        for _ in 0..3 {
            let a = random_antisymmetric(dim, || uniform(&mut rng))?;
            let pf = pfaffian(&a);
            real = real.max(relative((pf * pf).into(), det_real(&a.rows()).into()));
            if dim <= 10 {
                laplace = laplace.max(relative(pfaffian_laplace(&a)?.into(), pf.into()));
            }
            let c = random_antisymmetric(dim, || Complex64::new(uniform(&mut rng), uniform(&mut rng)))?;
            let pc = pfaffian(&c);
            cplx = cplx.max(relative(pc * pc, det_complex(&c.rows())));
        }
    }
    for blocks in 1..=6 {
        for _ in 0..3 {
            let mut b = vec![vec![[[0.0; 2]; 2]; blocks]; blocks];
            for i in 0..blocks {
                let d = uniform(&mut rng);
                b[i][i] = [[d, 0.0], [0.0, d]];
                for j in i + 1..blocks {
                    let q = [[uniform(&mut rng), uniform(&mut rng)], [uniform(&mut rng), uniform(&mut rng)]];
                    b[i][j] = q;
                    b[j][i] = dual(&q);
                }
            }
            let m = QuaternionBlockMatrix::new(b)?;
            let q = qdet(&m)?;
            quat = quat.max(relative((q * q).into(), det_real(&m.flatten()).into()));
        }
    }
    Ok(vec![
        Check::le("pf_squared_vs_det_real", real, tols.pfaffian),
        Check::le("pf_squared_vs_det_complex", cplx, tols.pfaffian),
        Check::le("laplace_vs_elimination", laplace, tols.pfaffian),
        Check::le("qdet_squared_vs_det", quat, tols.pfaffian),
    ])
}

pub fn skew_suite(ensemble: EnsembleArg, n: usize, tols: &Tolerances) -> CliResult<Vec<Check>> {
    match ensemble {
        EnsembleArg::Goe => {
            let fam = build_family_beta1(&WeightSpec::gaussian(), n.max(2))?;
            let quartic = WeightSpec::custom("quartic", |x: f64| x.powi(4) / 4.0 + x * x / 2.0, 7.0)?;
            let qfam = build_family_beta1(&quartic, n.max(2))?;
            Ok(vec![
                Check::le("beta1_gaussian_defect", fam.skew_orthogonality_defect()?, tols.skew),
                Check::le("beta1_quartic_defect", qfam.skew_orthogonality_defect()?, tols.skew),
            ])
        }
        EnsembleArg::Ginoe => {
            if n > 8 {
                return Err(CliError::Usage(format!("the Ginibre skew suite is limited to N <= 8, got {n}")));
            }
            let fam = ginoe_family(n)?;
            let g = ginoe_gram(&fam)?;
            let r0 = g.first().and_then(|r| r.get(1)).copied().unwrap_or(1.0).abs();
            let (mut off, mut norm) = (0.0f64, 0.0f64);
            for j in 0..n {
                for k in j + 1..n {
                    if j % 2 == 0 && k == j + 1 {
                        let expect = 2.0 * SQRT_2PI * gamma((j + 1) as f64)?;
                        norm = norm.max((g[j][k] / expect - 1.0).abs());
                    } else {
                        off = off.max(g[j][k].abs() / r0);
                    }
                }
            }
            Ok(vec![
                Check::le("ginoe_off_pair_entries", off, tols.skew),
                Check::le("ginoe_pair_norms", norm, NORM_TOL),
                Check::le("sinclair_normalisation", (sinclair_normalization(n)? - 1.0).abs(), SINCLAIR_TOL),
            ])
        }
    }
}

pub fn kernel_suite(ensemble: EnsembleArg, n: usize, tols: &Tolerances) -> CliResult<Vec<Check>> {
    let bundle = bundle_for(ensemble, n)?;
    let mut out = Vec::new();
    match &bundle {
        KernelBundle::Beta1(_) => {
            out.push(Check::le("density_normalisation", dyson_recurrence_check(&bundle, &[])?, tols.kernels));
            if n >= 2 {
                let worst = [-1.3, -0.4, 0.0, 0.7, 1.6]
                    .iter()
                    .map(|&x| dyson_recurrence_check(&bundle, &[x]))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                out.push(Check::le("dyson_recurrence", worst, tols.kernels));
            }
            let rel = interrelations_check(&bundle, &[-0.9, 0.2, 1.1], &[])?;
            out.push(Check::le("interrelations", rel.max(), tols.kernels));
        }
        KernelBundle::Ginoe(_) => {
            let real = oddrmt::quadrature::integrate_line(
                |x| bundle.s(Point::Real(x), Point::Real(x)).map(|v| v.re).unwrap_or(f64::NAN),
                &oddrmt::quadrature::LineDecay::gaussian(4 * n),
                1e-12,
            )?;
            let expect = ginoe_expected_real_count(n);
            out.push(Check::le("expected_real_count", (real - expect).abs() / expect, tols.kernels));
            let rel = interrelations_check(&bundle, &GINOE_REAL_PROBES, &[GINOE_COMPLEX_PROBE, Complex64::new(-0.6, 1.1)])?;
            out.push(Check::le("interrelations", rel.max(), tols.kernels));
            if n >= 2 {
                out.push(Check::le("summed_vs_finite", summed_deviation(&bundle, n)?, tols.summed));
            }
        }
    }
    Ok(out)
}

/// Largest relative gap between the summed-up and finite-sum `S` over all four blocks.
pub fn summed_deviation(bundle: &KernelBundle, n: usize) -> CliResult<f64> {
    let reals = [-1.7, -0.3, 0.4, 1.2];
    let complexes = [Complex64::new(0.1, 0.4), Complex64::new(-0.8, 1.3), Complex64::new(1.1, 0.2)];
    let mut worst = 0.0f64;
    let mut pairs: Vec<(Block, Point, Point)> = Vec::new();
    for &x in &reals {
        for &y in &reals {
            pairs.push((Block::Rr, Point::Real(x), Point::Real(y)));
        }
        for &w in &complexes {
            pairs.push((Block::Rc, Point::Real(x), Point::Complex(w)));
            pairs.push((Block::Cr, Point::Complex(w), Point::Real(x)));
        }
    }
    for &w in &complexes {
        for &v in &complexes {
            pairs.push((Block::Cc, Point::Complex(w), Point::Complex(v)));
        }
    }
    for (block, a, b) in pairs {
        let finite = bundle.s(a, b)?;
        let summed = ginoe_summed_s(n, block, a, b)?;
        worst = worst.max((summed - finite).norm() / finite.norm().max(1e-300));
    }
    Ok(worst)
}

fn reduction_checks(rep: &ReductionReport, tols: &Tolerances, pf3: f64) -> Vec<Check> {
    let non_monotone = rep.entries.iter().filter(|e| !e.monotone()).count() as f64;
    vec![
        Check::le("final_deviation_at_12", rep.final_max(), tols.reduction),
        Check::le("non_monotone_entries", non_monotone, 0.0),
        Check::le("stripped_limit", rep.limit_max(), tols.pf3),
        Check::le("pf3_identity", pf3, tols.pf3),
    ]
}

/// Even-to-odd reduction from `N` (even) or `N + 1` (odd) down to the odd size.
pub fn reduction_suite(ensemble: EnsembleArg, n: usize, tols: &Tolerances) -> CliResult<Vec<Check>> {
    let n_even = if n % 2 == 0 { n } else { n + 1 };
    if n_even < 4 {
        return Err(CliError::Usage(format!("the reduction suite needs N >= 3, got {n}")));
    }
    match ensemble {
        EnsembleArg::Goe => {
            let rep = verify_odd_limit_beta1(&WeightSpec::gaussian(), n_even, &BETA1_PROBES, &DEFAULT_SCHEDULE)?;
            let KernelBundle::Beta1(k) = bundle_for(ensemble, n_even)? else { unreachable!() };
            let pf3 = [6.0, 8.0].iter().map(|&xm| pf3_check_beta1(&k, &BETA1_PROBES, xm)).collect::<Result<Vec<_>, _>>()?;
            Ok(reduction_checks(&rep, tols, pf3.into_iter().fold(0.0, f64::max)))
        }
        EnsembleArg::Ginoe => {
            let config = PointConfiguration::new(GINOE_REAL_PROBES.to_vec(), vec![GINOE_COMPLEX_PROBE])?;
            let rep = verify_odd_limit_ginoe(n_even, &config, &DEFAULT_SCHEDULE)?;
            let KernelBundle::Ginoe(k) = bundle_for(ensemble, n_even)? else { unreachable!() };
            let pair = PointConfiguration::new(vec![GINOE_REAL_PROBES[0]], vec![GINOE_COMPLEX_PROBE])?;
            let pf3 = pf3_check_ginoe(&k, &pair, 6.0)?.max(pf3_check_ginoe(&k, &pair, 8.0)?);
            let mut out = reduction_checks(&rep, tols, pf3);
            out.push(Check::le("block_move", block_move_check(&k, &pair, 6.0)?, tols.pf3));
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!(SuiteName::parse("all").unwrap(), SuiteName::All);
        assert!(matches!(SuiteName::parse("Pfaffian"), Err(CliError::Usage(_))));
    }

    #[test]
    fn check_rejects_nan() {
        assert!(!Check::le("x", f64::NAN, 1.0).pass);
        assert!(Check::le("x", 1.0, 1.0).pass);
    }

    #[test]
    fn odd_sizes_reduce_from_the_next_even() {
        let tols = Tolerances { pfaffian: 1e-10, skew: 1e-6, kernels: 1e-5, summed: 1e-8, reduction: 1.0, pf3: 1e-8 };
        let checks = reduction_suite(EnsembleArg::Ginoe, 3, &tols).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }
}
