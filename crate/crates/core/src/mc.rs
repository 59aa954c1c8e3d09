//! Monte Carlo ground truth: GOE and real Ginibre spectra, histograms of real
//! eigenvalues, and comparison against the analytic one-point densities.

use crate::error::{Error, Result};
use crate::kernels::{rho, KernelBundle, PointConfiguration};
use crate::quadrature::{integrate_interval, integrate_line, LineDecay};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const MAX_N: usize = 64;
/// Realness threshold relative to the Frobenius norm.
pub const REAL_THRESHOLD: f64 = 1e-7;
/// Samples per RNG stream; chunks are the unit of parallel work.
pub const CHUNK: usize = 1000;
pub const GENERATOR: &str = "ChaCha8Rng, one stream per 1000-sample chunk";
pub const NORMAL_METHOD: &str = "ziggurat (rand_distr::StandardNormal)";
pub const Z_LIMIT: f64 = 4.0;
pub const MEAN_SIGMAS: f64 = 3.0;
const MAX_CONSECUTIVE_FAILURES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McEnsemble {
    Goe,
    Ginoe,
}

/// Spectrum of one matrix: sorted real eigenvalues and one representative per
/// conjugate pair, taken in the upper half plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub n: usize,
    pub reals: Vec<f64>,
    pub complex_upper: Vec<Complex64>,
}

impl SpectrumSample {
    pub fn parity_ok(&self) -> bool {
        self.reals.len() + 2 * self.complex_upper.len() == self.n && self.reals.len() % 2 == self.n % 2
    }
}

/// RNG for chunk `stream` of the run seeded with `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::InvalidDimension { dim: n, reason: "matrix size must be in 1..=64" });
    }
    Ok(())
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Real symmetric `A = (G + Gᵀ)/2`: diagonal variance 1, off-diagonal variance ½.
pub fn goe_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| normal(rng));
    (&g + g.transpose()) * 0.5
}

pub fn ginibre_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| normal(rng))
}

pub fn sample_goe<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SpectrumSample> {
    check_size(n)?;
    let mut reals: Vec<f64> = goe_matrix(n, rng).symmetric_eigenvalues().iter().copied().collect();
    reals.sort_by(f64::total_cmp);
    Ok(SpectrumSample { n, reals, complex_upper: Vec::new() })
}

pub fn sample_real_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SpectrumSample> {
    check_size(n)?;
    let a = ginibre_matrix(n, rng);
    let eigs = eig_nonsymmetric(&a)?;
    let (reals, complex_upper) = classify_real(&eigs, REAL_THRESHOLD * a.norm())?;
    Ok(SpectrumSample { n, reals, complex_upper })
}

/// Eigenvalues of a real square matrix: Householder reduction to Hessenberg form,
/// then Francis double-shift QR. The iteration cap is `500·N` sweeps in total.
pub fn eig_nonsymmetric(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidDimension { dim: n, reason: "matrix must be square" });
    }
    check_size(n)?;
    let mut h = hessenberg(a);
    hqr(&mut h, n)
}

/// Dense `(n+1)²` buffer addressed 1-based, matching the textbook QR indexing.
struct OneBased {
    n: usize,
    v: Vec<f64>,
}

impl OneBased {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * (self.n + 1) + j]
    }
    #[inline]
    fn set(&mut self, i: usize, j: usize, x: f64) {
        self.v[i * (self.n + 1) + j] = x;
    }
}

fn hessenberg(a: &DMatrix<f64>) -> OneBased {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let norm = (0..len).map(|i| m[(k + 1 + i, k)].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = m[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in 0..len {
            v[i] = m[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vn = (0..len).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for x in v.iter_mut().take(len) {
            *x /= vn;
        }
        for j in k..n {
            let s: f64 = (0..len).map(|i| v[i] * m[(k + 1 + i, j)]).sum();
            for i in 0..len {
                m[(k + 1 + i, j)] -= 2.0 * v[i] * s;
            }
        }
        for i in 0..n {
            let s: f64 = (0..len).map(|j| m[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..len {
                m[(i, k + 1 + j)] -= 2.0 * s * v[j];
            }
        }
        m[(k + 1, k)] = alpha;
        for i in k + 2..n {
            m[(i, k)] = 0.0;
        }
    }
    let mut h = OneBased { n, v: vec![0.0; (n + 1) * (n + 1)] };
    for i in 0..n {
        for j in 0..n {
            h.set(i + 1, j + 1, m[(i, j)]);
        }
    }
    h
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

fn hqr(a: &mut OneBased, n: usize) -> Result<Vec<Complex64>> {
    let cap = 500 * n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i - 1).max(1)..=n {
            anorm += a.at(i, j).abs();
        }
    }
    let mut total = 0;
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a.at(l - 1, l - 1).abs() + a.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.at(l, l - 1).abs() + s == s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.at(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a.at(nn - 1, nn - 1);
            let mut w = a.at(nn, nn - 1) * a.at(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                break;
            }
            if total >= cap {
                return Err(Error::EigenNonConvergence { iterations: total });
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 1..=nn {
                    a.set(i, i, a.at(i, i) - x);
                }
                let s = a.at(nn, nn - 1).abs() + a.at(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total += 1;
            let (mut p, mut q, mut r);
            let mut m = nn - 2;
            loop {
                let z = a.at(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a.at(m + 1, m) + a.at(m, m + 1);
                q = a.at(m + 1, m + 1) - z - rr - ss;
                r = a.at(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a.at(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.at(m - 1, m - 1).abs() + z.abs() + a.at(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a.set(i, i - 2, 0.0);
                if i != m + 2 {
                    a.set(i, i - 3, 0.0);
                }
            }
            for k in m..nn {
                if k != m {
                    p = a.at(k, k - 1);
                    q = a.at(k + 1, k - 1);
                    r = if k != nn - 1 { a.at(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a.set(k, k - 1, -a.at(k, k - 1));
                    }
                } else {
                    a.set(k, k - 1, -s * x);
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = a.at(k, j) + q * a.at(k + 1, j);
                    if k != nn - 1 {
                        pp += r * a.at(k + 2, j);
                        a.set(k + 2, j, a.at(k + 2, j) - pp * z);
                    }
                    a.set(k + 1, j, a.at(k + 1, j) - pp * y);
                    a.set(k, j, a.at(k, j) - pp * x);
                }
                let mmin = nn.min(k + 3);
                for i in l..=mmin {
                    let mut pp = x * a.at(i, k) + y * a.at(i, k + 1);
                    if k != nn - 1 {
                        pp += z * a.at(i, k + 2);
                        a.set(i, k + 2, a.at(i, k + 2) - pp * r);
                    }
                    a.set(i, k + 1, a.at(i, k + 1) - pp * q);
                    a.set(i, k, a.at(i, k) - pp);
                }
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Splits eigenvalues into reals (`|Im λ| ≤ threshold`) and upper-half-plane
/// representatives of conjugate pairs, matched by nearest conjugate.
pub fn classify_real(eigs: &[Complex64], threshold: f64) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &e in eigs {
        if e.im.abs() <= threshold {
            reals.push(e.re);
        } else if e.im > 0.0 {
            upper.push(e);
        } else {
            lower.push(e.conj());
        }
    }
    let mut pairs = Vec::with_capacity(upper.len());
    for u in upper {
        let best = lower
            .iter()
            .enumerate()
            .map(|(i, l)| (i, (u - l).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, d)) if d <= threshold.max(1e-8 * (1.0 + u.norm())) => {
                let l = lower.swap_remove(i);
                pairs.push(Complex64::new(0.5 * (u.re + l.re), 0.5 * (u.im + l.im)));
            }
            _ => return Err(Error::UnmatchedConjugate { re: u.re, im: u.im }),
        }
    }
    if let Some(l) = lower.first() {
        return Err(Error::UnmatchedConjugate { re: l.re, im: -l.im });
    }
    if reals.len() % 2 != eigs.len() % 2 {
        if let Some((i, _)) = pairs.iter().enumerate().min_by(|a, b| a.1.im.total_cmp(&b.1.im)) {
            let z = pairs.swap_remove(i);
            reals.push(z.re);
            reals.push(z.re);
        }
    }
    reals.sort_by(f64::total_cmp);
    Ok((reals, pairs))
}

/// Expected number of real eigenvalues of an `N×N` real Ginibre matrix.
pub fn ginoe_expected_real_count(n: usize) -> f64 {
    let mut c = 1.0;
    let mut sum = if n % 2 == 0 { 1.0 } else { 0.0 };
    for m in 1..n.saturating_sub(1) {
        c *= (2 * m - 1) as f64 / (2 * m) as f64;
        if m % 2 == n % 2 {
            sum += c;
        }
    }
    (n % 2) as f64 + std::f64::consts::SQRT_2 * sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub ensemble: McEnsemble,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl McConfig {
    pub fn new(ensemble: McEnsemble, n: usize, samples: usize, seed: u64) -> Self {
        Self { ensemble, n, samples, seed, bins: 40, lo: -4.0, hi: 4.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_size(self.n)?;
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be positive".into()));
        }
        if self.bins == 0 || !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidArgument("need bins >= 1 and a finite range lo < hi".into()));
        }
        Ok(())
    }
}

/// Histogram of real eigenvalues with per-matrix second moments, mergeable across workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Per bin, sum over matrices of the squared count in that bin.
    pub sumsq: Vec<u64>,
    pub samples: u64,
    pub real_total: u64,
    pub real_sumsq: u64,
    /// Real eigenvalues that fell outside `[lo, hi)`.
    pub outside: u64,
    /// Solver non-convergence or unmatched-conjugate rejections (resampled).
    pub failures: u64,
}

impl EmpiricalDensity {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo,
            hi,
            counts: vec![0; bins],
            sumsq: vec![0; bins],
            samples: 0,
            real_total: 0,
            real_sumsq: 0,
            outside: 0,
            failures: 0,
        }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edge(&self, b: usize) -> f64 {
        self.lo + b as f64 * self.width()
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.bins() - 1))
    }

    pub fn add(&mut self, sample: &SpectrumSample, scratch: &mut Vec<u64>) {
        scratch.clear();
        scratch.resize(self.bins(), 0);
        for &x in &sample.reals {
            match self.bin_of(x) {
                Some(b) => scratch[b] += 1,
                None => self.outside += 1,
            }
        }
        for (b, &c) in scratch.iter().enumerate() {
            self.counts[b] += c;
            self.sumsq[b] += c * c;
        }
        let k = sample.reals.len() as u64;
        self.real_total += k;
        self.real_sumsq += k * k;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalDensity) {
        for b in 0..self.bins() {
            self.counts[b] += other.counts[b];
            self.sumsq[b] += other.sumsq[b];
        }
        self.samples += other.samples;
        self.real_total += other.real_total;
        self.real_sumsq += other.real_sumsq;
        self.outside += other.outside;
        self.failures += other.failures;
    }

    /// Mean count per matrix in bin `b`, divided by the bin width.
    pub fn density(&self, b: usize) -> f64 {
        self.counts[b] as f64 / self.samples as f64 / self.width()
    }

    pub fn mean_real_count(&self) -> f64 {
        self.real_total as f64 / self.samples as f64
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / (self.samples + self.failures) as f64
    }
}

fn draw<R: Rng + ?Sized>(ensemble: McEnsemble, n: usize, rng: &mut R, failures: &mut u64) -> Result<SpectrumSample> {
    let mut consecutive = 0;
    loop {
        let r = match ensemble {
            McEnsemble::Goe => sample_goe(n, rng),
            McEnsemble::Ginoe => sample_real_ginibre(n, rng),
        };
        match r {
            Ok(s) => return Ok(s),
            Err(e @ (Error::EigenNonConvergence { .. } | Error::UnmatchedConjugate { .. })) => {
                *failures += 1;
                consecutive += 1;
                if consecutive >= MAX_CONSECUTIVE_FAILURES {
                    return Err(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
}

fn chunk_ranges(samples: usize) -> Vec<(u64, usize)> {
    (0..samples.div_ceil(CHUNK)).map(|c| (c as u64, CHUNK.min(samples - c * CHUNK))).collect()
}

/// The first `count` samples of the run, identical to what [`run`] histograms.
pub fn sample_stream(ensemble: McEnsemble, n: usize, seed: u64, count: usize) -> Result<Vec<SpectrumSample>> {
    check_size(n)?;
    let mut out = Vec::with_capacity(count);
    let mut failures = 0;
    for (stream, len) in chunk_ranges(count) {
        let mut rng = seeded_rng(seed, stream);
        for _ in 0..len {
            out.push(draw(ensemble, n, &mut rng, &mut failures)?);
        }
    }
    Ok(out)
}

/// Histograms `config.samples` spectra in parallel; the result does not depend on the thread count.
pub fn run(config: &McConfig) -> Result<EmpiricalDensity> {
    config.validate()?;
    let partials: Vec<Result<EmpiricalDensity>> = chunk_ranges(config.samples)
        .into_par_iter()
        .map(|(stream, len)| {
            let mut rng = seeded_rng(config.seed, stream);
            let mut h = EmpiricalDensity::new(config.lo, config.hi, config.bins);
            let mut scratch = Vec::new();
            let mut failures = 0;
            for _ in 0..len {
                let s = draw(config.ensemble, config.n, &mut rng, &mut failures)?;
                h.add(&s, &mut scratch);
            }
            h.failures = failures;
            Ok(h)
        })
        .collect();
    let mut total = EmpiricalDensity::new(config.lo, config.hi, config.bins);
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinComparison {
    pub lo: f64,
    pub hi: f64,
    /// Mean number of real eigenvalues per matrix in the bin.
    pub empirical: f64,
    /// `∫_bin ρ_(1)`.
    pub expected: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McComparison {
    pub config: McConfig,
    pub generator: String,
    pub normal_method: String,
    pub real_threshold: f64,
    pub bins: Vec<BinComparison>,
    pub mean_real_count: f64,
    pub mean_std_error: f64,
    pub expected_real_count: f64,
    pub mean_z: f64,
    pub failures: u64,
    pub failure_rate: f64,
}

impl McComparison {
    pub fn max_abs_z(&self) -> f64 {
        self.bins.iter().map(|b| b.z.abs()).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> Vec<&BinComparison> {
        self.bins.iter().filter(|b| b.z.abs() > Z_LIMIT).collect()
    }

    pub fn passes(&self) -> bool {
        self.flagged().is_empty() && self.mean_z.abs() <= MEAN_SIGMAS
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "# ensemble={}", if c.ensemble == McEnsemble::Goe { "goe" } else { "ginoe" });
        let _ = writeln!(s, "# n={}", c.n);
        let _ = writeln!(s, "# samples={}", c.samples);
        let _ = writeln!(s, "# seed={}", c.seed);
        let _ = writeln!(s, "# generator={}", self.generator);
        let _ = writeln!(s, "# normal_method={}", self.normal_method);
        let _ = writeln!(s, "# real_threshold={:e}", self.real_threshold);
        let _ = writeln!(s, "# mean_real_count={}", self.mean_real_count);
        let _ = writeln!(s, "# mean_std_error={}", self.mean_std_error);
        let _ = writeln!(s, "# expected_real_count={}", self.expected_real_count);
        let _ = writeln!(s, "# mean_z={}", self.mean_z);
        let _ = writeln!(s, "# failures={}", self.failures);
        let _ = writeln!(s, "# pass={}", self.passes());
        s.push_str("lo,hi,empirical,expected,std_error,z\n");
        for b in &self.bins {
            let _ = writeln!(s, "{},{},{},{},{},{}", b.lo, b.hi, b.empirical, b.expected, b.std_error, b.z);
        }
        s
    }
}

fn real_density(bundle: &KernelBundle, x: f64) -> f64 {
    PointConfiguration::real(vec![x]).and_then(|c| rho(bundle, &c)).map(|r| r.value).unwrap_or(f64::NAN)
}

/// Per-bin z-scores of the empirical real-eigenvalue histogram against `∫_bin ρ_(1)`,
/// plus the mean real count against `∫_ℝ ρ_(1)`.
///
/// The per-matrix bin count has variance at least `a(1 − a)` when the expected mass
/// is `a` and at most one eigenvalue lands in the bin, which floors the sample
/// variance for sparsely populated bins.
pub fn empirical_vs_analytic(h: &EmpiricalDensity, config: &McConfig, bundle: &KernelBundle) -> Result<McComparison> {
    if h.samples == 0 {
        return Err(Error::InvalidArgument("empty histogram".into()));
    }
    if bundle.n() != config.n {
        return Err(Error::InvalidArgument(format!("kernel size {} does not match N = {}", bundle.n(), config.n)));
    }
    let m = h.samples as f64;
    let mut bins = Vec::with_capacity(h.bins());
    for b in 0..h.bins() {
        let (lo, hi) = (h.edge(b), h.edge(b + 1));
        let expected = integrate_interval(|x| real_density(bundle, x), lo, hi, &[], 1e-11)?;
        let empirical = h.counts[b] as f64 / m;
        let sample_var = h.sumsq[b] as f64 / m - empirical * empirical;
        let var = sample_var.max(expected * (1.0 - expected).max(0.0));
        let std_error = (var / m).sqrt();
        let z = if std_error > 0.0 { (empirical - expected) / std_error } else { 0.0 };
        bins.push(BinComparison { lo, hi, empirical, expected, std_error, z });
    }
    let expected_real_count = integrate_line(|x| real_density(bundle, x), &LineDecay::gaussian(4 * config.n), 1e-11)?;
    let mean = h.mean_real_count();
    let var = h.real_sumsq as f64 / m - mean * mean;
    let mean_std_error = (var.max(0.0) / m).sqrt();
    let mean_z = if mean_std_error > 0.0 { (mean - expected_real_count) / mean_std_error } else { 0.0 };
    Ok(McComparison {
        config: config.clone(),
        generator: GENERATOR.into(),
        normal_method: NORMAL_METHOD.into(),
        real_threshold: REAL_THRESHOLD,
        bins,
        mean_real_count: mean,
        mean_std_error,
        expected_real_count,
        mean_z,
        failures: h.failures,
        failure_rate: h.failure_rate(),
    })
}

/// Samples, histograms and compares in one call.
pub fn compare(config: &McConfig) -> Result<McComparison> {
    let h = run(config)?;
    let bundle = match config.ensemble {
        McEnsemble::Goe => KernelBundle::beta1(&crate::skew::WeightSpec::gaussian(), config.n)?,
        McEnsemble::Ginoe => KernelBundle::ginoe(config.n)?,
    };
    empirical_vs_analytic(&h, config, &bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_min_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    fn nalgebra_eigs(a: &DMatrix<f64>) -> Vec<Complex64> {
        a.complex_eigenvalues().iter().copied().collect()
    }

    #[test]
    fn diagonal_and_rotation() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 0.5]));
        let mut e: Vec<f64> = eig_nonsymmetric(&d).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        assert_eq!(e, vec![-1.0, 0.5, 3.0]);
        let r = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = eig_nonsymmetric(&r).unwrap();
        assert!(max_min_distance(&e, &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]) < 1e-14);
        let one = DMatrix::from_element(1, 1, 2.5);
        assert_eq!(eig_nonsymmetric(&one).unwrap(), vec![Complex64::new(2.5, 0.0)]);
    }

    #[test]
    fn random_matrices_match_reference_solver() {
        let mut rng = seeded_rng(7, 0);
        for n in [2, 3, 5, 6, 9, 16, 40] {
            for _ in 0..20 {
                let a = ginibre_matrix(n, &mut rng);
                let e = eig_nonsymmetric(&a).unwrap();
                let oracle = nalgebra_eigs(&a);
                assert!(max_min_distance(&e, &oracle) <= 1e-8 * a.norm(), "n={n}");
                assert!(max_min_distance(&oracle, &e) <= 1e-8 * a.norm(), "n={n}");
            }
        }
    }

    #[test]
    fn trace_and_determinant() {
        let mut rng = seeded_rng(11, 0);
        for _ in 0..50 {
            let a = ginibre_matrix(6, &mut rng);
            let e = eig_nonsymmetric(&a).unwrap();
            let sum: Complex64 = e.iter().sum();
            let prod: Complex64 = e.iter().product();
            assert!((sum - a.trace()).norm() < 1e-9);
            let det = a.clone().lu().determinant();
            assert!((prod - det).norm() < 1e-8 * det.abs());
        }
    }

    #[test]
    fn residuals_are_small() {
        let mut rng = seeded_rng(3, 1);
        for _ in 0..20 {
            let a = ginibre_matrix(8, &mut rng);
            let ac = a.map(|x| Complex64::new(x, 0.0));
            for l in eig_nonsymmetric(&a).unwrap() {
                let shifted = &ac - DMatrix::<Complex64>::identity(8, 8) * l;
                let smin = shifted.singular_values().min();
                assert!(smin <= 1e-7 * a.norm());
            }
        }
    }

    #[test]
    fn companion_matrix_roots() {
        let mut rng = seeded_rng(5, 2);
        for _ in 0..20 {
            let c: Vec<f64> = (0..5).map(|_| normal(&mut rng)).collect();
            let mut m = DMatrix::zeros(5, 5);
            for i in 1..5 {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..5 {
                m[(i, 4)] = -c[i];
            }
            for l in eig_nonsymmetric(&m).unwrap() {
                let mut p = Complex64::new(1.0, 0.0);
                for k in (0..5).rev() {
                    p = p * l + c[k];
                }
                let scale: f64 = (0..=5).map(|k| l.norm().powi(k)).sum::<f64>() * (1.0 + c.iter().map(|x| x.abs()).sum::<f64>());
                assert!(p.norm() <= 1e-12 * scale, "p(λ)={p}");
            }
        }
    }

    #[test]
    fn classification() {
        let (r, c) = classify_real(&[Complex64::new(1.0, 0.0), Complex64::new(-2.0, 1e-12)], 1e-7).unwrap();
        assert_eq!((r, c.len()), (vec![-2.0, 1.0], 0));
        let pair = [Complex64::new(0.2, 0.5), Complex64::new(0.2, -0.5), Complex64::new(1.0, 0.0)];
        let (r, c) = classify_real(&pair, 1e-7).unwrap();
        assert_eq!(r, vec![1.0]);
        assert_eq!(c, vec![Complex64::new(0.2, 0.5)]);
        assert!(matches!(
            classify_real(&[Complex64::new(0.0, 0.5), Complex64::new(1.0, -0.5)], 1e-7),
            Err(Error::UnmatchedConjugate { .. })
        ));
    }

    #[test]
    fn parity_and_sizes() {
        for n in 1..=7 {
            for s in sample_stream(McEnsemble::Ginoe, n, 42, 300).unwrap() {
                assert!(s.parity_ok());
                assert!(s.complex_upper.iter().all(|z| z.im > 0.0));
            }
        }
        for s in sample_stream(McEnsemble::Ginoe, 1, 1, 50).unwrap() {
            assert_eq!(s.reals.len(), 1);
        }
        let mut rng = seeded_rng(0, 0);
        assert!(sample_goe(0, &mut rng).is_err());
        assert!(sample_real_ginibre(65, &mut rng).is_err());
    }

    #[test]
    fn goe_trace_preserved() {
        let mut rng = seeded_rng(9, 0);
        for n in [1, 3, 7] {
            for _ in 0..20 {
                let a = goe_matrix(n, &mut rng);
                let e = a.clone().symmetric_eigenvalues();
                assert!((e.sum() - a.trace()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let a = sample_stream(McEnsemble::Ginoe, 4, 123, 2500).unwrap();
        let b = sample_stream(McEnsemble::Ginoe, 4, 123, 2500).unwrap();
        assert_eq!(a, b);
        let c = sample_stream(McEnsemble::Ginoe, 4, 124, 10).unwrap();
        assert_ne!(a[..10], c[..]);
        let cfg = McConfig::new(McEnsemble::Goe, 3, 4000, 5);
        let h1 = run(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let h2 = pool.install(|| run(&cfg).unwrap());
        assert_eq!(h1, h2);
        let mut manual = EmpiricalDensity::new(-4.0, 4.0, 40);
        let mut scratch = Vec::new();
        for s in sample_stream(McEnsemble::Goe, 3, 5, 4000).unwrap() {
            manual.add(&s, &mut scratch);
        }
        assert_eq!(manual, h1);
    }

    #[test]
    fn expected_counts_formula() {
        let s2 = std::f64::consts::SQRT_2;
        let known = [1.0, s2, 1.0 + s2 / 2.0, s2 * (1.0 + 3.0 / 8.0), 1.0 + s2 * (0.5 + 15.0 / 48.0)];
        for (i, &k) in known.iter().enumerate() {
            assert!((ginoe_expected_real_count(i + 1) - k).abs() < 1e-14);
        }
    }

    /// `⟨λ_max⟩` for GOE N = 2 by 2D Simpson quadrature of `|x − y| e^{−(x²+y²)/2}`.
    fn goe2_mean_max_oracle() -> (f64, f64) {
        let (n, r) = (800, 9.0);
        let h = 2.0 * r / n as f64;
        let wt = |i: usize| if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let (mut num, mut den, mut num2) = (0.0, 0.0, 0.0);
        for i in 0..=n {
            let x = -r + i as f64 * h;
            for j in 0..=n {
                let y = -r + j as f64 * h;
                let w = wt(i) * wt(j) * (x - y).abs() * (-(x * x + y * y) / 2.0).exp();
                let m = x.max(y);
                den += w;
                num += w * m;
                num2 += w * m * m;
            }
        }
        (num / den, num2 / den)
    }

    #[test]
    fn goe2_largest_eigenvalue() {
        let (mean, second) = goe2_mean_max_oracle();
        let samples = sample_stream(McEnsemble::Goe, 2, 2024, 100_000).unwrap();
        let m = samples.len() as f64;
        let emp = samples.iter().map(|s| s.reals[1]).sum::<f64>() / m;
        let se = ((second - mean * mean) / m).sqrt();
        assert!((emp - mean).abs() < 3.0 * se, "emp={emp} oracle={mean} se={se}");
    }

    #[test]
    fn ginoe2_all_real_probability() {
        let p = crate::skew::ginoe_all_real_probability(2).unwrap();
        let samples = sample_stream(McEnsemble::Ginoe, 2, 77, 100_000).unwrap();
        let m = samples.len() as f64;
        let emp = samples.iter().filter(|s| s.reals.len() == 2).count() as f64 / m;
        let se = (p * (1.0 - p) / m).sqrt();
        assert!((emp - p).abs() < 3.0 * se, "emp={emp} p={p}");
    }

    #[test]
    fn threshold_stability() {
        let mut rng = seeded_rng(31, 0);
        let (mut a, mut b, total) = (0usize, 0usize, 20_000);
        for _ in 0..total {
            let m = ginibre_matrix(3, &mut rng);
            let e = eig_nonsymmetric(&m).unwrap();
            let f = m.norm();
            a += (classify_real(&e, 1e-6 * f).unwrap().0.len() == 3) as usize;
            b += (classify_real(&e, 1e-8 * f).unwrap().0.len() == 3) as usize;
        }
        assert!((a as f64 - b as f64).abs() / total as f64 <= 1e-3);
    }

    #[test]
    fn comparison_report_shape() {
        let cfg = McConfig { bins: 8, ..McConfig::new(McEnsemble::Ginoe, 3, 3000, 1) };
        let rep = compare(&cfg).unwrap();
        assert_eq!(rep.bins.len(), 8);
        assert!((rep.expected_real_count - ginoe_expected_real_count(3)).abs() < 1e-8);
        let total: f64 = rep.bins.iter().map(|b| b.expected).sum();
        assert!(total < rep.expected_real_count && total > 0.99 * rep.expected_real_count);
        let csv = rep.to_csv();
        assert!(csv.contains("# seed=1\n") && csv.contains("lo,hi,empirical,expected,std_error,z\n"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 9);
        let bad = McConfig { n: 4, ..cfg.clone() };
        assert!(empirical_vs_analytic(&run(&cfg).unwrap(), &bad, &KernelBundle::ginoe(3).unwrap()).is_err());
    }
}
