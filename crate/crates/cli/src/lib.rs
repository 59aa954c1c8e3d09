//! Command implementations behind the `oddrmt` binary. Each command returns the
//! rendered report and whether its checks passed; `main` maps that to an exit code.

pub mod args;
pub mod suites;

use args::{Command, Common, CorrelateArgs, DensityArgs, EnsembleArg, Format, KernelPath, McArgs, VerifyArgs};
use num_complex::Complex64;
use oddrmt::kernels::{correlation_matrix, ginoe_summed_s, rho, Block, KernelBundle, Parity, Point, PointConfiguration};
use oddrmt::mc::{self, McConfig, McEnsemble};
use oddrmt::skew::WeightSpec;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MAX_CORRELATE_POINTS: usize = 5;
pub const MIN_MC_SAMPLES: usize = 10_000;
pub const MAX_FAILURE_RATE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) | Self::Io(_) => 3,
        }
    }
}

impl From<oddrmt::Error> for CliError {
    fn from(e: oddrmt::Error) -> Self {
        use oddrmt::Error as E;
        match e {
            E::InvalidArgument(_) | E::DuplicatePoint(_) | E::InvalidDimension { .. } => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Rendered report and pass flag; the exit code is 0 when `passed`, else 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// `# key=value` header lines, echoed into JSON as the `config` object.
#[derive(Debug, Clone, Default)]
pub struct Header(Vec<(String, String)>);

impl Header {
    pub fn new(command: &str, common: &Common) -> Self {
        let mut h = Header::default();
        h.push("oddrmt_version", VERSION);
        h.push("command", command);
        h.push("ensemble", common.ensemble.name());
        h.push("n", common.size);
        h.push("parity", if Parity::of(common.size) == Parity::Even { "even" } else { "odd" });
        h
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, format!("{value:?}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn csv(&self) -> String {
        self.0.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }

    fn json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect::<Map<_, _>>())
    }
}

/// The first `index_columns` cells of each row hold indices and are written as integers.
fn render_table(format: Format, header: &Header, columns: &[&str], index_columns: usize, rows: &[Vec<f64>], extra: Map<String, Value>) -> String {
    let is_index = |k: usize| k < index_columns;
    match format {
        Format::Csv => {
            let mut s = header.csv();
            s.push_str(&columns.join(","));
            s.push('\n');
            for r in rows {
                let cells: Vec<String> =
                    r.iter().enumerate().map(|(k, v)| if is_index(k) { format!("{}", *v as u64) } else { format!("{v:?}") }).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("config".into(), header.json());
            obj.insert("columns".into(), json!(columns));
            let rows: Vec<Vec<Value>> = rows
                .iter()
                .map(|r| r.iter().enumerate().map(|(k, &v)| if is_index(k) { json!(v as u64) } else { json!(v) }).collect())
                .collect();
            obj.insert("rows".into(), json!(rows));
            obj.extend(extra);
            serde_json::to_string_pretty(&Value::Object(obj)).expect("json renders") + "\n"
        }
    }
}

fn validate_size(n: usize) -> CliResult<()> {
    if n == 0 || n > mc::MAX_N {
        return Err(CliError::Usage(format!("--size must be in 1..={}, got {n}", mc::MAX_N)));
    }
    Ok(())
}

pub fn bundle_for(ensemble: EnsembleArg, n: usize) -> CliResult<KernelBundle> {
    validate_size(n)?;
    Ok(match ensemble {
        EnsembleArg::Goe => KernelBundle::beta1(&WeightSpec::gaussian(), n)?,
        EnsembleArg::Ginoe => KernelBundle::ginoe(n)?,
    })
}

/// Parses `min:max:count` into `count ≥ 2` equispaced points.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("grid must be min:max:count with min < max and count >= 2, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let h = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| if i == count - 1 { hi } else { lo + i as f64 * h }).collect())
}

pub fn parse_range(spec: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("range must be min:max with min < max, got {spec:?}"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Parses comma-separated reals and `a+bi` complex points.
pub fn parse_points(spec: &str) -> CliResult<PointConfiguration> {
    let mut reals = Vec::new();
    let mut complexes = Vec::new();
    for tok in spec.split(',').map(str::trim) {
        if tok.is_empty() {
            return Err(CliError::Usage(format!("empty point in {spec:?}")));
        }
        if tok.contains('i') {
            let z: Complex64 = tok.parse().map_err(|_| CliError::Usage(format!("cannot parse complex point {tok:?}")))?;
            complexes.push(z);
        } else {
            let x: f64 = tok.parse().map_err(|_| CliError::Usage(format!("cannot parse point {tok:?}")))?;
            reals.push(x);
        }
    }
    Ok(PointConfiguration::new(reals, complexes)?)
}

pub fn run(command: &Command) -> CliResult<(Outcome, &Common)> {
    match command {
        Command::Density(a) => Ok((cmd_density(a)?, &a.common)),
        Command::Correlate(a) => Ok((cmd_correlate(a)?, &a.common)),
        Command::Verify(a) => Ok((cmd_verify(a)?, &a.common)),
        Command::McCompare(a) => Ok((cmd_mc_compare(a)?, &a.common)),
    }
}

fn real_density(bundle: &KernelBundle, x: f64) -> CliResult<f64> {
    let r = rho(bundle, &PointConfiguration::real(vec![x])?)?;
    if !r.value.is_finite() {
        return Err(CliError::Numerical(format!("density is not finite at x = {x}")));
    }
    Ok(r.value)
}

fn summed_density(n: usize, x: f64) -> CliResult<f64> {
    Ok(ginoe_summed_s(n, Block::Rr, Point::Real(x), Point::Real(x))?.re)
}

pub fn cmd_density(a: &DensityArgs) -> CliResult<Outcome> {
    let n = a.common.size;
    let grid = parse_grid(&a.grid)?;
    let bundle = bundle_for(a.common.ensemble, n)?;
    if a.kernel != KernelPath::Finite && (a.common.ensemble != EnsembleArg::Ginoe || n < 2) {
        return Err(CliError::Usage("the summed-up kernel needs --ensemble ginoe and --size >= 2".into()));
    }
    if !(a.tol_summed > 0.0) {
        return Err(CliError::Usage("--tol-summed must be positive".into()));
    }
    let mut header = Header::new("density", &a.common);
    header.push("grid", &a.grid);
    let path = match a.kernel {
        KernelPath::Finite => "finite-sum",
        KernelPath::Summed => "summed-up",
        KernelPath::Both => "finite-sum+summed-up",
    };
    header.push("kernel", path);
    let rows: Vec<CliResult<Vec<f64>>> = grid
        .par_iter()
        .map(|&x| match a.kernel {
            KernelPath::Finite => Ok(vec![x, real_density(&bundle, x)?]),
            KernelPath::Summed => Ok(vec![x, summed_density(n, x)?]),
            KernelPath::Both => {
                let f = real_density(&bundle, x)?;
                let s = summed_density(n, x)?;
                Ok(vec![x, f, s, (f - s).abs() / f.abs().max(1e-300)])
            }
        })
        .collect();
    let rows = rows.into_iter().collect::<CliResult<Vec<_>>>()?;
    let mut failures = Vec::new();
    let columns: &[&str] = if a.kernel == KernelPath::Both {
        let worst = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
        header.push_f64("tol_summed", a.tol_summed);
        header.push_f64("max_relative_deviation", worst);
        if !(worst <= a.tol_summed) {
            failures.push(format!("finite-sum vs summed-up deviation {worst:e} > {:e}", a.tol_summed));
        }
        &["x", "rho_finite", "rho_summed", "relative_deviation"]
    } else {
        &["x", "rho"]
    };
    let body = render_table(a.common.format, &header, columns, 0, &rows, Map::new());
    Ok(Outcome { body, passed: failures.is_empty(), failures })
}

pub fn cmd_correlate(a: &CorrelateArgs) -> CliResult<Outcome> {
    let config = parse_points(&a.points)?;
    if config.len() > MAX_CORRELATE_POINTS {
        return Err(CliError::Usage(format!("at most {MAX_CORRELATE_POINTS} points, got {}", config.len())));
    }
    let bundle = bundle_for(a.common.ensemble, a.common.size)?;
    if a.common.ensemble == EnsembleArg::Goe && !config.complexes().is_empty() {
        return Err(CliError::Usage("goe takes real points only".into()));
    }
    let value = rho(&bundle, &config)?;
    let matrix = correlation_matrix(&bundle, &config)?;
    let mut header = Header::new("correlate", &a.common);
    header.push("points", &a.points);
    header.push("n_real", config.reals().len());
    header.push("n_complex", config.complexes().len());
    header.push_f64("rho", value.value);
    header.push_f64("imag_residue", value.imag_residue);
    let d = matrix.dim();
    let rows: Vec<Vec<f64>> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| {
            let v = matrix.get(i, j);
            vec![i as f64, j as f64, v.re, v.im]
        })
        .collect();
    let mut extra = Map::new();
    extra.insert("rho".into(), json!(value.value));
    extra.insert("imag_residue".into(), json!(value.imag_residue));
    let body = render_table(a.common.format, &header, &["i", "j", "re", "im"], 2, &rows, extra);
    Ok(Outcome { body, passed: true, failures: Vec::new() })
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<Outcome> {
    let suite = suites::SuiteName::parse(&a.suite)?;
    validate_size(a.common.size)?;
    let tols = suites::Tolerances {
        pfaffian: a.tol_pfaffian,
        skew: a.tol_skew,
        kernels: a.tol_kernels,
        summed: a.tol_summed,
        reduction: a.tol_reduction,
        pf3: a.tol_pf3,
    };
    tols.validate()?;
    let checks = suites::run_suite(suite, a.common.ensemble, a.common.size, &tols, a.seed)?;
    let mut header = Header::new("verify", &a.common);
    header.push("suite", &a.suite);
    header.push("seed", a.seed);
    for (k, v) in tols.named() {
        header.push_f64(k, v);
    }
    let failures: Vec<String> =
        checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {:e} exceeds {:e}", c.name, c.value, c.tolerance)).collect();
    let passed = failures.is_empty();
    header.push("pass", passed);
    let body = match a.common.format {
        Format::Json => {
            let v = json!({ "config": header.json(), "checks": checks, "pass": passed });
            serde_json::to_string_pretty(&v).expect("json renders") + "\n"
        }
        Format::Csv => {
            let mut s = header.csv();
            s.push_str("name,value,tolerance,pass\n");
            for c in &checks {
                let _ = writeln!(s, "{},{:?},{:?},{}", c.name, c.value, c.tolerance, c.pass);
            }
            s
        }
    };
    Ok(Outcome { body, passed, failures })
}

pub fn cmd_mc_compare(a: &McArgs) -> CliResult<Outcome> {
    validate_size(a.common.size)?;
    if a.samples < MIN_MC_SAMPLES {
        return Err(CliError::Usage(format!("--samples must be at least {MIN_MC_SAMPLES}, got {}", a.samples)));
    }
    if a.bins == 0 || !(a.tol_z > 0.0) || !(a.tol_mean > 0.0) {
        return Err(CliError::Usage("--bins and tolerances must be positive".into()));
    }
    let (lo, hi) = parse_range(&a.range)?;
    let ensemble = match a.common.ensemble {
        EnsembleArg::Goe => McEnsemble::Goe,
        EnsembleArg::Ginoe => McEnsemble::Ginoe,
    };
    let config = McConfig { ensemble, n: a.common.size, samples: a.samples, seed: a.seed, bins: a.bins, lo, hi };
    let hist = mc::run(&config)?;
    if hist.failure_rate() > MAX_FAILURE_RATE {
        return Err(CliError::Numerical(format!(
            "eigensolver failure rate {:.3e} exceeds {MAX_FAILURE_RATE:e}",
            hist.failure_rate()
        )));
    }
    let bundle = bundle_for(a.common.ensemble, a.common.size)?;
    let rep = mc::empirical_vs_analytic(&hist, &config, &bundle)?;
    let mut failures: Vec<String> = rep
        .bins
        .iter()
        .filter(|b| !(b.z.abs() <= a.tol_z))
        .map(|b| format!("bin [{}, {}): |z| = {:.2} > {}", b.lo, b.hi, b.z.abs(), a.tol_z))
        .collect();
    if !(rep.mean_z.abs() <= a.tol_mean) {
        failures.push(format!("mean real count off by {:.2} standard errors", rep.mean_z.abs()));
    }
    let passed = failures.is_empty();
    let mut header = Header::new("mc-compare", &a.common);
    header.push("samples", a.samples);
    header.push("seed", a.seed);
    header.push("bins", a.bins);
    header.push("range", &a.range);
    header.push("generator", mc::GENERATOR);
    header.push("normal_method", mc::NORMAL_METHOD);
    header.push("real_threshold", format!("{:e}*frobenius", mc::REAL_THRESHOLD));
    header.push_f64("tol_z", a.tol_z);
    header.push_f64("tol_mean", a.tol_mean);
    header.push_f64("mean_real_count", rep.mean_real_count);
    header.push_f64("mean_std_error", rep.mean_std_error);
    header.push_f64("expected_real_count", rep.expected_real_count);
    header.push_f64("mean_z", rep.mean_z);
    header.push_f64("max_abs_z", rep.max_abs_z());
    header.push("failures", rep.failures);
    header.push("pass", passed);
    let rows: Vec<Vec<f64>> = rep.bins.iter().map(|b| vec![b.lo, b.hi, b.empirical, b.expected, b.std_error, b.z]).collect();
    let mut extra = Map::new();
    extra.insert("pass".into(), json!(passed));
    let body = render_table(a.common.format, &header, &["lo", "hi", "empirical", "expected", "std_error", "z"], 0, &rows, extra);
    Ok(Outcome { body, passed, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = parse_grid("-4:4:81").unwrap();
        assert_eq!((g.len(), g[0], g[80], g[40]), (81, -4.0, 4.0, 0.0));
        assert!(matches!(parse_grid("0:1:1"), Err(CliError::Usage(_))));
        assert!(parse_grid("0:inf:3").is_err());
    }

    #[test]
    fn points_split_by_kind() {
        let c = parse_points("0.5, -1.25, 0.1+0.5i").unwrap();
        assert_eq!(c.reals(), &[0.5, -1.25]);
        assert_eq!(c.complexes(), &[Complex64::new(0.1, 0.5)]);
        assert!(matches!(parse_points("0.1,,0.2"), Err(CliError::Usage(_))));
        assert!(matches!(parse_points("0.2-0.5i"), Err(CliError::Usage(_))));
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(oddrmt::Error::DuplicatePoint("1".into())).exit_code(), 2);
        assert_eq!(CliError::from(oddrmt::Error::EigenNonConvergence { iterations: 3 }).exit_code(), 3);
        assert_eq!(parse_range("-4:4").unwrap(), (-4.0, 4.0));
    }
}
