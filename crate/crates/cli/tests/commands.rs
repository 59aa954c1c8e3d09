use num_complex::Complex64;
use oddrmt::kernels::{rho, KernelBundle, PointConfiguration};
use oddrmt::mc::{sample_real_ginibre, seeded_rng, CHUNK};
use oddrmt::quadrature::gauss_legendre;
use rayon::prelude::*;
use std::process::{Command, Output};

fn oddrmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oddrmt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn header_value<'a>(csv: &'a str, key: &str) -> &'a str {
    let prefix = format!("# {key}=");
    csv.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("missing {key}"))
}

fn trapezoid(rows: &[Vec<f64>]) -> f64 {
    rows.windows(2).map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][1] + w[1][1])).sum()
}

#[test]
fn goe_density_grid_integrates_to_n() {
    let o = oddrmt(&["density", "--ensemble", "goe", "--size", "4", "--grid", "-4:4:81"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(header_value(&out, "kernel"), "finite-sum");
    assert_eq!(header_value(&out, "oddrmt_version"), env!("CARGO_PKG_VERSION"));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 81);
    // About 7.8e-3 of the mass lies beyond |x| = 4, so compare with the truncated integral.
    let bundle = KernelBundle::beta1(&oddrmt::skew::WeightSpec::gaussian(), 4).unwrap();
    let exact = oddrmt::quadrature::integrate_interval(
        |x| rho(&bundle, &PointConfiguration::real(vec![x]).unwrap()).unwrap().value,
        -4.0,
        4.0,
        &[],
        1e-12,
    )
    .unwrap();
    assert!((trapezoid(&rows) - exact).abs() < 1e-3, "{} vs {exact}", trapezoid(&rows));
    let wide = data_rows(&stdout(&oddrmt(&["density", "--size", "4", "--grid", "-9:9:181"])));
    assert!((trapezoid(&wide) - 4.0).abs() < 1e-3);
}

#[test]
fn ginoe_odd_density_is_positive() {
    let o = oddrmt(&["density", "--ensemble", "ginoe", "--size", "3", "--grid", "-5:5:41"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(header_value(&out, "parity"), "odd");
    assert!(data_rows(&out).iter().all(|r| r[1] > 0.0));
}

#[test]
fn finite_and_summed_paths_agree() {
    for n in ["4", "5"] {
        let o = oddrmt(&["density", "--ensemble", "ginoe", "--size", n, "--grid", "-3:3:13", "--kernel", "both"]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert!(data_rows(&out).iter().all(|r| r[3] <= 1e-8));
    }
    let o = oddrmt(&["density", "--ensemble", "goe", "--grid", "-1:1:3", "--kernel", "summed"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_grids_are_usage_errors() {
    for g in ["", "0:1:1", "1:0:5", "a:b:c", "0:1"] {
        let o = oddrmt(&["density", "--grid", g]);
        assert_eq!(o.status.code(), Some(2), "grid {g:?}");
    }
    assert_eq!(oddrmt(&["density", "--grid", "0:1:3", "--size", "0"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["density"]).status.code(), Some(2));
}

#[test]
fn single_point_correlation_matches_density() {
    let d = stdout(&oddrmt(&["density", "--ensemble", "ginoe", "--size", "4", "--grid", "0.25:0.75:3"]));
    let mid = data_rows(&d)[1][1];
    let c = stdout(&oddrmt(&["correlate", "--ensemble", "ginoe", "--size", "4", "--points", "0.5"]));
    let r: f64 = header_value(&c, "rho").parse().unwrap();
    assert_eq!(r, mid);
}

#[test]
fn symmetric_pair_dump_is_antisymmetric() {
    let o = oddrmt(&["correlate", "--ensemble", "goe", "--size", "5", "--points", "-0.7,0.7"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 16);
    let at = |i: usize, j: usize| rows[i * 4 + j][2];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(at(i, j), -at(j, i));
        }
    }
}

#[test]
fn correlate_rejects_bad_points() {
    assert_eq!(oddrmt(&["correlate", "--points", "0.3,0.3"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["correlate", "--points", "0.1,0.2,0.3,0.4,0.5,0.6", "--size", "6"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["correlate", "--points", "0.1+0.5i"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["correlate", "--ensemble", "ginoe", "--points", "0.1-0.5i"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["correlate", "--points", "x"]).status.code(), Some(2));
}

/// `∫_I ∫_B ρ_(1,1)` over a real interval and a complex box by a Gauss-Legendre product rule.
fn box_integral(bundle: &KernelBundle, xr: (f64, f64), wr: (f64, f64), wi: (f64, f64)) -> f64 {
    let (t, w) = gauss_legendre(12);
    let map = |(a, b): (f64, f64), s: f64| 0.5 * (a + b) + 0.5 * (b - a) * s;
    let jac = 0.125 * (xr.1 - xr.0) * (wr.1 - wr.0) * (wi.1 - wi.0);
    let mut total = 0.0;
    for (i, &ti) in t.iter().enumerate() {
        for (j, &tj) in t.iter().enumerate() {
            for (k, &tk) in t.iter().enumerate() {
                let z = Complex64::new(map(wr, tj), map(wi, tk));
                let c = PointConfiguration::new(vec![map(xr, ti)], vec![z]).unwrap();
                total += w[i] * w[j] * w[k] * rho(bundle, &c).unwrap().value;
            }
        }
    }
    total * jac
}

#[test]
fn mixed_correlation_matches_monte_carlo() {
    let o = oddrmt(&["correlate", "--ensemble", "ginoe", "--size", "4", "--points", "0.2,0.2+0.5i"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = header_value(&stdout(&o), "rho").parse().unwrap();
    assert!(v.is_finite() && v > 0.0);

    let (xr, wr, wi) = ((0.0, 0.4), (0.0, 0.4), (0.3, 0.7));
    let bundle = KernelBundle::ginoe(4).unwrap();
    let expected = box_integral(&bundle, xr, wr, wi);
    let samples = 1_000_000;
    let (sum, sumsq) = (0..samples / CHUNK)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded_rng(99, c as u64);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..CHUNK {
                let sp = sample_real_ginibre(4, &mut rng).unwrap();
                let nr = sp.reals.iter().filter(|&&x| x >= xr.0 && x < xr.1).count();
                let nc = sp.complex_upper.iter().filter(|z| z.re >= wr.0 && z.re < wr.1 && z.im >= wi.0 && z.im < wi.1).count();
                let pairs = (nr * nc) as f64;
                s += pairs;
                s2 += pairs * pairs;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = samples as f64;
    let mean = sum / m;
    let se = ((sumsq / m - mean * mean) / m).sqrt();
    assert!((mean - expected).abs() < 3.0 * se, "mc={mean} analytic={expected} se={se}");
}

#[test]
fn verify_pfaffian_passes_and_reports_json() {
    let o = oddrmt(&["verify", "--suite", "pfaffian", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 4);
    assert_eq!(v["config"]["suite"], "pfaffian");
}

#[test]
fn verify_unknown_suite_is_usage_error() {
    assert_eq!(oddrmt(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["verify", "--suite", "reduction", "--size", "2"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["verify", "--suite", "pfaffian", "--tol-pfaffian", "0"]).status.code(), Some(2));
}

#[test]
fn verify_exit_code_tracks_report() {
    let o = oddrmt(&["verify", "--suite", "reduction", "--ensemble", "goe", "--size", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    let all_pass = checks.iter().all(|c| c["pass"] == true);
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
    let find = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap();
    assert_eq!(find("reduction.stripped_limit")["pass"], true);
    assert_eq!(find("reduction.pf3_identity")["pass"], true);
    if !all_pass {
        assert!(String::from_utf8_lossy(&o.stderr).contains("FAILED reduction."));
    }
}

#[test]
fn tolerance_overrides_are_recorded() {
    let o = oddrmt(&["verify", "--suite", "reduction", "--ensemble", "ginoe", "--size", "4", "--tol-reduction", "0.02"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header_value(&stdout(&o), "tol_reduction"), "0.02");
}

#[test]
fn mc_compare_passes_for_small_ginibre() {
    for n in ["3", "4"] {
        let o = oddrmt(&["mc-compare", "--ensemble", "ginoe", "--size", n, "--samples", "100000", "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        assert_eq!(data_rows(&out).len(), 40);
        assert_eq!(header_value(&out, "seed"), "7");
        assert!(header_value(&out, "generator").starts_with("ChaCha8Rng"));
    }
}

#[test]
fn mc_compare_validates_sample_count() {
    assert_eq!(oddrmt(&["mc-compare", "--samples", "10"]).status.code(), Some(2));
    assert_eq!(oddrmt(&["mc-compare", "--range", "1:0"]).status.code(), Some(2));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let density = ["density", "--ensemble", "ginoe", "--size", "5", "--grid", "-2:2:17"];
    assert_eq!(oddrmt(&density).stdout, oddrmt(&density).stdout);
    let mc = ["mc-compare", "--ensemble", "goe", "--size", "3", "--samples", "10000", "--seed", "3"];
    assert_eq!(oddrmt(&mc).stdout, oddrmt(&mc).stdout);
}

#[test]
fn output_file_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    let o = oddrmt(&["density", "--grid", "-1:1:5", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["config"]["command"], "density");
}
