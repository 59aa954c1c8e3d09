use num_complex::Complex64;
use oddrmt::kernels::{ginoe_summed_s, interrelations_check, rho, Block, KernelBundle, Point, PointConfiguration};
use oddrmt::mc::{compare, McConfig, McEnsemble};
use oddrmt::reduction::{factorisation_check, verify_odd_limit_beta1, FactorisationTarget, DEFAULT_SCHEDULE};
use oddrmt::skew::{build_family_beta1, ginoe_family, ginoe_gram, sinclair_normalization, SkewOrthogonalFamily, WeightSpec};
use oddrmt::specfun::{gamma, SQRT_2PI};

#[test]
fn ginoe_gram_is_skew_orthogonal_up_to_eight() {
    for n in 2..=8 {
        let g = ginoe_gram(&ginoe_family(n).unwrap()).unwrap();
        let r0 = g[0][1];
        for j in 0..n {
            for k in 0..n {
                assert!((g[j][k] + g[k][j]).abs() <= 1e-9 * r0, "antisymmetry N={n} ({j},{k})");
                if j % 2 == 0 && k == j + 1 {
                    let expect = 2.0 * SQRT_2PI * gamma((j + 1) as f64).unwrap();
                    assert!((g[j][k] / expect - 1.0).abs() <= 1e-5);
                } else if !(k % 2 == 0 && j == k + 1) {
                    assert!(g[j][k].abs() <= 1e-6 * r0, "N={n} ({j},{k}) = {}", g[j][k]);
                }
            }
        }
    }
}

#[test]
fn sinclair_normalisation_small_sizes() {
    for n in 2..=4 {
        assert!((sinclair_normalization(n).unwrap() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn family_survives_json_roundtrip() {
    let w = WeightSpec::gaussian();
    let fam = build_family_beta1(&w, 5).unwrap();
    let back = SkewOrthogonalFamily::from_json(&fam.to_json(), w.clone()).unwrap();
    assert_eq!(back.coeffs, fam.coeffs);
    assert_eq!(back.norms, fam.norms);
    let other = WeightSpec::custom("sextic", |x: f64| x.powi(6) / 6.0, 6.0).unwrap();
    assert!(SkewOrthogonalFamily::from_json(&fam.to_json(), other).is_err());
}

#[test]
fn custom_weight_kernel_normalises() {
    let w = WeightSpec::custom("quartic", |x: f64| x.powi(4) / 4.0, 6.0).unwrap();
    for n in [2, 3, 4, 5] {
        let b = KernelBundle::beta1(&w, n).unwrap();
        let total = oddrmt::kernels::dyson_recurrence_check(&b, &[]).unwrap();
        assert!(total < 1e-8, "N={n}: {total}");
    }
}

#[test]
fn summed_forms_match_for_both_parities() {
    let reals = [-1.1, 0.0, 0.6];
    let ws = [Complex64::new(0.3, 0.2), Complex64::new(-0.9, 1.4)];
    for n in [4, 5] {
        let b = KernelBundle::ginoe(n).unwrap();
        for &x in &reals {
            for &y in &reals {
                let (p, q) = (Point::Real(x), Point::Real(y));
                assert!((ginoe_summed_s(n, Block::Rr, p, q).unwrap() - b.s(p, q).unwrap()).norm() < 1e-12);
            }
            for &w in &ws {
                let (p, q) = (Point::Real(x), Point::Complex(w));
                assert!((ginoe_summed_s(n, Block::Rc, p, q).unwrap() - b.s(p, q).unwrap()).norm() < 1e-12);
                assert!((ginoe_summed_s(n, Block::Cr, q, p).unwrap() - b.s(q, p).unwrap()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn interrelations_both_parities() {
    for n in [4, 5] {
        let b = KernelBundle::ginoe(n).unwrap();
        let rep = interrelations_check(&b, &[-0.5, 0.8], &[Complex64::new(0.1, 0.6)]).unwrap();
        assert!(rep.max() < 1e-5, "N={n}: {rep:?}");
        let g = KernelBundle::beta1(&WeightSpec::gaussian(), n).unwrap();
        assert!(interrelations_check(&g, &[-0.5, 0.8, 1.3], &[]).unwrap().max() < 1e-5);
    }
}

#[test]
fn odd_limit_is_exact_when_weight_is_stripped() {
    let r = verify_odd_limit_beta1(&WeightSpec::gaussian(), 4, &[0.5, -0.2], &DEFAULT_SCHEDULE).unwrap();
    assert!(r.limit_max() < 1e-8);
    assert_eq!(r.x_m, DEFAULT_SCHEDULE.to_vec());
}

#[test]
fn factorisation_trends_to_one() {
    for t in [FactorisationTarget::Beta1(WeightSpec::gaussian()), FactorisationTarget::Ginoe] {
        let f = factorisation_check(&t, 4, &[0.0], &[6.0, 8.0, 10.0, 12.0]).unwrap();
        let devs: Vec<f64> = f.ratios.iter().map(|r| (r - 1.0).abs()).collect();
        assert!(devs.last().unwrap() < &devs[0]);
    }
}

#[test]
fn goe_odd_histogram_matches_kernel() {
    let cfg = McConfig::new(McEnsemble::Goe, 3, 20_000, 17);
    let rep = compare(&cfg).unwrap();
    assert!(rep.passes(), "max |z| = {}, mean z = {}", rep.max_abs_z(), rep.mean_z);
    assert!((rep.expected_real_count - 3.0).abs() < 1e-9);
}

#[test]
fn mixed_correlations_are_nonnegative() {
    let b = KernelBundle::ginoe(5).unwrap();
    for x in [-1.0, 0.0, 0.7] {
        for w in [Complex64::new(0.1, 0.1), Complex64::new(1.0, 0.9)] {
            let v = rho(&b, &PointConfiguration::new(vec![x], vec![w]).unwrap()).unwrap();
            assert!(v.value >= -1e-8 && v.imag_residue < 1e-9);
        }
    }
}
