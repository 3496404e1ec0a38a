mod common;

use common::rel;
use wishart_core::charpoly::recip_charpoly_avg;
use wishart_core::demmel::{demmel_cdf, demmel_mgf, demmel_pdf, demmel_pdf_central, DemmelQuery};
use wishart_core::mineig::{mineig_cdf, mineig_cdf_det, MinEigQuery};
use wishart_core::params::{ln_factorial, norm_constants};
use wishart_core::{EvalConfig, ModelParams};

fn params(n: usize, m: usize, mu: f64) -> ModelParams {
    ModelParams::new(n, m, mu).unwrap()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[test]
fn k_mn_matches_direct_factorials() {
    for n in 1..=6 {
        for a in 0..=6 {
            let m = n + a;
            let k = norm_constants(&params(n, m, 0.0)).unwrap();
            let direct: f64 = (1..=n).map(|i| factorial(m - i) * factorial(n - i)).product();
            assert!(rel(k.log_k_mn.exp(), 1.0 / direct) < 1e-12, "n={n} m={m}");
            let joint = direct.recip() * factorial(n - 1) * factorial(m - 1) / factorial(a);
            assert!(rel(k.log_k_joint.exp(), joint) < 1e-12, "n={n} m={m}");
        }
    }
}

#[test]
fn k_bar_sign_alternates_as_expected() {
    for n in 1..=10 {
        for a in 0..=6 {
            let k = norm_constants(&params(n, n + a, 0.0)).unwrap();
            let parity = (n + a * (n + a)) % 2;
            assert_eq!(k.sign_k_bar, if parity == 0 { 1.0 } else { -1.0 });
            assert!(k.log_k_bar_abs.is_finite() && k.log_k_tilde.is_finite());
        }
    }
}

#[test]
fn ln_factorial_is_exact_for_small_arguments() {
    for k in 0..=20 {
        assert!((ln_factorial(k) - factorial(k).ln()).abs() < 1e-12);
    }
}

#[test]
fn mineig_cdf_is_a_distribution_function() {
    for &(n, m, mu) in &[(2, 2, 1.0), (3, 4, 2.5), (2, 5, 0.0)] {
        let p = params(n, m, mu);
        let vals: Vec<f64> = (0..40)
            .map(|i| 0.05 * i as f64)
            .map(|x| mineig_cdf(&MinEigQuery::new(p, x).unwrap()).unwrap())
            .collect();
        assert!(vals[0].abs() < 1e-14);
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-13), "({n},{m},{mu})");
        assert!(vals.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        let far = mineig_cdf_det(&MinEigQuery::new(p, 60.0).unwrap()).unwrap();
        assert!((far - 1.0).abs() < 1e-9, "({n},{m},{mu}): {far}");
    }
}

#[test]
fn mineig_cdf_grows_slower_with_larger_mean() {
    let x = 0.4;
    let lo = mineig_cdf(&MinEigQuery::new(params(3, 3, 0.5), x).unwrap()).unwrap();
    let hi = mineig_cdf(&MinEigQuery::new(params(3, 3, 8.0), x).unwrap()).unwrap();
    assert!(hi < lo);
}

#[test]
fn demmel_tiny_mean_approaches_central() {
    for &(n, a) in &[(2usize, 0usize), (2, 2), (3, 1)] {
        for &v in &[n as f64 + 0.5, 6.0, 15.0, 40.0] {
            let tiny = demmel_pdf(&DemmelQuery::new(params(n, n + a, 1e-8), v).unwrap()).unwrap();
            let central = demmel_pdf_central(&params(n, n + a, 0.0), v).unwrap();
            assert!((tiny - central).abs() <= 1e-5 * central.max(1e-3), "n={n} a={a} v={v}");
        }
    }
}

#[test]
fn demmel_cdf_is_monotone() {
    let p = params(3, 4, 1.0);
    let vals: Vec<f64> = (1..30)
        .map(|i| 3.0 + 0.5 * i as f64)
        .map(|v| demmel_cdf(&DemmelQuery::new(p, v).unwrap()).unwrap())
        .collect();
    assert!(vals.windows(2).all(|w| w[1] >= w[0]));
    assert!(vals.iter().all(|&c| (0.0..=1.0).contains(&c)));
}

#[test]
fn demmel_mgf_decreases_to_zero() {
    let p = params(2, 3, 1.0);
    let cfg = EvalConfig::default();
    let vals: Vec<f64> = [0.0, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0]
        .iter()
        .map(|&s| demmel_mgf(&p, s, &cfg).unwrap())
        .collect();
    assert!((vals[0] - 1.0).abs() < 1e-8, "{}", vals[0]);
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    assert!(*vals.last().unwrap() < 1e-3);
}

#[test]
fn charpoly_tiny_mean_approaches_central() {
    let cfg = EvalConfig::default();
    for &z in &[0.2, 1.0, 5.0] {
        let a = recip_charpoly_avg(&params(2, 4, 1e-9), z, &cfg).unwrap().value;
        let b = recip_charpoly_avg(&params(2, 4, 0.0), z, &cfg).unwrap().value;
        assert!(rel(a, b) < 1e-7);
    }
}
