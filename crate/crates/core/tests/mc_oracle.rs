use wishart_core::mc::{
    ks_statistic, mean_estimate, sample_eigs, sample_eigs_with_mean, McConfig, MeanLayout, TabulatedCdf,
};
use wishart_core::mineig::{mineig_cdf_det, MinEigQuery};
use wishart_core::ModelParams;

fn params(n: usize, m: usize, mu: f64) -> ModelParams {
    ModelParams::new(n, m, mu).unwrap()
}

#[test]
fn scalar_central_has_unit_mean() {
    let batch = sample_eigs(&params(1, 1, 0.0), &McConfig::new(200_000, 7, 8).unwrap()).unwrap();
    let est = mean_estimate(&batch.traces()).unwrap();
    assert!((est.mean - 1.0).abs() < 0.004, "{est:?}");
}

#[test]
fn central_square_min_eig_probability() {
    let batch = sample_eigs(&params(2, 2, 0.0), &McConfig::new(200_000, 11, 8).unwrap()).unwrap();
    let mins = batch.min_eigs();
    let frac = mins.iter().filter(|&&x| x < 0.5).count() as f64 / mins.len() as f64;
    assert!((frac - (1.0 - (-1.0f64).exp())).abs() < 0.002, "{frac}");
}

#[test]
fn trace_mean_is_mn_plus_mu() {
    for &(n, m, mu) in &[(2, 3, 1.5), (3, 3, 4.0), (1, 4, 0.5)] {
        let batch = sample_eigs(&params(n, m, mu), &McConfig::new(100_000, 3, 16).unwrap()).unwrap();
        let est = mean_estimate(&batch.traces()).unwrap();
        let want = (n * m) as f64 + mu;
        assert!(((est.mean - want) / est.std_err).abs() < 4.0, "({n},{m},{mu}): {est:?}");
    }
}

#[test]
fn rotated_mean_matches_the_same_law() {
    let p = params(2, 3, 2.0);
    let cfg = McConfig::new(100_000, 19, 8).unwrap();
    let table = TabulatedCdf::build(|x| mineig_cdf_det(&MinEigQuery::new(p, x)?), 0.0, 8.0, 2001).unwrap();
    for layout in [MeanLayout::Corner, MeanLayout::Rotated] {
        let mins = sample_eigs_with_mean(&p, &cfg, layout).unwrap().min_eigs();
        let ks = ks_statistic(&mins, |x| table.eval(x)).unwrap();
        assert!(ks < 0.01, "{layout:?}: KS {ks}");
    }
}

#[test]
fn output_does_not_depend_on_stream_count() {
    let p = params(2, 2, 1.0);
    let a = sample_eigs(&p, &McConfig::new(1000, 5, 1).unwrap()).unwrap();
    let b = sample_eigs(&p, &McConfig::new(1000, 5, 13).unwrap()).unwrap();
    let rows = |batch: &wishart_core::mc::SampleBatch| batch.rows().flatten().copied().collect::<Vec<f64>>();
    assert_eq!(rows(&a), rows(&b));
    let c = sample_eigs(&p, &McConfig::new(1000, 6, 13).unwrap()).unwrap();
    assert_ne!(rows(&a), rows(&c));
}

#[test]
fn eigenvalues_are_sorted_and_nonnegative() {
    let batch = sample_eigs(&params(4, 4, 3.0), &McConfig::new(2000, 1, 4).unwrap()).unwrap();
    for row in batch.rows() {
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
        assert!(row[0] >= 0.0);
    }
}
