//! Monte Carlo sampling of the model `W = X†X`, `X = M + G`.
//!
//! Every draw has its own ChaCha20 stream keyed by the seed, so the sample
//! set depends only on `(seed, samples)`. The number of lanes only changes
//! how the work is split.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigvals, ComplexMatrix};
use crate::params::ModelParams;
use crate::specfun::KahanSum;

/// Jacobi stopping tolerance relative to `‖W‖_F`.
pub const EIG_TOL: f64 = 1e-14;
/// Eigenvalues down to `-NEG_CLAMP` are rounding noise and set to zero.
pub const NEG_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub streams: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64, streams: usize) -> Result<Self> {
        let c = McConfig { samples, seed, streams };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.streams == 0 {
            return Err(Error::InvalidParams(format!("samples and streams must be >= 1, got {self:?}")));
        }
        Ok(())
    }
}

/// Placement of the rank-one mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanLayout {
    /// `√μ` in entry `(1,1)`.
    #[default]
    Corner,
    /// `√μ u v†` for fixed dense unit vectors `u`, `v` with complex phases.
    Rotated,
}

/// Eigenvalues of every draw, ascending within a row, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub params: ModelParams,
    pub config: McConfig,
    eigs: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.config.samples
    }

    pub fn is_empty(&self) -> bool {
        self.config.samples == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.params.n();
        &self.eigs[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.eigs.chunks_exact(self.params.n())
    }

    pub fn min_eigs(&self) -> Vec<f64> {
        self.rows().map(|r| r[0]).collect()
    }

    pub fn traces(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    /// `tr(W) / λ_1` per draw.
    pub fn demmel_values(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum::<f64>() / r[0]).collect()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn key_for(seed: u64, attempt: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut s = seed ^ attempt.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    key
}

/// Uniform on `(0, 1]`.
fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Complex normal with variance 1/2 per component, by Box–Muller.
fn complex_normal(rng: &mut ChaCha20Rng) -> Complex64 {
    let r = (-uniform(rng).ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * uniform(rng);
    Complex64::from_polar(r, theta)
}

fn mean_matrix(params: &ModelParams, layout: MeanLayout) -> ComplexMatrix {
    let (n, m) = (params.n(), params.m());
    let root = params.mu().sqrt();
    let mut mat = ComplexMatrix::zeros(m, n);
    match layout {
        MeanLayout::Corner => mat.set(0, 0, Complex64::new(root, 0.0)),
        MeanLayout::Rotated => {
            let u: Vec<Complex64> = (0..m).map(|i| Complex64::from_polar(1.0 + i as f64, 0.7 * i as f64)).collect();
            let v: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(2.0 + j as f64, -1.3 * j as f64)).collect();
            let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..m {
                for j in 0..n {
                    mat.set(i, j, root * u[i] * v[j].conj() / (nu * nv));
                }
            }
        }
    }
    mat
}

fn draw(params: &ModelParams, mean: &ComplexMatrix, key: [u8; 32], index: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(index);
    let (n, m) = (params.n(), params.m());
    let mut x = mean.clone();
    for i in 0..m {
        for j in 0..n {
            x.set(i, j, x.get(i, j) + complex_normal(&mut rng));
        }
    }
    let mut eigs = hermitian_eigvals(&x.gram(), EIG_TOL)?;
    for l in eigs.iter_mut() {
        if *l < 0.0 {
            if *l < -NEG_CLAMP * (1.0 + x.frobenius().powi(2)) {
                return Err(Error::Internal(format!("sampled eigenvalue {l} is negative")));
            }
            *l = 0.0;
        }
    }
    Ok(eigs)
}

/// Draws `config.samples` eigenvalue vectors with the mean at `(1,1)`.
pub fn sample_eigs(params: &ModelParams, config: &McConfig) -> Result<SampleBatch> {
    sample_eigs_with_mean(params, config, MeanLayout::Corner)
}

pub fn sample_eigs_with_mean(params: &ModelParams, config: &McConfig, layout: MeanLayout) -> Result<SampleBatch> {
    config.validate()?;
    let n = params.n();
    let mean = mean_matrix(params, layout);
    let key = key_for(config.seed, 0);
    let retry_key = key_for(config.seed, 1);
    let per = config.samples.div_ceil(config.streams);
    let lanes: Vec<Result<Vec<f64>>> = (0..config.streams)
        .into_par_iter()
        .map(|lane| {
            let lo = (lane * per).min(config.samples);
            let hi = ((lane + 1) * per).min(config.samples);
            let mut out = Vec::with_capacity((hi - lo) * n);
            for idx in lo..hi {
                let row = match draw(params, &mean, key, idx as u64) {
                    Ok(r) => r,
                    Err(Error::EigenNonConvergence { .. }) => draw(params, &mean, retry_key, idx as u64)?,
                    Err(e) => return Err(e),
                };
                out.extend_from_slice(&row);
            }
            Ok(out)
        })
        .collect();
    let mut eigs = Vec::with_capacity(config.samples * n);
    for lane in lanes {
        eigs.extend(lane?);
    }
    Ok(SampleBatch { params: *params, config: *config, eigs })
}

/// Kolmogorov–Smirnov distance between the sample's empirical c.d.f. and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64 + Sync>(values: &[f64], cdf: F) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParams("ks_statistic needs a nonempty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.par_sort_unstable_by(f64::total_cmp);
    let nf = sorted.len() as f64;
    Ok(sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Sample mean and standard error, summed in index order.
pub fn mean_estimate(values: &[f64]) -> Result<MeanEstimate> {
    if values.is_empty() {
        return Err(Error::InvalidParams("mean of an empty sample".into()));
    }
    let nf = values.len() as f64;
    let mut s = KahanSum::new();
    for &v in values {
        s.add(v);
    }
    let mean = s.sum() / nf;
    let mut ss = KahanSum::new();
    for &v in values {
        ss.add((v - mean) * (v - mean));
    }
    let var = if values.len() > 1 { ss.sum() / (nf - 1.0) } else { 0.0 };
    Ok(MeanEstimate { mean, std_err: (var / nf).sqrt() })
}

/// Estimate of `E[1/det(zI + W)]`.
pub fn mc_recip_avg(params: &ModelParams, z: f64, config: &McConfig) -> Result<MeanEstimate> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("z = {z} must be finite and > 0")));
    }
    let batch = sample_eigs(params, config)?;
    recip_avg_of(&batch, z)
}

pub fn recip_avg_of(batch: &SampleBatch, z: f64) -> Result<MeanEstimate> {
    let vals: Vec<f64> = batch.rows().map(|r| r.iter().map(|l| 1.0 / (z + l)).product()).collect();
    mean_estimate(&vals)
}

/// A c.d.f. sampled on a uniform grid and linearly interpolated; 0 below
/// the grid and the last tabulated value above it.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn build<F: Fn(f64) -> Result<f64> + Sync>(f: F, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 2 || !(hi > lo) {
            return Err(Error::InvalidParams(format!("bad table [{lo}, {hi}] with {points} points")));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let values = (0..points).into_par_iter().map(|i| f(lo + step * i as f64)).collect::<Result<Vec<_>>>()?;
        Ok(TabulatedCdf { lo, step, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo {
            return if x < self.lo { 0.0 } else { self.values[0] };
        }
        let pos = (x - self.lo) / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().expect("table is nonempty");
        }
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, mu: f64) -> ModelParams {
        ModelParams::new(n, m, mu).unwrap()
    }

    #[test]
    fn reproducible_across_lane_counts() {
        let p = params(2, 3, 1.0);
        let a = sample_eigs(&p, &McConfig::new(1000, 7, 1).unwrap()).unwrap();
        let b = sample_eigs(&p, &McConfig::new(1000, 7, 13).unwrap()).unwrap();
        let c = sample_eigs(&p, &McConfig::new(1000, 7, 13).unwrap()).unwrap();
        assert_eq!(a.eigs, b.eigs);
        assert_eq!(b, c);
        let d = sample_eigs(&p, &McConfig::new(1000, 8, 1).unwrap()).unwrap();
        assert_ne!(a.eigs, d.eigs);
    }

    #[test]
    fn rows_are_ascending_and_nonnegative() {
        let b = sample_eigs(&params(3, 5, 2.0), &McConfig::new(2000, 1, 4).unwrap()).unwrap();
        assert_eq!(b.len(), 2000);
        for r in b.rows() {
            assert!(r[0] >= 0.0);
            assert!(r.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn ks_examples() {
        let u: Vec<f64> = (0..100_000).map(|i| (i as f64 + 0.5) / 100_000.0).collect();
        let d = ks_statistic(&u, |x| x * x).unwrap();
        assert!((d - 0.25).abs() < 1e-4);
        let d = ks_statistic(&[0.3; 10], |x| x).unwrap();
        assert!((d - 0.7).abs() < 1e-15);
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn mean_estimate_basics() {
        let e = mean_estimate(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.std_err - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn table_interpolates() {
        let t = TabulatedCdf::build(|x| Ok(x / 10.0), 0.0, 10.0, 11).unwrap();
        assert_eq!(t.eval(-1.0), 0.0);
        assert!((t.eval(2.5) - 0.25).abs() < 1e-15);
        assert_eq!(t.eval(12.0), 1.0);
    }

    #[test]
    fn rejects_zero_samples() {
        assert!(McConfig::new(0, 1, 1).is_err());
        assert!(McConfig::new(1, 1, 0).is_err());
    }
}
