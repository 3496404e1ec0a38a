//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use wishart_core::eigdist::{ln_joint_pdf, EigVector};
use wishart_core::numerics::{composite_legendre, gauss_laguerre};
use wishart_core::params::ln_gamma;
use wishart_core::{EvalConfig, ModelParams};

pub fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}

/// Deterministic uniforms on `[lo, hi)` for picking test points.
pub struct Points(ChaCha20Rng);

impl Points {
    pub fn new(seed: u64) -> Self {
        Points(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

/// `∫_{R_+^n} Π_i w(y_i) Δ_n(y)^2 e^{-Σ y} dy` by a tensor Gauss–Laguerre
/// rule, for `n <= 2`.
pub fn orthant_integral<W: Fn(f64) -> f64>(n: usize, order: usize, w: W) -> f64 {
    let rule = gauss_laguerre(order).unwrap();
    let (x, wt) = (&rule.nodes, &rule.weights);
    match n {
        1 => x.iter().zip(wt).map(|(&y, &c)| c * w(y)).sum(),
        2 => {
            let mut s = 0.0;
            for i in 0..x.len() {
                for j in 0..x.len() {
                    let d = x[i] - x[j];
                    s += wt[i] * wt[j] * w(x[i]) * w(x[j]) * d * d;
                }
            }
            s
        }
        _ => panic!("orthant_integral supports n <= 2"),
    }
}

/// Integral of the joint density over the ordered region, as half the
/// unordered tensor Gauss–Laguerre sum for `n = 2`.
pub fn joint_pdf_mass(params: &ModelParams, order: usize) -> f64 {
    let cfg = EvalConfig::default();
    let rule = gauss_laguerre(order).unwrap();
    let (x, lw) = (&rule.nodes, &rule.ln_weights);
    match params.n() {
        1 => x
            .iter()
            .zip(lw)
            .map(|(&l, &w)| (w + l + ln_joint_pdf(params, &EigVector::new(vec![l]).unwrap(), &cfg).unwrap()).exp())
            .sum(),
        2 => {
            let mut s = 0.0;
            for i in 0..x.len() {
                for j in 0..i {
                    let v = EigVector::new(vec![x[j], x[i]]).unwrap();
                    let ln = ln_joint_pdf(params, &v, &cfg).unwrap();
                    s += (lw[i] + lw[j] + x[i] + x[j] + ln).exp();
                }
            }
            s
        }
        _ => panic!("joint_pdf_mass supports n <= 2"),
    }
}

/// `Ψ(a;c;z)` from its integral representation on `t = s/(1-s)` by
/// composite Gauss–Legendre; independent of the library's own Ψ.
pub fn tricomi_by_legendre(a: f64, c: f64, z: f64) -> f64 {
    let ln_ga = ln_gamma(a);
    composite_legendre(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let t = s / (1.0 - s);
            let jac = 1.0 / ((1.0 - s) * (1.0 - s));
            let ln = -z * t + (a - 1.0) * t.ln() + (c - a - 1.0) * t.ln_1p() - ln_ga;
            if t == 0.0 {
                return if a == 1.0 { jac * (-ln_ga).exp() } else { 0.0 };
            }
            ln.exp() * jac
        },
        0.0,
        1.0,
        400,
        20,
    )
    .unwrap()
}
