//! Problem instance, evaluation settings, output curves, and the
//! normalization constants shared by every formula module.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest `n + alpha` for which normalization constants are tabulated.
pub const MAX_DIM: usize = 512;

/// Double-precision validity envelope. Outside of it the determinant
/// entries and the alternating char-poly series lose accuracy.
pub const ENVELOPE_MAX_DIM: usize = 64;
pub const ENVELOPE_MAX_MU: f64 = 50.0;

/// An `n x n` complex non-central Wishart model with `m` degrees of freedom
/// and a rank-1 mean of squared Frobenius norm `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n: usize,
    m: usize,
    mu: f64,
}

impl ModelParams {
    /// Validates `m >= n >= 1`, `mu >= 0` and the double-precision envelope.
    pub fn new(n: usize, m: usize, mu: f64) -> Result<Self> {
        let p = Self::new_outside_envelope(n, m, mu)?;
        if m > ENVELOPE_MAX_DIM {
            return Err(Error::Envelope(format!(
                "n + alpha = {m} exceeds {ENVELOPE_MAX_DIM}"
            )));
        }
        if mu > ENVELOPE_MAX_MU {
            return Err(Error::Envelope(format!("mu = {mu} exceeds {ENVELOPE_MAX_MU}")));
        }
        Ok(p)
    }

    /// Same checks as [`ModelParams::new`] minus the accuracy envelope. The
    /// caller acknowledges that results may lose digits.
    pub fn new_outside_envelope(n: usize, m: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if m < n {
            return Err(Error::InvalidParams(format!("m = {m} must be >= n = {n}")));
        }
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParams(format!("mu = {mu} must be finite and >= 0")));
        }
        Ok(ModelParams { n, m, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> usize {
        self.m - self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Copy of `self` with a different noncentrality.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new_outside_envelope(self.n, self.m, mu)
    }
}

/// Tolerances, truncation caps and quadrature orders for series and
/// quadrature evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
    pub quad_order: usize,
    pub laplace_terms: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_terms: 10_000,
            quad_order: 200,
            laplace_terms: 500,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.rel_tol < 1.0
            && self.abs_tol > 0.0
            && self.max_terms > 0
            && self.quad_order > 0
            && self.laplace_terms > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid evaluation config {self:?}")))
        }
    }
}

/// A sampled function: strictly increasing grid, matching values, and
/// free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl Curve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, meta: BTreeMap<String, String>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidParams(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("curve grid must be strictly increasing".into()));
        }
        Ok(Curve { grid, values, meta })
    }
}

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(MAX_DIM * 4 + 1);
        let mut f = 1.0f64;
        t.push(0.0);
        for k in 1..=(MAX_DIM * 4) {
            if k <= 170 {
                f *= k as f64;
                t.push(f.ln());
            } else {
                t.push(statrs::function::gamma::ln_gamma(k as f64 + 1.0));
            }
        }
        t
    })
}

/// `ln(k!)`.
pub fn ln_factorial(k: usize) -> f64 {
    let t = factorial_table();
    if k < t.len() {
        t[k]
    } else {
        statrs::function::gamma::ln_gamma(k as f64 + 1.0)
    }
}

/// `ln Γ(x)` for `x > 0`; exact table lookup at positive integers.
pub fn ln_gamma(x: f64) -> f64 {
    if x >= 1.0 && x.fract() == 0.0 && x < 2049.0 {
        ln_factorial(x as usize - 1)
    } else {
        statrs::function::gamma::ln_gamma(x)
    }
}

/// Normalization constants in natural-log form. Only the constant that can
/// be negative carries an explicit sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConstants {
    /// `ln K_{m,n}`, the central joint-density constant.
    pub log_k_mn: f64,
    /// `ln 𝒦_{n,α} = ln(K_{n+α,n} (n-1)! (n+α-1)! / α!)`.
    pub log_k_joint: f64,
    /// `ln |𝒦̄_{n,α}|` from the Laguerre-weight multiple integral.
    pub log_k_bar_abs: f64,
    /// Sign of `𝒦̄_{n,α}`, `(-1)^{n + α(n+α)}`.
    pub sign_k_bar: f64,
    /// `ln 𝒦̃_{n,α}` from the `y² e^{-y}` weight multiple integral.
    pub log_k_tilde: f64,
}

pub fn norm_constants(params: &ModelParams) -> Result<NormConstants> {
    let n = params.n();
    let a = params.alpha();
    if n + a > MAX_DIM {
        return Err(Error::SizeLimit { size: n + a, limit: MAX_DIM });
    }
    let m = params.m();
    let lf = ln_factorial;

    let log_k_mn = -(1..=n).map(|i| lf(m - i) + lf(n - i)).sum::<f64>();
    let log_k_joint = log_k_mn + lf(n - 1) + lf(n + a - 1) - lf(a);

    let prod_shift: f64 = (1..=a + 1).map(|i| lf(n + i - 1)).sum();
    let log_k_bar_abs = prod_shift + (0..n).map(|i| lf(i) + lf(i + 1)).sum::<f64>()
        - (1..a).map(lf).sum::<f64>();
    let sign_exp = n + a * (n + a);
    let sign_k_bar = if sign_exp % 2 == 0 { 1.0 } else { -1.0 };

    let log_k_tilde = prod_shift + (0..n).map(|j| lf(j + 1) + lf(j + 2)).sum::<f64>()
        - (0..a).map(lf).sum::<f64>();

    Ok(NormConstants { log_k_mn, log_k_joint, log_k_bar_abs, sign_k_bar, log_k_tilde })
}
