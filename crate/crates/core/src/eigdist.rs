//! Joint eigenvalue density of `W` and the closed-form Laguerre-weight
//! multiple integrals used by the other distributions.

use crate::error::{Error, Result};
use crate::linalg::{lu_det, RealMatrix};
use crate::numerics::divided_difference;
use crate::params::{ln_factorial, norm_constants, EvalConfig, ModelParams};
use crate::signed::SignedLog;
use crate::specfun::{hyp0f1_cfg, laguerre, pochhammer, sum_ratio_series};

/// Below this noncentrality the joint density switches to its central limit.
pub const CENTRAL_CROSSOVER_MU: f64 = 1e-8;

/// Ordered eigenvalues `0 < λ_1 <= ... <= λ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigVector {
    lambdas: Vec<f64>,
}

impl EigVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParams("empty eigenvalue vector".into()));
        }
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Domain("eigenvalues must be positive and finite".into()));
        }
        if lambdas.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams("eigenvalues must be ascending".into()));
        }
        Ok(EigVector { lambdas })
    }

    /// Sorts first.
    pub fn from_unsorted(mut lambdas: Vec<f64>) -> Result<Self> {
        lambdas.sort_by(f64::total_cmp);
        Self::new(lambdas)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `ln Δ_n(λ)^2`.
    pub fn ln_vandermonde_sq(&self) -> f64 {
        let l = &self.lambdas;
        let mut s = 0.0;
        for i in 0..l.len() {
            for k in i + 1..l.len() {
                s += 2.0 * (l[k] - l[i]).abs().ln();
            }
        }
        s
    }
}

fn check_dims(params: &ModelParams, lambdas: &EigVector) -> Result<()> {
    if lambdas.len() != params.n() {
        return Err(Error::InvalidParams(format!(
            "{} eigenvalues for n = {}",
            lambdas.len(),
            params.n()
        )));
    }
    Ok(())
}

/// `(₀F₁(α+1; μt) - Taylor_{n-2}) / μ^{n-1}`: the degree `< n-1` part has a
/// zero divided difference, and dropping it avoids the small-μ cancellation.
fn shifted_hyp0f1(alpha: usize, n: usize, mu: f64, t: f64, cfg: &EvalConfig) -> f64 {
    let a1 = alpha as f64 + 1.0;
    let k0 = n - 1;
    let first = t.powi(k0 as i32) / (pochhammer(a1, k0) * ln_factorial(k0).exp());
    sum_ratio_series(
        first,
        |k| {
            let kk = (k0 + k) as f64;
            mu * t / ((a1 + kk) * (kk + 1.0))
        },
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_terms,
    )
    .value
}

/// `f[λ_1..λ_n] / μ^{n-1}` with `f(t) = ₀F₁(α+1; μt)`; always positive.
fn scaled_divided_difference(params: &ModelParams, lambdas: &EigVector, cfg: &EvalConfig) -> Result<f64> {
    let (n, alpha, mu) = (params.n(), params.alpha(), params.mu());
    divided_difference(|t| shifted_hyp0f1(alpha, n, mu, t, cfg), lambdas.as_slice())
}

/// `₀F̃₁(m; Λ, M†M)` for a rank-1 `M†M` with trace `μ`.
pub fn rank1_hyp0f1_matrix(params: &ModelParams, lambdas: &EigVector) -> Result<f64> {
    rank1_hyp0f1_matrix_cfg(params, lambdas, &EvalConfig::default())
}

pub fn rank1_hyp0f1_matrix_cfg(params: &ModelParams, lambdas: &EigVector, cfg: &EvalConfig) -> Result<f64> {
    check_dims(params, lambdas)?;
    let (n, m, alpha, mu) = (params.n(), params.m(), params.alpha(), params.mu());
    if mu == 0.0 {
        return Ok(1.0);
    }
    if n == 1 {
        return hyp0f1_cfg(m as f64, mu * lambdas.as_slice()[0], cfg).check("0F1");
    }
    let ln_norm = ln_factorial(n - 1) + ln_factorial(m - 1) - ln_factorial(alpha);
    let dd = scaled_divided_difference(params, lambdas, cfg)?;
    Ok((ln_norm + dd.ln()).exp())
}

/// Joint density of the ordered eigenvalues of `W`.
pub fn joint_pdf(params: &ModelParams, lambdas: &EigVector) -> Result<f64> {
    Ok(ln_joint_pdf(params, lambdas, &EvalConfig::default())?.exp())
}

/// Natural log of [`joint_pdf`].
pub fn ln_joint_pdf(params: &ModelParams, lambdas: &EigVector, cfg: &EvalConfig) -> Result<f64> {
    check_dims(params, lambdas)?;
    let nc = norm_constants(params)?;
    let alpha = params.alpha() as f64;
    let l = lambdas.as_slice();
    if let Some((a, b)) = crate::numerics::find_coincident(l) {
        return Err(Error::CoincidentNodes { a, b });
    }
    let weight: f64 = l.iter().map(|&x| alpha * x.ln() - x).sum::<f64>() + lambdas.ln_vandermonde_sq();
    if params.mu() < CENTRAL_CROSSOVER_MU {
        return Ok(nc.log_k_mn + weight);
    }
    let dd = scaled_divided_difference(params, lambdas, cfg)?;
    Ok(nc.log_k_joint - params.mu() + weight + dd.ln())
}

fn det_times(prefactor: SignedLog, rows: Vec<Vec<f64>>) -> Result<SignedLog> {
    if rows.is_empty() {
        return Ok(prefactor);
    }
    Ok(prefactor * lu_det(&RealMatrix::from_rows(&rows)?)?)
}

fn require_distinct(a: f64, b: f64, what: &str) -> Result<()> {
    if a == b {
        Err(Error::Domain(format!("{what}: arguments must differ")))
    } else {
        Ok(())
    }
}

/// `1 / (b - a)^α` in signed-log form.
fn inv_power(diff: f64, alpha: usize) -> SignedLog {
    let sign = if diff < 0.0 && alpha % 2 == 1 { -1.0 } else { 1.0 };
    SignedLog::new(sign, -(alpha as f64) * diff.abs().ln())
}

/// `Q_n(a,b,α) = ∫_{R_+^n} Π (a-y_i)(b-y_i)^α e^{-y_i} Δ_n(y)^2 dy`.
pub fn q_closed(n: usize, alpha: usize, a: f64, b: f64) -> Result<SignedLog> {
    if n == 0 || alpha == 0 {
        return Err(Error::InvalidParams("q_closed needs n >= 1 and alpha >= 1".into()));
    }
    require_distinct(a, b, "q_closed")?;
    let nc = norm_constants(&ModelParams::new_outside_envelope(n, n + alpha, 0.0)?)?;
    let rows = (1..=alpha + 1)
        .map(|i| {
            let mut row = vec![laguerre(n + i - 1, 0.0, a)];
            for j in 2..=alpha + 1 {
                row.push(crate::specfun::laguerre_i((n + i + 1) as i64 - j as i64, (j - 2) as f64, b));
            }
            row
        })
        .collect();
    let pre = SignedLog::new(nc.sign_k_bar, nc.log_k_bar_abs) * inv_power(b - a, alpha);
    det_times(pre, rows)
}

/// `R_n(a,α) = ∫ Π y_i (a-y_i)^α e^{-y_i} Δ_n(y)^2 dy`.
pub fn r_closed(n: usize, alpha: usize, a: f64) -> Result<SignedLog> {
    if n == 0 {
        return Err(Error::InvalidParams("r_closed needs n >= 1".into()));
    }
    let ln_pre = (0..n).map(|j| 2.0 * ln_factorial(j + 1)).sum::<f64>()
        + (0..alpha).map(|j| ln_factorial(n + j) - ln_factorial(j)).sum::<f64>();
    let sign = if (n * alpha) % 2 == 0 { 1.0 } else { -1.0 };
    let rows = (1..=alpha)
        .map(|i| {
            (1..=alpha)
                .map(|j| crate::specfun::laguerre_i((n + i) as i64 - j as i64, j as f64, a))
                .collect()
        })
        .collect();
    det_times(SignedLog::new(sign, ln_pre), rows)
}

/// `T_n(a,b,α) = ∫ Π (a-y_i)(b-y_i)^α y_i^2 e^{-y_i} Δ_n(y)^2 dy`.
pub fn t_closed(n: usize, alpha: usize, a: f64, b: f64) -> Result<SignedLog> {
    if n == 0 || alpha == 0 {
        return Err(Error::InvalidParams("t_closed needs n >= 1 and alpha >= 1".into()));
    }
    require_distinct(a, b, "t_closed")?;
    let nc = norm_constants(&ModelParams::new_outside_envelope(n, n + alpha, 0.0)?)?;
    let rows = (1..=alpha + 1)
        .map(|i| {
            let mut row = vec![laguerre(n + i - 1, 2.0, a)];
            for j in 2..=alpha + 1 {
                row.push(crate::specfun::laguerre_i((n + i + 1) as i64 - j as i64, j as f64, b));
            }
            row
        })
        .collect();
    let sign = if (n + alpha * (n + alpha)) % 2 == 0 { 1.0 } else { -1.0 };
    let pre = SignedLog::new(sign, nc.log_k_tilde) * inv_power(b - a, alpha);
    det_times(pre, rows)
}

/// `U_n(r1,r2,α) = ∫ Π (r1-y_i)(r2-y_i) y_i^α e^{-y_i} Δ_n(y)^2 dy`.
pub fn u_closed(n: usize, alpha: usize, r1: f64, r2: f64) -> Result<SignedLog> {
    if n == 0 {
        return Err(Error::InvalidParams("u_closed needs n >= 1".into()));
    }
    require_distinct(r1, r2, "u_closed")?;
    let rho = alpha as f64;
    let ln_pre = ln_factorial(n)
        + ln_factorial(n + 1)
        + (0..n).map(|j| ln_factorial(j + 1) + ln_factorial(j + alpha)).sum::<f64>();
    let det = laguerre(n, rho, r1) * laguerre(n + 1, rho, r2) - laguerre(n, rho, r2) * laguerre(n + 1, rho, r1);
    Ok(SignedLog::new(-1.0, ln_pre) * SignedLog::from_f64(det / (r2 - r1)))
}
