//! Distribution of the smallest eigenvalue `λ_1` of `W`.

use crate::error::{Error, Result};
use crate::linalg::{lu_det, RealMatrix};
use crate::params::{ln_factorial, EvalConfig, ModelParams};
use crate::signed::SignedLog;
use crate::specfun::{humbert_phi3_cfg, hyp1f1_cfg, laguerre_i, stop_threshold, KahanSum};

/// Slack allowed outside `[0, 1]` before a c.d.f. value counts as a fault.
pub const RANGE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinEigQuery {
    pub params: ModelParams,
    pub x: f64,
    pub config: EvalConfig,
}

impl MinEigQuery {
    pub fn new(params: ModelParams, x: f64) -> Result<Self> {
        Self::with_config(params, x, EvalConfig::default())
    }

    /// `x = 0` is accepted and gives `F = 0`.
    pub fn with_config(params: ModelParams, x: f64, config: EvalConfig) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("threshold x = {x} must be finite and >= 0")));
        }
        config.validate()?;
        Ok(MinEigQuery { params, x, config })
    }
}

fn check_row(params: &ModelParams, i: usize) -> Result<()> {
    if i == 0 || i > params.alpha() + 1 {
        return Err(Error::InvalidParams(format!("row index {i} outside 1..={}", params.alpha() + 1)));
    }
    Ok(())
}

/// `(α+i+n-2)! ψ_i(μ, x)`, the entry series without its factorial.
fn psi_hat(params: &ModelParams, i: usize, x: f64, cfg: &EvalConfig) -> Result<f64> {
    let (n, alpha, mu) = (params.n() as f64, params.alpha() as f64, params.mu());
    let c = alpha + n + i as f64 - 1.0;
    let w = x * mu;
    let stop = stop_threshold(cfg.rel_tol);
    let mut acc = KahanSum::new();
    // coef_k = w^k / (k! (c)_k)
    let mut coef = 1.0;
    for k in 0..=cfg.max_terms {
        let kf = k as f64;
        if k > 0 {
            coef *= w / (kf * (c + kf - 1.0));
        }
        let f = hyp1f1_cfg(alpha + kf, c + kf, -mu, cfg).check("1F1 in psi_i")?;
        let term = coef * f;
        acc.add(term);
        let s = acc.sum().abs();
        if term == 0.0 || (kf > w && (term.abs() <= stop * s || term.abs() <= cfg.abs_tol)) {
            return Ok(acc.sum());
        }
    }
    Err(Error::NonConvergence { what: "psi_i series", terms: cfg.max_terms })
}

/// `ψ_i(μ,x) = 1/(α+i+n-2)! Σ_k (xμ)^k ₁F₁(α+k; α+n+i+k-1; -μ) / (k! (α+i+n-1)_k)`
/// for `i` in `1..=α+1`.
pub fn psi_i(params: &ModelParams, i: usize, x: f64) -> Result<f64> {
    psi_i_cfg(params, i, x, &EvalConfig::default())
}

pub fn psi_i_cfg(params: &ModelParams, i: usize, x: f64, cfg: &EvalConfig) -> Result<f64> {
    check_row(params, i)?;
    let lf = ln_factorial(params.alpha() + i + params.n() - 2);
    Ok(psi_hat(params, i, x, cfg)? * (-lf).exp())
}

/// The same entry through `e^{-μ} Φ₃(n+i-1, n+α+i-1; μ, xμ) / (α+i+n-2)!`.
pub fn psi_i_phi3(params: &ModelParams, i: usize, x: f64, cfg: &EvalConfig) -> Result<f64> {
    check_row(params, i)?;
    let (n, alpha, mu) = (params.n(), params.alpha(), params.mu());
    let phi = humbert_phi3_cfg((n + i - 1) as f64, (n + alpha + i - 1) as f64, mu, x * mu, cfg).check("Phi3")?;
    Ok(phi * (-mu - ln_factorial(alpha + i + n - 2)).exp())
}

/// `Pr(λ_1 > x)` from the `(α+1) x (α+1)` determinant, for any parameters.
///
/// The factor `(n+α-1)!` and the row factorials are folded into the first
/// column in log form so the matrix handed to the LU stays moderate.
pub fn mineig_survival_det(q: &MinEigQuery) -> Result<SignedLog> {
    let p = &q.params;
    let (n, alpha, mu, x) = (p.n(), p.alpha(), p.mu(), q.x);
    let ln_top = ln_factorial(n + alpha - 1);
    let mut rows = Vec::with_capacity(alpha + 1);
    for i in 1..=alpha + 1 {
        let ph = psi_hat(p, i, x, &q.config)?;
        let first = if ph == 0.0 || (mu == 0.0 && i > 1) {
            0.0
        } else {
            let sign = if i % 2 == 0 { -ph.signum() } else { ph.signum() };
            let ln_mu_pow = if i == 1 { 0.0 } else { (i - 1) as f64 * mu.ln() };
            let ln_mag = ln_mu_pow + ph.abs().ln() + ln_top - ln_factorial(alpha + i + n - 2);
            sign * ln_mag.exp()
        };
        let mut row = vec![first];
        for j in 2..=alpha + 1 {
            row.push(laguerre_i((n + i) as i64 - j as i64, (j - 2) as f64, -x));
        }
        rows.push(row);
    }
    let det = lu_det(&RealMatrix::from_rows(&rows)?)?;
    Ok(SignedLog::new(det.sign, det.log_abs - n as f64 * x))
}

fn clamp_cdf(f: f64) -> Result<f64> {
    if !f.is_finite() || f < -RANGE_SLACK || f > 1.0 + RANGE_SLACK {
        return Err(Error::Internal(format!("c.d.f. value {f} outside [0, 1]")));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// `Pr(λ_1 <= x)` through the determinant representation, with no special
/// case dispatch.
pub fn mineig_cdf_det(q: &MinEigQuery) -> Result<f64> {
    if q.x == 0.0 {
        return Ok(0.0);
    }
    clamp_cdf(1.0 - mineig_survival_det(q)?.value())
}

/// `Pr(λ_1 <= x)`. Uses the closed special cases when `μ = 0` or `α = 0`.
pub fn mineig_cdf(q: &MinEigQuery) -> Result<f64> {
    if q.x == 0.0 {
        return Ok(0.0);
    }
    if q.params.mu() == 0.0 {
        mineig_cdf_central(&q.params, q.x)
    } else if q.params.alpha() == 0 {
        mineig_cdf_alpha0_cfg(&q.params, q.x, &q.config)
    } else {
        mineig_cdf_det(q)
    }
}

/// `1 - e^{-μ-nx} Φ₃(n, n; μ, xμ)`, valid for `α = 0`.
pub fn mineig_cdf_alpha0(params: &ModelParams, x: f64) -> Result<f64> {
    mineig_cdf_alpha0_cfg(params, x, &EvalConfig::default())
}

pub fn mineig_cdf_alpha0_cfg(params: &ModelParams, x: f64, cfg: &EvalConfig) -> Result<f64> {
    if params.alpha() != 0 {
        return Err(Error::InvalidParams("mineig_cdf_alpha0 needs m = n".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("threshold x = {x} must be >= 0")));
    }
    let n = params.n() as f64;
    let mu = params.mu();
    let phi = humbert_phi3_cfg(n, n, mu, x * mu, cfg).check("Phi3")?;
    clamp_cdf(1.0 - (phi.ln() - mu - n * x).exp())
}

/// `1 - e^{-nx} det[L^{(j-1)}_{n+i-j}(-x)]_{α×α}`, valid for `μ = 0`.
pub fn mineig_cdf_central(params: &ModelParams, x: f64) -> Result<f64> {
    if params.mu() != 0.0 {
        return Err(Error::InvalidParams("mineig_cdf_central needs mu = 0".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("threshold x = {x} must be >= 0")));
    }
    let (n, alpha) = (params.n(), params.alpha());
    let rows: Vec<Vec<f64>> = (1..=alpha)
        .map(|i| (1..=alpha).map(|j| laguerre_i((n + i) as i64 - j as i64, (j - 1) as f64, -x)).collect())
        .collect();
    let det = if alpha == 0 { SignedLog::ONE } else { lu_det(&RealMatrix::from_rows(&rows)?)? };
    let survival = SignedLog::new(det.sign, det.log_abs - n as f64 * x).value();
    clamp_cdf(1.0 - survival)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn q(n: usize, m: usize, mu: f64, x: f64) -> MinEigQuery {
        MinEigQuery::new(ModelParams::new(n, m, mu).unwrap(), x).unwrap()
    }

    #[test]
    fn psi_examples() {
        let p = ModelParams::new(2, 4, 1.5).unwrap();
        let at0 = psi_i(&p, 2, 0.0).unwrap();
        let want = crate::specfun::hyp1f1(2.0, 5.0, -1.5).value / 24.0;
        assert!(rel(at0, want) < 1e-14);
        let p0 = ModelParams::new(2, 4, 0.0).unwrap();
        assert!(rel(psi_i(&p0, 3, 0.7).unwrap(), 1.0 / 120.0) < 1e-15);
        assert!(psi_i(&p, 4, 0.5).is_err());
        assert!(psi_i(&p, 0, 0.5).is_err());
    }

    #[test]
    fn psi_matches_phi3() {
        let cfg = EvalConfig::default();
        for &(n, alpha) in &[(2usize, 1usize), (3, 2), (2, 4)] {
            for &mu in &[0.5, 2.0, 10.0] {
                let p = ModelParams::new(n, n + alpha, mu).unwrap();
                for &x in &[0.1, 1.0, 4.0, 10.0] {
                    for i in 1..=alpha + 1 {
                        let a = psi_i_cfg(&p, i, x, &cfg).unwrap();
                        let b = psi_i_phi3(&p, i, x, &cfg).unwrap();
                        assert!(rel(a, b) < 1e-10, "n={n} a={alpha} mu={mu} x={x} i={i}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn cdf_examples() {
        let want = 1.0 - (-1.0f64).exp();
        assert!(rel(mineig_cdf(&q(2, 2, 0.0, 0.5)).unwrap(), want) < 1e-15);
        assert!(rel(mineig_cdf_det(&q(2, 2, 0.0, 0.5)).unwrap(), want) < 1e-14);
        assert_eq!(mineig_cdf(&q(3, 5, 1.0, 0.0)).unwrap(), 0.0);
        let v = mineig_cdf(&q(2, 4, 1.5, 0.3)).unwrap();
        assert!(rel(v, 0.008_607_868_481_281_106) < 1e-10);
        let v = mineig_cdf_alpha0(&ModelParams::new(3, 3, 2.0).unwrap(), 0.4).unwrap();
        assert!(rel(v, 0.642_649_952_663_734_97) < 1e-12);
        let v = mineig_cdf(&q(4, 6, 0.5, 1.0)).unwrap();
        assert!(rel(v, 0.527_871_329_079_942_15) < 1e-10);
        let v = mineig_cdf(&q(3, 6, 10.0, 0.7)).unwrap();
        assert!(rel(v, 0.029_475_771_034_896_427) < 1e-9);
    }

    #[test]
    fn central_examples() {
        let p = ModelParams::new(4, 4, 0.0).unwrap();
        assert!(rel(mineig_cdf_central(&p, 0.25).unwrap(), 1.0 - (-1.0f64).exp()) < 1e-15);
        let p = ModelParams::new(2, 3, 0.0).unwrap();
        let want = 1.0 - (-1.0f64).exp() * 2.125;
        assert!(rel(mineig_cdf_central(&p, 0.5).unwrap(), want) < 1e-14);
        let p = ModelParams::new(2, 4, 0.0).unwrap();
        assert!(rel(mineig_cdf_central(&p, 0.3).unwrap(), 0.012_866_230_448_577_005) < 1e-12);
        let p = ModelParams::new(3, 5, 0.0).unwrap();
        assert!(rel(mineig_cdf_central(&p, 0.3).unwrap(), 0.028_747_239_071_303_018) < 1e-12);
        assert!(mineig_cdf_central(&ModelParams::new(2, 3, 1.0).unwrap(), 0.5).is_err());
        assert!(mineig_cdf_alpha0(&ModelParams::new(2, 3, 1.0).unwrap(), 0.5).is_err());
    }

    #[test]
    fn determinant_matches_central_at_zero_mu() {
        for &(n, m) in &[(2usize, 4usize), (3, 5), (2, 7)] {
            for &x in &[0.1, 0.6, 2.0] {
                let a = mineig_cdf_det(&q(n, m, 0.0, x)).unwrap();
                let b = mineig_cdf_central(&ModelParams::new(n, m, 0.0).unwrap(), x).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n} m={m} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_negative_threshold() {
        assert!(MinEigQuery::new(ModelParams::new(2, 2, 0.0).unwrap(), -0.1).is_err());
    }
}
