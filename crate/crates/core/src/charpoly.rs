//! Average reciprocal characteristic polynomial `E[1/det(zI + W)]`.

use crate::error::{Error, Result};
use crate::params::{EvalConfig, ModelParams};
use crate::specfun::{ln_tricomi_psi, KahanSum};

/// Above this noncentrality the alternating sum cancels more than about ten
/// digits; the value is still returned, flagged.
pub const CANCELLATION_MU: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharpolyAvg {
    pub value: f64,
    pub terms: usize,
    /// `log10` of the largest term over the result.
    pub digits_lost: f64,
    pub cancellation_warning: bool,
}

/// `z^α Σ_k (-μ)^k Ψ(k+n+α; α+1; z)` for `z > 0`.
pub fn recip_charpoly_avg(params: &ModelParams, z: f64, cfg: &EvalConfig) -> Result<CharpolyAvg> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("z = {z} must be finite and > 0")));
    }
    cfg.validate()?;
    let (n, alpha, mu) = (params.n() as f64, params.alpha() as f64, params.mu());
    let c = alpha + 1.0;
    let ln_za = alpha * z.ln();
    let min_terms = (3.0 * mu).ceil() as usize;
    let mut acc = KahanSum::new();
    let mut largest = 0.0f64;
    let mut converged = false;
    let mut terms = 0;
    for k in 0..cfg.max_terms {
        let ln_pow = if k == 0 { 0.0 } else { k as f64 * mu.ln() };
        let mag = (ln_za + ln_pow + ln_tricomi_psi(k as f64 + n + alpha, c, z)?).exp();
        let term = if k % 2 == 0 { mag } else { -mag };
        acc.add(term);
        largest = largest.max(mag);
        terms = k + 1;
        if mu == 0.0 || (k + 1 >= min_terms && mag <= cfg.rel_tol * acc.sum().abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "reciprocal char-poly series", terms: cfg.max_terms });
    }
    let value = acc.sum();
    let digits_lost = if value != 0.0 { (largest / value.abs()).log10().max(0.0) } else { f64::INFINITY };
    Ok(CharpolyAvg { value, terms, digits_lost, cancellation_warning: mu > CANCELLATION_MU || digits_lost > 10.0 })
}
