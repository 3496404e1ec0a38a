//! Tricomi's confluent hypergeometric function of the second kind on the
//! positive real axis.
//!
//! Uses `Ψ(a;c;z) = Γ(a)^{-1} ∫_0^∞ e^{-zt} t^{a-1} (1+t)^{c-a-1} dt` with
//! `t = e^y`. The transformed integrand is analytic in a strip around the
//! real line and decays at both ends, so the trapezoidal rule converges
//! geometrically in the step size.

use crate::error::{Error, Result};
use crate::params::ln_gamma;

/// Drop-off (in natural-log units) below the peak at which the integration
/// window is closed.
const WINDOW_DEPTH: f64 = 75.0;

fn log_integrand(a: f64, c: f64, z: f64, y: f64) -> f64 {
    // ln(1 + e^y), evaluated without overflow
    let softplus = if y > 0.0 { y + (-y).exp().ln_1p() } else { y.exp().ln_1p() };
    -z * y.exp() + a * y + (c - a - 1.0) * softplus
}

fn log_integrand_slope(a: f64, c: f64, z: f64, y: f64) -> f64 {
    let sigma = 1.0 / (1.0 + (-y).exp());
    -z * y.exp() + a + (c - a - 1.0) * sigma
}

/// `ln Ψ(a;c;z)` for `a > 0`, `z > 0`.
pub fn ln_tricomi_psi(a: f64, c: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("tricomi_psi needs z > 0, got {z}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("tricomi_psi needs a > 0, got {a}")));
    }

    // Locate the peak by bisection on the slope, which is positive far to
    // the left (→ a) and negative far to the right.
    let mut lo = -50.0f64;
    while log_integrand_slope(a, c, z, lo) <= 0.0 {
        lo -= 50.0;
    }
    let mut hi = (a.max(c.abs()) + 1.0).ln() - z.ln() + 5.0;
    while log_integrand_slope(a, c, z, hi) >= 0.0 {
        hi += 5.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_integrand_slope(a, c, z, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + mid.abs()) {
            break;
        }
    }
    let peak = 0.5 * (lo + hi);
    let g_peak = log_integrand(a, c, z, peak);

    // Step from the curvature at the peak: a Gaussian of width w needs h ≲ w/2.
    let d = 1e-4;
    let curv = -(log_integrand(a, c, z, peak + d) - 2.0 * g_peak + log_integrand(a, c, z, peak - d)) / (d * d);
    let width = if curv > 0.0 { 1.0 / curv.sqrt() } else { 1.0 };
    let h = (0.5 * width).min(0.1);

    let mut vals = Vec::new();
    let mut gmax = g_peak;
    for dir in [-1.0f64, 1.0] {
        let mut k = if dir < 0.0 { 0 } else { 1 };
        loop {
            let y = peak + dir * h * k as f64;
            let g = log_integrand(a, c, z, y);
            gmax = gmax.max(g);
            vals.push(g);
            if g < gmax - WINDOW_DEPTH {
                break;
            }
            k += 1;
            if k > 2_000_000 {
                return Err(Error::NonConvergence { what: "tricomi_psi window", terms: k });
            }
        }
    }
    let mut acc = super::KahanSum::new();
    for g in &vals {
        acc.add((g - gmax).exp());
    }
    Ok(gmax + (h * acc.sum()).ln() - ln_gamma(a))
}

/// `Ψ(a;c;z)` for `a > 0`, `z > 0`.
pub fn tricomi_psi(a: f64, c: f64, z: f64) -> Result<f64> {
    ln_tricomi_psi(a, c, z).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_laguerre;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// `e E₁(1)` from the convergent series `E₁(x) = -γ - ln x - Σ (-x)^k/(k k!)`.
    fn e_times_e1_at_one() -> f64 {
        let gamma = 0.577_215_664_901_532_9_f64;
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 1..40 {
            fact *= k as f64;
            s += (-1.0f64).powi(k as i32) / (k as f64 * fact);
        }
        std::f64::consts::E * (-gamma - s)
    }

    /// Gauss–Laguerre of the `u = z t` form, usable when z is not small.
    fn psi_by_gauss_laguerre(a: f64, c: f64, z: f64) -> f64 {
        let rule = gauss_laguerre(120).unwrap();
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&u, &w)| w * ((a - 1.0) * u.ln() + (c - a - 1.0) * (u / z).ln_1p()).exp())
            .sum();
        s * (-a * z.ln() - ln_gamma(a)).exp()
    }

    #[test]
    fn e1_example() {
        let v = tricomi_psi(1.0, 1.0, 1.0).unwrap();
        assert!(rel(v, e_times_e1_at_one()) < 1e-12);
        assert!(rel(v, 0.596_347_362_323_194_1) < 1e-12);
    }

    #[test]
    fn power_identity() {
        for &a in &[0.5, 1.0, 3.0, 12.0, 40.0] {
            for &z in &[0.01, 0.3, 1.0, 25.0, 1000.0] {
                let v = ln_tricomi_psi(a, a + 1.0, z).unwrap();
                assert!((v + a * z.ln()).abs() < 1e-10 * (1.0 + (a * z.ln()).abs()), "a={a} z={z}");
            }
        }
    }

    #[test]
    fn large_argument_example() {
        let v = tricomi_psi(2.0, 1.0, 50.0).unwrap();
        assert!(rel(v, 3.706_064_358_583_886_3e-4) < 1e-11);
        assert!(rel(v, psi_by_gauss_laguerre(2.0, 1.0, 50.0)) < 1e-10);
    }

    #[test]
    fn agrees_with_gauss_laguerre_for_moderate_z() {
        for &(a, c) in &[(1.0, 1.0), (3.0, 2.0), (7.0, 3.0), (20.0, 4.0), (40.0, 5.0)] {
            for &z in &[1.0, 3.0, 10.0, 100.0] {
                let x = tricomi_psi(a, c, z).unwrap();
                let y = psi_by_gauss_laguerre(a, c, z);
                assert!(rel(x, y) < 1e-10, "a={a} c={c} z={z}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(tricomi_psi(1.0, 1.0, 0.0).is_err());
        assert!(tricomi_psi(1.0, 1.0, -1.0).is_err());
        assert!(tricomi_psi(0.0, 1.0, 1.0).is_err());
    }
}
