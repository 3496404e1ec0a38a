//! Scalar special functions: Pochhammer symbols, generalized Laguerre
//! polynomials, the confluent hypergeometric family and Tricomi's Ψ.
//!
//! Every series is accumulated with compensated summation and reports how
//! many terms it used and whether the truncation criterion was met.

mod hyper;
mod tricomi;

pub use hyper::{humbert_phi3, humbert_phi3_cfg, hyp0f1, hyp0f1_cfg, hyp1f1, hyp1f1_cfg, hyp_pfq, hyp_pfq_cfg};
pub use tricomi::{ln_tricomi_psi, tricomi_psi};


use crate::numerics::PolyRat;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Outcome of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
    pub est_rel_err: f64,
}

impl SeriesResult {
    pub fn exact(value: f64) -> Self {
        SeriesResult { value, terms_used: 1, converged: true, est_rel_err: 0.0 }
    }

    /// Converts a non-converged result into an error.
    pub fn check(self, what: &'static str) -> crate::Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(crate::Error::NonConvergence { what, terms: self.terms_used })
        }
    }
}

/// Rising factorial `a (a+1) ... (a+k-1)`; exactly zero when `a` is a
/// non-positive integer `-M` and `k > M`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    if a <= 0.0 && a.fract() == 0.0 {
        let big_m = (-a) as usize;
        if k > big_m {
            return 0.0;
        }
    }
    let mut p = 1.0;
    for i in 0..k {
        p *= a + i as f64;
    }
    p
}

/// `L_M^{(rho)}(x)` by the three-term recurrence, carried in double-double
/// arithmetic so the result is close to correctly rounded even where the
/// recurrence cancels.
pub fn laguerre(degree: usize, rho: f64, x: f64) -> f64 {
    if degree == 0 {
        return 1.0;
    }
    let mut prev = Dd::from(1.0);
    let mut cur = Dd::from(1.0 + rho).add(Dd::from(-x));
    if rho.abs() > 0.0 {
        // 1 + rho may round
        cur = Dd::two_sum(1.0, rho).add(Dd::from(-x));
    }
    for k in 2..=degree {
        let kf = k as f64;
        let a = Dd::two_sum(2.0 * kf - 1.0, rho).add(Dd::from(-x));
        let b = Dd::two_sum(kf - 1.0, rho);
        let next = a.mul(cur).add(b.mul(prev).neg()).div_f64(kf);
        prev = cur;
        cur = next;
    }
    cur.hi + cur.lo
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn fast_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let u = Dd::fast_two_sum(s.hi, s.lo + t.hi);
        Dd::fast_two_sum(u.hi, u.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::fast_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = ((self.hi - p) - e + self.lo) / d;
        Dd::fast_two_sum(q1, r)
    }
}

/// Laguerre polynomial with the convention `L_M ≡ 0` for negative degree,
/// which the determinant layouts rely on when `alpha > n`.
pub fn laguerre_i(degree: i64, rho: f64, x: f64) -> f64 {
    if degree < 0 {
        0.0
    } else {
        laguerre(degree as usize, rho, x)
    }
}

/// Monomial coefficients of `L_M^{(rho)}`.
pub fn laguerre_coeffs(degree: usize, rho: f64) -> PolyRat {
    let mut c = Vec::with_capacity(degree + 1);
    // (rho+1)_M / M!
    let mut lead = 1.0;
    for i in 0..degree {
        lead *= (rho + 1.0 + i as f64) / (i as f64 + 1.0);
    }
    c.push(lead);
    for j in 0..degree {
        let next = c[j] * -((degree - j) as f64) / ((rho + 1.0 + j as f64) * (j as f64 + 1.0));
        c.push(next);
    }
    PolyRat::new(c)
}

/// Coefficients of `L_M^{(rho)}(-s)` as a polynomial in `s`. Zero
/// polynomial for negative degree.
pub(crate) fn laguerre_coeffs_neg_arg(degree: i64, rho: f64) -> PolyRat {
    if degree < 0 {
        return PolyRat::zero();
    }
    let p = laguerre_coeffs(degree as usize, rho);
    PolyRat::new(
        p.coeffs()
            .iter()
            .enumerate()
            .map(|(j, &c)| if j % 2 == 0 { c } else { -c })
            .collect(),
    )
}

/// `∫_0^∞ x^j e^{-x} L_M^{(k)}(x) dx = (j!/M!) (k-j)_M`.
pub fn laguerre_weighted_integral(j: usize, k: usize, degree: usize) -> f64 {
    let ratio = (crate::params::ln_factorial(j) - crate::params::ln_factorial(degree)).exp();
    ratio * pochhammer(k as f64 - j as f64, degree)
}

/// Relative size of the last term at which a series is cut. Tail bounds are
/// loose by a few ulps of accumulated rounding, so the cut runs well inside
/// the requested tolerance.
pub(crate) fn stop_threshold(rel_tol: f64) -> f64 {
    (rel_tol * 1e-4).max(0.25 * f64::EPSILON)
}

/// Shared driver for hypergeometric-type series given the first term and
/// the term ratio `t_{k+1}/t_k` as a function of `k`.
pub(crate) fn sum_ratio_series<R>(
    first: f64,
    ratio: R,
    rel_tol: f64,
    abs_tol: f64,
    max_terms: usize,
) -> SeriesResult
where
    R: Fn(usize) -> f64,
{
    let stop = stop_threshold(rel_tol);
    let mut acc = KahanSum::new();
    let mut term = first;
    acc.add(term);
    if term == 0.0 {
        return SeriesResult::exact(0.0);
    }
    for k in 0..max_terms {
        let r = ratio(k);
        term *= r;
        if term == 0.0 {
            return SeriesResult { value: acc.sum(), terms_used: k + 1, converged: true, est_rel_err: 0.0 };
        }
        acc.add(term);
        let s = acc.sum().abs();
        // Past the term peak the ratio is < 1 and the tail is bounded by a
        // geometric series.
        if r.abs() < 1.0 {
            let tail = term.abs() * r.abs() / (1.0 - r.abs());
            if tail <= stop * s || tail <= abs_tol {
                let est = if s > 0.0 { tail / s } else { 0.0 };
                return SeriesResult { value: acc.sum(), terms_used: k + 2, converged: true, est_rel_err: est };
            }
        }
    }
    let s = acc.sum();
    SeriesResult {
        value: s,
        terms_used: max_terms + 1,
        converged: false,
        est_rel_err: if s != 0.0 { (term / s).abs() } else { f64::INFINITY },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laguerre_series(degree: usize, rho: f64, x: f64) -> f64 {
        // Direct summation of the defining hypergeometric polynomial.
        let mut lead = 1.0;
        for i in 0..degree {
            lead *= (rho + 1.0 + i as f64) / (i as f64 + 1.0);
        }
        let mut sum = 0.0;
        let mut t = 1.0;
        for j in 0..=degree {
            sum += t;
            t *= -((degree - j) as f64) * x / ((rho + 1.0 + j as f64) * (j as f64 + 1.0));
        }
        lead * sum
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(3.0, 4), 360.0);
        assert_eq!(pochhammer(-3.0, 2), 6.0);
        assert_eq!(pochhammer(-3.0, 5), 0.0);
        assert_eq!(pochhammer(2.5, 0), 1.0);
        // (-M)_j = (-1)^j M!/(M-j)!
        assert_eq!(pochhammer(-5.0, 3), -60.0);
    }

    #[test]
    fn laguerre_examples() {
        assert!((laguerre(3, 2.0, 0.0) - 10.0).abs() < 1e-14);
        assert!((laguerre(2, 0.0, 1.0) + 0.5).abs() < 1e-15);
        assert_eq!(laguerre(0, 5.0, 7.3), 1.0);
        assert_eq!(laguerre_i(-2, 1.0, 3.0), 0.0);
    }

    #[test]
    fn laguerre_coeff_examples() {
        assert_eq!(laguerre_coeffs(1, 0.0).coeffs(), &[1.0, -1.0]);
        assert_eq!(laguerre_coeffs(2, 0.0).coeffs(), &[1.0, -2.0, 0.5]);
        assert_eq!(laguerre_coeffs(0, 3.7).coeffs(), &[1.0]);
        let neg = laguerre_coeffs_neg_arg(2, 0.0);
        assert_eq!(neg.coeffs(), &[1.0, 2.0, 0.5]);
    }

    #[test]
    fn recurrence_matches_series() {
        for degree in 0..=40 {
            for &rho in &[0.0, 1.0, 2.5, 5.0] {
                for &x in &[-7.5, -2.0, -0.3, 0.0, 0.4, 1.7] {
                    let r = laguerre(degree, rho, x);
                    let s = laguerre_series(degree, rho, x);
                    let scale = s.abs().max(1e-300);
                    // Positive x is where the alternating series cancels; compare
                    // on a mixed absolute/relative basis there.
                    let tol = if x <= 0.0 { 1e-12 * scale } else { 1e-12 * scale.max(1.0) * 1e3 };
                    assert!((r - s).abs() <= tol, "M={degree} rho={rho} x={x}: {r} vs {s}");
                }
            }
        }
    }

    #[test]
    fn coeffs_evaluate_to_recurrence() {
        for degree in 0..20 {
            for &rho in &[0.0, 2.0, 3.5] {
                let p = laguerre_coeffs(degree, rho);
                for &x in &[-3.0, -0.5, 0.25] {
                    let a = p.eval(x);
                    let b = laguerre(degree, rho, x);
                    assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn weighted_integral_examples() {
        assert_eq!(laguerre_weighted_integral(0, 0, 0), 1.0);
        for m in 1..6 {
            assert_eq!(laguerre_weighted_integral(0, 0, m), 0.0);
        }
        assert!((laguerre_weighted_integral(2, 3, 1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kahan_recovers_small_addends() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10 {
            k.add(1e-17);
        }
        k.add(-1.0);
        assert!((k.sum() - 1e-16).abs() < 1e-30);
    }
}
