//! Distribution of the Demmel condition number `V = tr(W) / λ_1`.
//!
//! The transform of the density is `e^{-ns}` times a Laurent series in
//! `1/s`, so the primary path inverts it term by term:
//! `L^{-1}{s^{-q} e^{-ns}}(v) = (v-n)^{q-1} / Γ(q)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{lu_det, RealMatrix};
use crate::numerics::{composite_legendre, gauss_laguerre, poly_det, talbot_invert_delayed, PolyRat};
use crate::params::{ln_factorial, EvalConfig, ModelParams};
use crate::signed::SignedLog;
use crate::specfun::{
    hyp0f1_cfg, hyp1f1_cfg, hyp_pfq_cfg, laguerre_coeffs_neg_arg, laguerre_i, stop_threshold, KahanSum,
};

/// Panels of the composite Gauss–Legendre rule used for c.d.f. and moment
/// integrals, and the order of each panel.
pub const CDF_PANELS: usize = 24;
pub const CDF_PANEL_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemmelQuery {
    pub params: ModelParams,
    pub v: f64,
    pub config: EvalConfig,
}

impl DemmelQuery {
    pub fn new(params: ModelParams, v: f64) -> Result<Self> {
        Self::with_config(params, v, EvalConfig::default())
    }

    pub fn with_config(params: ModelParams, v: f64, config: EvalConfig) -> Result<Self> {
        require_n2(&params)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("v = {v} must be finite")));
        }
        config.validate()?;
        Ok(DemmelQuery { params, v, config })
    }
}

fn require_n2(params: &ModelParams) -> Result<()> {
    if params.n() < 2 {
        return Err(Error::InvalidParams("V is degenerate (identically 1) for n = 1".into()));
    }
    Ok(())
}

/// One `sign * e^{ln_coeff} * s^{-power} * e^{-delay s}` term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionTerm {
    pub sign: f64,
    pub ln_coeff: f64,
    pub power: u32,
}

/// A finite Laurent sum in `1/s` with a common delay factor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InversionTermSet {
    pub delay: f64,
    pub terms: Vec<InversionTerm>,
}

impl InversionTermSet {
    /// Exact inverse transform at `t`; zero for `t <= delay`.
    pub fn invert(&self, t: f64) -> f64 {
        if t <= self.delay {
            return 0.0;
        }
        let lt = (t - self.delay).ln();
        let mut acc = KahanSum::new();
        for term in &self.terms {
            let q = term.power as f64;
            acc.add(term.sign * (term.ln_coeff + (q - 1.0) * lt - ln_factorial(term.power as usize - 1)).exp());
        }
        acc.sum()
    }

    /// The transform itself at complex `s`.
    pub fn transform(&self, s: Complex64) -> Complex64 {
        let ls = s.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            acc += term.sign * (term.ln_coeff - term.power as f64 * ls).exp();
        }
        acc * (-self.delay * s).exp()
    }

    pub fn min_power(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.power).min()
    }
}

type MinorCache = RwLock<HashMap<(usize, usize), Arc<Vec<PolyRat>>>>;

fn minor_cache() -> &'static MinorCache {
    static CACHE: OnceLock<MinorCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `D_i(s)` for `i = 1..=α+1`: the determinant of the Laguerre block
/// `[L^{(j)}_{n+i-1-j}(-s)]`, `j = 2..=α+1`, with row `i` removed.
pub fn laguerre_minors(n: usize, alpha: usize) -> Result<Arc<Vec<PolyRat>>> {
    if let Some(m) = minor_cache().read().expect("minor cache poisoned").get(&(n, alpha)) {
        return Ok(Arc::clone(m));
    }
    let block: Vec<Vec<PolyRat>> = (1..=alpha + 1)
        .map(|i| {
            (2..=alpha + 1)
                .map(|j| laguerre_coeffs_neg_arg((n + i) as i64 - 1 - j as i64, j as f64))
                .collect()
        })
        .collect();
    let mut minors = Vec::with_capacity(alpha + 1);
    for skip in 0..=alpha {
        let sub: Vec<Vec<PolyRat>> =
            block.iter().enumerate().filter(|(r, _)| *r != skip).map(|(_, row)| row.clone()).collect();
        minors.push(poly_det(&sub)?);
    }
    let minors = Arc::new(minors);
    let mut w = minor_cache().write().expect("minor cache poisoned");
    Ok(Arc::clone(w.entry((n, alpha)).or_insert(minors)))
}

/// Smallest `s^{-q}` power the term set can contain,
/// `(n-1)(n+α+1) + (i-1) - deg D_i` minimized over `i`.
pub fn min_inversion_power(n: usize, alpha: usize) -> Result<i64> {
    let minors = laguerre_minors(n, alpha)?;
    let base = ((n - 1) * (n + alpha + 1)) as i64;
    Ok(minors
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.degree().map(|deg| base + i as i64 - deg as i64))
        .min()
        .unwrap_or(base))
}

/// `ln a_i(k)` for `k = 0, 1, ...` via its term ratio.
struct CoefA {
    n: f64,
    alpha: f64,
    i: f64,
    ln: f64,
    k: usize,
}

impl CoefA {
    fn new(n: usize, alpha: usize, i: usize) -> Self {
        let big = n * n + n * alpha;
        let ln = ((n + i - 1) as f64).ln() + ln_factorial(big + i - 2) - ln_factorial(n + i + alpha - 2);
        CoefA { n: n as f64, alpha: alpha as f64, i: i as f64, ln, k: 0 }
    }

    /// Moves from `k` to `k+1`.
    fn advance(&mut self) {
        let (n, a, i, k) = (self.n, self.alpha, self.i, self.k as f64);
        let big = n * n + n * a;
        self.ln += (n + i + k).ln() + (n + i - 2.0 + k).ln() + (big + i - 1.0 + k).ln()
            - (n + i - 1.0 + k).ln()
            - (n + i + a - 1.0 + k).ln();
        self.k += 1;
    }
}

/// Term set whose inverse at `t = v` is the density at `v`.
pub fn demmel_terms(q: &DemmelQuery) -> Result<InversionTermSet> {
    let p = &q.params;
    let (n, alpha, mu, v) = (p.n(), p.alpha(), p.mu(), q.v);
    let cfg = &q.config;
    let nf = n as f64;
    let mut set = InversionTermSet { delay: nf, terms: Vec::new() };
    if v <= nf {
        return Ok(set);
    }
    let minors = laguerre_minors(n, alpha)?;
    let base = ((n - 1) * (n + alpha + 1)) as i64;
    let ln_pre = ln_factorial(n - 1) - mu - (n * (n + alpha)) as f64 * v.ln();
    let lt = (v - nf).ln();
    let stop = stop_threshold(cfg.rel_tol);
    let mut total = KahanSum::new();
    for i in 1..=alpha + 1 {
        let minor = &minors[i - 1];
        if minor.is_zero() || (mu == 0.0 && i > 1) {
            continue;
        }
        let mut a = CoefA::new(n, alpha, i);
        let mut prev = f64::INFINITY;
        let mut done = false;
        for k in 0..cfg.laplace_terms {
            if k > 0 {
                a.advance();
            }
            if mu == 0.0 && k > 0 {
                done = true;
                break;
            }
            let big = (n * n + n * alpha + k + i - 1) as f64;
            let f = hyp1f1_cfg(big, (n + i + k + alpha - 1) as f64, mu / v, cfg).check("1F1 in phi_i")?;
            let ln_mu = if k + i == 1 { 0.0 } else { (k + i - 1) as f64 * (mu / v).ln() };
            let ln_c = ln_pre + a.ln - ln_factorial(k) + ln_mu + f.ln();
            let mut contrib = KahanSum::new();
            for (d, &cd) in minor.coeffs().iter().enumerate() {
                if cd == 0.0 {
                    continue;
                }
                let power = base + (i - 1) as i64 + k as i64 - d as i64;
                if power < 1 {
                    return Err(Error::Internal(format!("inversion power {power} < 1 (i={i}, k={k}, d={d})")));
                }
                let term = InversionTerm { sign: cd.signum(), ln_coeff: ln_c + cd.abs().ln(), power: power as u32 };
                contrib.add(term.sign * (term.ln_coeff + (power - 1) as f64 * lt - ln_factorial(power as usize - 1)).exp());
                set.terms.push(term);
            }
            let c = contrib.sum().abs();
            total.add(contrib.sum());
            if k > 0 && c <= prev && (c <= stop * total.sum().abs() || c <= cfg.abs_tol) {
                done = true;
                break;
            }
            prev = c;
        }
        if !done && mu != 0.0 {
            return Err(Error::NonConvergence { what: "termwise Laplace inversion", terms: cfg.laplace_terms });
        }
    }
    Ok(set)
}

/// Density of `V` by termwise inversion.
pub fn demmel_pdf(q: &DemmelQuery) -> Result<f64> {
    if q.v <= q.params.n() as f64 {
        return Ok(0.0);
    }
    Ok(demmel_terms(q)?.invert(q.v))
}

/// Closed series for `α = 0`, through `₃F₃`.
pub fn demmel_pdf_alpha0(params: &ModelParams, v: f64) -> Result<f64> {
    demmel_pdf_alpha0_cfg(params, v, &EvalConfig::default())
}

pub fn demmel_pdf_alpha0_cfg(params: &ModelParams, v: f64, cfg: &EvalConfig) -> Result<f64> {
    require_n2(params)?;
    if params.alpha() != 0 {
        return Err(Error::InvalidParams("demmel_pdf_alpha0 needs m = n".into()));
    }
    let (n, mu) = (params.n() as f64, params.mu());
    if v <= n {
        return Ok(0.0);
    }
    let n2 = n * n;
    let z = mu * (1.0 - n / v);
    let stop = stop_threshold(cfg.rel_tol);
    let mut acc = KahanSum::new();
    // c_k = (n²)_k / ((n)_k k!) (μ/v)^k
    let mut c = 1.0;
    let mut converged = false;
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        if k > 0 {
            c *= (n2 + kf - 1.0) / ((n + kf - 1.0) * kf) * (mu / v);
        }
        let f = hyp_pfq_cfg(&[n + 1.0, n - 1.0, n2 + kf], &[n, n + kf, n2 - 1.0], z, cfg).check("3F3")?;
        let term = c * f;
        acc.add(term);
        if term == 0.0 || (kf > mu && term.abs() <= stop * acc.sum().abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { what: "alpha = 0 density series", terms: cfg.max_terms });
    }
    let ln_pre = (n * (n2 - 1.0)).ln() - mu + (n2 - 2.0) * (v - n).ln() - n2 * v.ln();
    Ok(ln_pre.exp() * acc.sum())
}

/// Central case `μ = 0`: a finite term set.
pub fn demmel_pdf_central(params: &ModelParams, v: f64) -> Result<f64> {
    require_n2(params)?;
    if params.mu() != 0.0 {
        return Err(Error::InvalidParams("demmel_pdf_central needs mu = 0".into()));
    }
    let (n, alpha) = (params.n(), params.alpha());
    let nf = n as f64;
    if v <= nf {
        return Ok(0.0);
    }
    let block: Vec<Vec<PolyRat>> = (1..=alpha)
        .map(|i| (1..=alpha).map(|j| laguerre_coeffs_neg_arg((n + i) as i64 - j as i64 - 1, (j + 1) as f64)).collect())
        .collect();
    let det = poly_det(&block)?;
    let base = ((n - 1) * (n + alpha + 1)) as i64;
    let ln_pre = ln_factorial(n) + ln_factorial(n * n + n * alpha - 1)
        - ln_factorial(n + alpha - 1)
        - (n * (n + alpha)) as f64 * v.ln();
    let lt = (v - nf).ln();
    let mut acc = KahanSum::new();
    for (d, &cd) in det.coeffs().iter().enumerate() {
        if cd == 0.0 {
            continue;
        }
        let q = base - d as i64;
        if q < 1 {
            return Err(Error::Internal(format!("inversion power {q} < 1 in the central density")));
        }
        acc.add(cd.signum() * (ln_pre + cd.abs().ln() + (q - 1) as f64 * lt - ln_factorial(q as usize - 1)).exp());
    }
    Ok(acc.sum())
}

fn laguerre_complex(degree: i64, rho: f64, x: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if degree < 0 {
        return Complex64::new(0.0, 0.0);
    }
    if degree == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one * (1.0 + rho) - x;
    for k in 2..=degree {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + rho - x) * cur - (kf - 1.0 + rho) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n).max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm())).unwrap_or(k);
        if a[piv][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    det
}

/// The transform `s^{-(n-1)(n+α+1)} det[(-μ/(sv))^{i-1} φ_i ; L^{(j)}_{n+i-1-j}(-s)]`
/// at complex `s`, without the delay factor `e^{-ns}` and with the first
/// column scaled by `e^{-col_shift}`. Built directly from the series, not
/// from the term set.
fn demmel_transform_scaled(q: &DemmelQuery, s: Complex64, col_shift: f64) -> Result<Complex64> {
    let p = &q.params;
    let (n, alpha, mu, v) = (p.n(), p.alpha(), p.mu(), q.v);
    let cfg = &q.config;
    let stop = stop_threshold(cfg.rel_tol);
    let x = mu / v;
    let y = Complex64::new(x, 0.0) / s;
    let mut rows = Vec::with_capacity(alpha + 1);
    for i in 1..=alpha + 1 {
        let mut a = CoefA::new(n, alpha, i);
        let mut phi = Complex64::new(0.0, 0.0);
        let mut yk = Complex64::new(1.0, 0.0);
        let mut converged = false;
        for k in 0..cfg.laplace_terms {
            if k > 0 {
                a.advance();
                yk *= y;
            }
            let big = (n * n + n * alpha + k + i - 1) as f64;
            let f = hyp1f1_cfg(big, (n + i + k + alpha - 1) as f64, x, cfg).check("1F1 in phi_i")?;
            let term = yk * (a.ln - ln_factorial(k) - col_shift).exp() * f;
            phi += term;
            if mu == 0.0 || (k > 0 && term.norm() <= stop * phi.norm()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { what: "phi_i series on the Talbot contour", terms: cfg.laplace_terms });
        }
        let mut row = vec![(-y).powi((i - 1) as i32) * phi];
        for j in 2..=alpha + 1 {
            row.push(laguerre_complex((n + i) as i64 - 1 - j as i64, j as f64, -s));
        }
        rows.push(row);
    }
    let base = ((n - 1) * (n + alpha + 1)) as i32;
    Ok(complex_det(rows) * s.powi(-base))
}

/// Density of `V` by fixed-Talbot inversion of the series transform; a
/// numerical cross-check of [`demmel_pdf`].
pub fn demmel_pdf_talbot(q: &DemmelQuery, order: usize) -> Result<f64> {
    let p = &q.params;
    let (n, alpha, mu, v) = (p.n(), p.alpha(), p.mu(), q.v);
    if v <= n as f64 {
        return Ok(0.0);
    }
    let col_shift = ln_factorial(n * n + n * alpha + alpha - 1);
    let failure = std::cell::RefCell::new(None);
    let g = |s: Complex64| match demmel_transform_scaled(q, s, col_shift) {
        Ok(z) => z,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(f64::NAN, 0.0)
        }
    };
    let inv = talbot_invert_delayed(g, n as f64, v, order);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let ln_pre = ln_factorial(n - 1) - mu - (n * (n + alpha)) as f64 * v.ln() + col_shift;
    Ok(ln_pre.exp() * inv)
}

/// `ϑ_i(w, z)` including its `(n+i-1)/(n+α+i-2)!` factor, returned as a log
/// magnitude (the series has positive terms).
fn ln_vartheta(n: usize, alpha: usize, i: usize, w: f64, z: f64, cfg: &EvalConfig) -> Result<f64> {
    let c = (alpha + n + i - 1) as f64;
    let (a1, a2, b2) = ((n + i) as f64, (n + i - 2) as f64, (n + i - 1) as f64);
    let stop = stop_threshold(cfg.rel_tol);
    let mut acc = KahanSum::new();
    let mut coef = 1.0;
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        if k > 0 {
            let km = kf - 1.0;
            coef *= (a1 + km) * (a2 + km) * w / (kf * (c + km) * (b2 + km) * z);
        }
        let f = hyp0f1_cfg(c + kf, w, cfg).check("0F1 in vartheta")?;
        let term = coef * f;
        acc.add(term);
        if term == 0.0 || (k > 0 && term <= stop * acc.sum()) {
            let pre = ((n + i - 1) as f64).ln() - ln_factorial(n + alpha + i - 2);
            return Ok(pre + acc.sum().ln());
        }
    }
    Err(Error::NonConvergence { what: "vartheta series", terms: cfg.max_terms })
}

/// `E[e^{-sV}]`, by Gauss–Laguerre quadrature of the one-dimensional
/// integral representation with `x = t/n`.
pub fn demmel_mgf(params: &ModelParams, s: f64, cfg: &EvalConfig) -> Result<f64> {
    require_n2(params)?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} must be finite and >= 0")));
    }
    cfg.validate()?;
    let (n, alpha, mu) = (params.n(), params.alpha(), params.mu());
    let nf = n as f64;
    let rule = gauss_laguerre(cfg.quad_order)?;
    let big_p = ((n - 1) * (n + alpha + 1)) as f64;
    let expo = (n * (n + alpha)) as f64 - 1.0;
    let mut acc = KahanSum::new();
    for (&t, &lw) in rule.nodes.iter().zip(&rule.ln_weights) {
        let x = t / nf;
        let z = x + s;
        let mut rows = Vec::with_capacity(alpha + 1);
        // First column in log form, then rescaled by its largest entry.
        let mut first = Vec::with_capacity(alpha + 1);
        for i in 1..=alpha + 1 {
            let lv = ln_vartheta(n, alpha, i, x * mu, z, cfg)?;
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            let ln_pow = if i == 1 { 0.0 } else { (i - 1) as f64 * (mu * x / z).ln() };
            first.push((sign, ln_pow + lv, mu == 0.0 && i > 1));
        }
        let shift = first.iter().filter(|f| !f.2).map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
        for (idx, i) in (1..=alpha + 1).enumerate() {
            let (sign, l, zero) = first[idx];
            let mut row = vec![if zero { 0.0 } else { sign * (l - shift).exp() }];
            for j in 2..=alpha + 1 {
                row.push(laguerre_i((n + i) as i64 - 1 - j as i64, j as f64, -z));
            }
            rows.push(row);
        }
        let det = lu_det(&RealMatrix::from_rows(&rows)?)?;
        if det.is_zero() {
            continue;
        }
        let ln_rest = expo * x.ln() - big_p * z.ln() + shift + det.log_abs;
        acc.add(det.sign * (lw + ln_rest).exp());
    }
    let ln_pre = ln_factorial(n - 1) - mu - s * nf - nf.ln();
    Ok(ln_pre.exp() * acc.sum())
}

/// `∫ g(v) f_V(v) dv` over `v in (n, v_max]` through `v = n/(1-u)`, which
/// turns the algebraic tail into a bounded integrand on `u in [0, 1)`.
fn integrate_against_pdf<G: Fn(f64) -> f64>(
    params: &ModelParams,
    v_max: f64,
    g: G,
    cfg: &EvalConfig,
) -> Result<f64> {
    let n = params.n() as f64;
    let u_max = if v_max.is_infinite() { 1.0 } else { 1.0 - n / v_max };
    if u_max <= 0.0 {
        return Ok(0.0);
    }
    let failure = std::cell::RefCell::new(None);
    let val = composite_legendre(
        |u| {
            let v = n / (1.0 - u);
            let jac = n / ((1.0 - u) * (1.0 - u));
            let q = DemmelQuery { params: *params, v, config: *cfg };
            match demmel_pdf(&q) {
                Ok(f) => g(v) * f * jac,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        u_max,
        CDF_PANELS,
        CDF_PANEL_ORDER,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(val)
}

/// `Pr(V <= v)`.
pub fn demmel_cdf(q: &DemmelQuery) -> Result<f64> {
    if q.v <= q.params.n() as f64 {
        return Ok(0.0);
    }
    integrate_against_pdf(&q.params, q.v, |_| 1.0, &q.config)
}

/// `∫ f_V` over the whole support; equals 1 up to truncation.
pub fn demmel_total_mass(params: &ModelParams, cfg: &EvalConfig) -> Result<f64> {
    require_n2(params)?;
    integrate_against_pdf(params, f64::INFINITY, |_| 1.0, cfg)
}

/// `∫ e^{-sv} f_V(v) dv` from the density, to compare with [`demmel_mgf`].
pub fn demmel_laplace_moment(params: &ModelParams, s: f64, cfg: &EvalConfig) -> Result<f64> {
    require_n2(params)?;
    integrate_against_pdf(params, f64::INFINITY, |v| (-s * v).exp(), cfg)
}

/// `Pr(V <= v)` over the whole support, tabulated once.
///
/// The table is uniform in `u = 1 - n/v in [0, 1]`, each cell integrated by
/// Gauss–Legendre and accumulated, then interpolated linearly in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemmelCdfTable {
    n: f64,
    values: Vec<f64>,
}

impl DemmelCdfTable {
    pub fn build(params: &ModelParams, cells: usize, cfg: &EvalConfig) -> Result<Self> {
        require_n2(params)?;
        if cells == 0 {
            return Err(Error::InvalidParams("cdf table needs at least one cell".into()));
        }
        let n = params.n() as f64;
        let h = 1.0 / cells as f64;
        let masses = (0..cells)
            .into_par_iter()
            .map(|c| {
                let lo = c as f64 * h;
                let failure = std::cell::RefCell::new(None);
                let m = composite_legendre(
                    |u| {
                        let v = n / (1.0 - u);
                        let q = DemmelQuery { params: *params, v, config: *cfg };
                        match demmel_pdf(&q) {
                            Ok(f) => f * n / ((1.0 - u) * (1.0 - u)),
                            Err(e) => {
                                failure.borrow_mut().get_or_insert(e);
                                f64::NAN
                            }
                        }
                    },
                    lo,
                    lo + h,
                    1,
                    CDF_PANEL_ORDER,
                )?;
                match failure.into_inner() {
                    Some(e) => Err(e),
                    None => Ok(m),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = KahanSum::new();
        values.push(0.0);
        for m in masses {
            acc.add(m);
            values.push(acc.sum());
        }
        Ok(DemmelCdfTable { n, values })
    }

    pub fn eval(&self, v: f64) -> f64 {
        if v <= self.n {
            return 0.0;
        }
        let cells = self.values.len() - 1;
        let pos = (1.0 - self.n / v) * cells as f64;
        let i = (pos.floor() as usize).min(cells - 1);
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn total_mass(&self) -> f64 {
        *self.values.last().expect("table is nonempty")
    }
}

/// `(sign, ln|·|)` of a density value, for callers that need the log.
pub fn demmel_pdf_signed(q: &DemmelQuery) -> Result<SignedLog> {
    Ok(SignedLog::from_f64(demmel_pdf(q)?))
}
