use super::{sum_ratio_series, KahanSum, SeriesResult};
use crate::params::EvalConfig;

fn is_nonpositive_int(c: f64) -> bool {
    c <= 0.0 && c.fract() == 0.0
}

fn pole(_c: f64) -> SeriesResult {
    SeriesResult { value: f64::NAN, terms_used: 0, converged: false, est_rel_err: f64::INFINITY }
}

/// `₀F₁(;c;z)` with default tolerances.
pub fn hyp0f1(c: f64, z: f64) -> SeriesResult {
    hyp0f1_cfg(c, z, &EvalConfig::default())
}

pub fn hyp0f1_cfg(c: f64, z: f64, cfg: &EvalConfig) -> SeriesResult {
    if is_nonpositive_int(c) {
        return pole(c);
    }
    if z == 0.0 {
        return SeriesResult::exact(1.0);
    }
    sum_ratio_series(
        1.0,
        |k| z / ((c + k as f64) * (k as f64 + 1.0)),
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_terms,
    )
}

/// Kummer's `₁F₁(a;c;z)`. Negative arguments go through
/// `₁F₁(a;c;z) = e^z ₁F₁(c-a;c;-z)` so that the summed series has
/// positive terms whenever `c - a >= 0`.
pub fn hyp1f1(a: f64, c: f64, z: f64) -> SeriesResult {
    hyp1f1_cfg(a, c, z, &EvalConfig::default())
}

pub fn hyp1f1_cfg(a: f64, c: f64, z: f64, cfg: &EvalConfig) -> SeriesResult {
    if is_nonpositive_int(c) {
        return pole(c);
    }
    if z == 0.0 || a == 0.0 {
        return SeriesResult::exact(1.0);
    }
    if z < 0.0 {
        let mut r = hyp1f1_direct(c - a, c, -z, cfg);
        r.value *= z.exp();
        return r;
    }
    hyp1f1_direct(a, c, z, cfg)
}

fn hyp1f1_direct(a: f64, c: f64, z: f64, cfg: &EvalConfig) -> SeriesResult {
    if a == 0.0 {
        return SeriesResult::exact(1.0);
    }
    sum_ratio_series(
        1.0,
        |k| {
            let kf = k as f64;
            (a + kf) * z / ((c + kf) * (kf + 1.0))
        },
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_terms,
    )
}

/// Generalized hypergeometric `pFq` with `p == q`.
pub fn hyp_pfq(a: &[f64], c: &[f64], z: f64) -> SeriesResult {
    hyp_pfq_cfg(a, c, z, &EvalConfig::default())
}

pub fn hyp_pfq_cfg(a: &[f64], c: &[f64], z: f64, cfg: &EvalConfig) -> SeriesResult {
    assert_eq!(a.len(), c.len(), "hyp_pfq expects as many numerator as denominator parameters");
    if c.iter().any(|&ci| is_nonpositive_int(ci)) {
        return pole(0.0);
    }
    if z == 0.0 {
        return SeriesResult::exact(1.0);
    }
    sum_ratio_series(
        1.0,
        |k| {
            let kf = k as f64;
            let num: f64 = a.iter().map(|&ai| ai + kf).product();
            let den: f64 = c.iter().map(|&ci| ci + kf).product();
            num / den * z / (kf + 1.0)
        },
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_terms,
    )
}

/// Humbert's confluent series
/// `Φ₃(a,c;x,y) = Σ_{i,j} (a)_i / ((c)_{i+j} i! j!) x^i y^j`,
/// summed over shells of constant total degree `t = i + j`.
pub fn humbert_phi3(a: f64, c: f64, x: f64, y: f64) -> SeriesResult {
    humbert_phi3_cfg(a, c, x, y, &EvalConfig::default())
}

pub fn humbert_phi3_cfg(a: f64, c: f64, x: f64, y: f64, cfg: &EvalConfig) -> SeriesResult {
    if is_nonpositive_int(c) {
        return pole(c);
    }
    // u[i] = (a)_i x^i / i!,  w[j] = y^j / j!
    let mut u: Vec<f64> = vec![1.0];
    let mut w: Vec<f64> = vec![1.0];
    let mut inv_c = 1.0; // 1 / (c)_t
    let mut acc = KahanSum::new();
    acc.add(1.0);
    let mut prev_shell = 1.0f64;
    let stop = super::stop_threshold(cfg.rel_tol);
    for t in 1..=cfg.max_terms {
        let tf = t as f64;
        u.push(u[t - 1] * (a + tf - 1.0) * x / tf);
        w.push(w[t - 1] * y / tf);
        inv_c /= c + tf - 1.0;
        let mut shell = KahanSum::new();
        for i in 0..=t {
            shell.add(u[i] * w[t - i]);
        }
        let shell = shell.sum() * inv_c;
        acc.add(shell);
        let s = acc.sum().abs();
        let small = shell.abs() <= stop * s || shell.abs() <= cfg.abs_tol;
        let prev_small = prev_shell.abs() <= cfg.rel_tol.sqrt() * s;
        // Two consecutive small, shrinking shells: past the peak of the
        // shell magnitudes.
        if small && prev_small && shell.abs() <= prev_shell.abs() {
            return SeriesResult {
                value: acc.sum(),
                terms_used: t + 1,
                converged: true,
                est_rel_err: if s > 0.0 { shell.abs() / s } else { 0.0 },
            };
        }
        if shell == 0.0 && prev_shell == 0.0 {
            return SeriesResult { value: acc.sum(), terms_used: t + 1, converged: true, est_rel_err: 0.0 };
        }
        prev_shell = shell;
    }
    let s = acc.sum();
    SeriesResult {
        value: s,
        terms_used: cfg.max_terms + 1,
        converged: false,
        est_rel_err: (prev_shell / s).abs(),
    }
}
