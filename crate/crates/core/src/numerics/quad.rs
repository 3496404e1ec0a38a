use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::linalg::RealSymTridiag;

pub const MAX_QUAD_ORDER: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadKind {
    /// `∫_0^∞ e^{-x} f(x) dx`
    GaussLaguerre,
    /// `∫_{-1}^{1} f(x) dx`
    GaussLegendre,
}

/// Nodes (ascending) and weights of a Gaussian rule.
///
/// Gauss–Laguerre weights decay like `e^{-x}`; above order ~180 the last
/// ones fall below the smallest subnormal and are stored as zero, while
/// `ln_weights` keeps them exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub kind: QuadKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl QuadRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = crate::specfun::KahanSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            if w > 0.0 {
                acc.add(w * f(x));
            }
        }
        acc.sum()
    }
}

fn cache() -> &'static RwLock<HashMap<(QuadKind, usize), Arc<QuadRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<(QuadKind, usize), Arc<QuadRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached(kind: QuadKind, order: usize, build: fn(usize) -> Result<QuadRule>) -> Result<Arc<QuadRule>> {
    if order == 0 || order > MAX_QUAD_ORDER {
        return Err(Error::Domain(format!("quadrature order {order} outside 1..={MAX_QUAD_ORDER}")));
    }
    if let Some(r) = cache().read().expect("quadrature cache poisoned").get(&(kind, order)) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(build(order)?);
    let mut w = cache().write().expect("quadrature cache poisoned");
    Ok(Arc::clone(w.entry((kind, order)).or_insert(rule)))
}

pub fn gauss_laguerre(order: usize) -> Result<Arc<QuadRule>> {
    cached(QuadKind::GaussLaguerre, order, build_laguerre)
}

pub fn gauss_legendre(order: usize) -> Result<Arc<QuadRule>> {
    cached(QuadKind::GaussLegendre, order, build_legendre)
}

/// `(ln|L_{n-1}(x)|, L_n(x)/L_{n-1}(x))` with rescaling so that large
/// nodes do not overflow.
fn laguerre_pair_scaled(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0f64;
    let mut cur = 1.0 - x;
    let mut log_scale = 0.0;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 - x) * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev /= 1e150;
            cur /= 1e150;
            log_scale += 1e150f64.ln();
        }
    }
    (prev.abs().ln() + log_scale, cur / prev)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = crate::specfun::KahanSum::new();
    for &l in v {
        acc.add((l - max).exp());
    }
    max + acc.sum().ln()
}

fn build_laguerre(order: usize) -> Result<QuadRule> {
    let n = order;
    let tri = RealSymTridiag {
        diag: (0..n).map(|i| 2.0 * i as f64 + 1.0).collect(),
        offdiag: (1..n).map(|i| i as f64).collect(),
    };
    let (mut nodes, _) = tri.eigen_first_components()?;
    let nf = n as f64;
    let mut ln_weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        // Newton polish on L_n using x L_n' = n (L_n - L_{n-1}).
        for _ in 0..3 {
            let (_, ratio) = laguerre_pair_scaled(n, *x);
            let denom = nf * (ratio - 1.0);
            if denom == 0.0 {
                break;
            }
            let step = ratio * *x / denom;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        let (ln_prev, _) = laguerre_pair_scaled(n, *x);
        // w = x / (n^2 L_{n-1}(x)^2)
        ln_weights.push(x.ln() - 2.0 * nf.ln() - 2.0 * ln_prev);
    }
    // Node rounding leaks into the weights at the 1e-14 level; pin the
    // zeroth moment to exactly 1.
    let ln_total = log_sum_exp(&ln_weights);
    for l in ln_weights.iter_mut() {
        *l -= ln_total;
    }
    let weights = ln_weights.iter().map(|l| l.exp()).collect();
    Ok(QuadRule { kind: QuadKind::GaussLaguerre, nodes, weights, ln_weights })
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    if n == 0 {
        return (0.0, 1.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

fn build_legendre(order: usize) -> Result<QuadRule> {
    let n = order;
    let tri = RealSymTridiag {
        diag: vec![0.0; n],
        offdiag: (1..n)
            .map(|i| {
                let f = i as f64;
                f / (4.0 * f * f - 1.0).sqrt()
            })
            .collect(),
    };
    let (mut nodes, _) = tri.eigen_first_components()?;
    let nf = n as f64;
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (pm1, p) = legendre_pair(n, *x);
            // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1)
            let dp = nf * (*x * p - pm1) / (*x * *x - 1.0);
            let step = p / dp;
            *x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (pm1, _) = legendre_pair(n, *x);
        let dp = nf * pm1 / (1.0 - *x * *x);
        weights.push(2.0 / ((1.0 - *x * *x) * dp * dp));
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w *= 2.0 / total;
    }
    let ln_weights = weights.iter().map(|w: &f64| w.ln()).collect();
    Ok(QuadRule { kind: QuadKind::GaussLegendre, nodes, weights, ln_weights })
}

/// `∫_a^b f` by `panels` equal Gauss–Legendre panels of the given order.
pub fn composite_legendre<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> Result<f64> {
    let rule = gauss_legendre(order)?;
    let width = (b - a) / panels as f64;
    let mut acc = crate::specfun::KahanSum::new();
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc.add(0.5 * width * w * f(mid + 0.5 * width * x));
        }
    }
    Ok(acc.sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_moments() {
        let r = gauss_laguerre(20).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!((r.integrate(|x| x) - 1.0).abs() < 1e-13);
        let r3 = gauss_laguerre(3).unwrap();
        assert!((r3.integrate(|x| x.powi(5)) - 120.0).abs() < 1e-10);
    }

    #[test]
    fn laguerre_rule_invariants() {
        for &order in &[1usize, 2, 7, 64, 150] {
            let r = gauss_laguerre(order).unwrap();
            assert_eq!(r.nodes.len(), order);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
        let r = gauss_laguerre(512).unwrap();
        assert!(r.weights.iter().all(|&w| w >= 0.0));
        assert!(r.ln_weights.iter().all(|l| l.is_finite()));
        assert!((r.integrate(|x| x * x) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn golub_welsch_weights_agree_with_formula() {
        let n = 12;
        let tri = RealSymTridiag {
            diag: (0..n).map(|i| 2.0 * i as f64 + 1.0).collect(),
            offdiag: (1..n).map(|i| i as f64).collect(),
        };
        let (nodes, first) = tri.eigen_first_components().unwrap();
        let rule = gauss_laguerre(n).unwrap();
        for i in 0..n {
            assert!((nodes[i] - rule.nodes[i]).abs() < 1e-11 * rule.nodes[i]);
            let gw = first[i] * first[i];
            assert!((gw - rule.weights[i]).abs() < 1e-13 + 1e-9 * rule.weights[i]);
        }
    }

    #[test]
    fn legendre_exactness() {
        let r = gauss_legendre(5).unwrap();
        assert!((r.integrate(|x| x.powi(8)) - 2.0 / 9.0).abs() < 1e-14);
        let r = gauss_legendre(200).unwrap();
        assert!((r.integrate(|x| x.cos()) - 2.0 * 1f64.sin()).abs() < 1e-14);
        let v = composite_legendre(|x| x.exp(), 0.0, 2.0, 4, 10).unwrap();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn order_limits() {
        assert!(gauss_laguerre(0).is_err());
        assert!(gauss_laguerre(513).is_err());
    }

    #[test]
    fn cache_returns_shared_rule() {
        let a = gauss_laguerre(33).unwrap();
        let b = gauss_laguerre(33).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
