use std::f64::consts::PI;

use num_complex::Complex64;

/// Fixed-Talbot inverse Laplace transform of `f` at `t > 0` with `order`
/// contour nodes.
pub fn talbot_invert<F: Fn(Complex64) -> Complex64>(f: F, t: f64, order: usize) -> f64 {
    let m = order.max(2);
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut acc = 0.5 * ((r * t).exp() * f(Complex64::new(r, 0.0))).re;
    for k in 1..m {
        let theta = k as f64 * PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * f(s) * Complex64::new(1.0, sigma);
        acc += term.re;
    }
    r / m as f64 * acc
}

/// Inverse of `e^{-delay s} g(s)` at `t`, using the shift theorem so that
/// the contour only ever sees the undelayed transform.
pub fn talbot_invert_delayed<G: Fn(Complex64) -> Complex64>(g: G, delay: f64, t: f64, order: usize) -> f64 {
    if t <= delay {
        0.0
    } else {
        talbot_invert(g, t - delay, order)
    }
}
