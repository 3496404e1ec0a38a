use crate::error::{Error, Result};

/// Relative separation below which two nodes count as coincident.
pub const COINCIDENT_REL: f64 = 1e-10;

/// Returns the first pair of nodes closer than `COINCIDENT_REL * max|node|`.
pub(crate) fn find_coincident(nodes: &[f64]) -> Option<(f64, f64)> {
    let scale = nodes.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut sorted = nodes.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted
        .windows(2)
        .find(|w| (w[1] - w[0]).abs() <= COINCIDENT_REL * scale)
        .map(|w| (w[0], w[1]))
}

/// Top entry `f[x_0, ..., x_{k}]` of the Newton divided-difference table.
///
/// Equals `Σ_k f(x_k) / Π_{i≠k} (x_k - x_i)` without that form's
/// cancellation when nodes cluster.
pub fn divided_difference<F: Fn(f64) -> f64>(f: F, nodes: &[f64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidParams("divided difference needs at least one node".into()));
    }
    if let Some((a, b)) = find_coincident(nodes) {
        return Err(Error::CoincidentNodes { a, b });
    }
    let mut table: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let n = nodes.len();
    for level in 1..n {
        for i in (level..n).rev() {
            table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    Ok(table[n - 1])
}
