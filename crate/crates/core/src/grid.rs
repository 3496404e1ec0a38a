//! Evaluating a scalar function over a grid of points.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParams(format!("bad grid [{lo}, {hi}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    if !(hi > lo) {
        return Err(Error::InvalidParams(format!("grid needs hi > lo, got [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect())
}

/// Evaluates `f` at every grid point in parallel. The output order matches
/// the grid; the first error in grid order is returned.
pub fn eval_grid<F>(grid: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let out: Vec<Result<f64>> = grid.par_iter().map(|&x| f(x)).collect();
    out.into_iter().collect()
}
