use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real polynomial; `coeffs[d]` multiplies `x^d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyRat {
    coeffs: Vec<f64>,
}

impl PolyRat {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        PolyRat { coeffs }
    }

    pub fn zero() -> Self {
        PolyRat { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        PolyRat { coeffs: vec![1.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

impl Add for &PolyRat {
    type Output = PolyRat;
    fn add(self, rhs: &PolyRat) -> PolyRat {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        PolyRat::new(c)
    }
}

impl Neg for &PolyRat {
    type Output = PolyRat;
    fn neg(self) -> PolyRat {
        self.scale(-1.0)
    }
}

impl Sub for &PolyRat {
    type Output = PolyRat;
    fn sub(self, rhs: &PolyRat) -> PolyRat {
        self + &(-rhs)
    }
}

impl Mul for &PolyRat {
    type Output = PolyRat;
    fn mul(self, rhs: &PolyRat) -> PolyRat {
        if self.is_zero() || rhs.is_zero() {
            return PolyRat::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        PolyRat::new(c)
    }
}

pub const POLY_DET_MAX: usize = 12;

/// Determinant of a square matrix of polynomials.
///
/// Laplace expansion along rows, memoized over the set of columns already
/// used, so the cost is `O(2^k k)` polynomial products instead of `k!`.
pub fn poly_det(entries: &[Vec<PolyRat>]) -> Result<PolyRat> {
    let k = entries.len();
    if k > POLY_DET_MAX {
        return Err(Error::SizeLimit { size: k, limit: POLY_DET_MAX });
    }
    if entries.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidParams("poly_det needs a square matrix".into()));
    }
    if k == 0 {
        return Ok(PolyRat::one());
    }
    // partial[mask] = signed sum over injections of the first popcount(mask)
    // rows into the columns of `mask`.
    let mut partial: Vec<Option<PolyRat>> = vec![None; 1 << k];
    partial[0] = Some(PolyRat::one());
    for mask in 0usize..(1 << k) {
        let Some(acc) = partial[mask].take() else { continue };
        let row = mask.count_ones() as usize;
        if row == k {
            partial[mask] = Some(acc);
            continue;
        }
        for col in 0..k {
            if mask & (1 << col) != 0 || entries[row][col].is_zero() {
                continue;
            }
            // Inversions contributed by placing `col` after the columns in mask.
            let above = (mask >> (col + 1)).count_ones();
            let mut term = &acc * &entries[row][col];
            if above % 2 == 1 {
                term = -&term;
            }
            let next = mask | (1 << col);
            partial[next] = Some(match partial[next].take() {
                Some(p) => &p + &term,
                None => term,
            });
        }
    }
    Ok(partial[(1 << k) - 1].take().unwrap_or_default())
}
