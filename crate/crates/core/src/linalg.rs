//! Small dense matrices: LU determinants, a tridiagonal QL eigensolver and
//! cyclic Jacobi for Hermitian matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signed::SignedLog;

pub const MAX_JACOBI_SWEEPS: usize = 50;
pub const MAX_HERMITIAN_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidParams(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParams("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidParams(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidParams("matmul shape mismatch".into()));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `X†X`, Hermitian by construction.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
            let d = out.get(i, i).re;
            out.set(i, i, Complex64::new(d, 0.0));
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `log|det A|` and its sign by partial-pivot LU. A singular matrix gives
/// `SignedLog::ZERO`.
pub fn lu_det(a: &RealMatrix) -> Result<SignedLog> {
    if a.rows != a.cols {
        return Err(Error::InvalidParams(format!("lu_det needs a square matrix, got {}x{}", a.rows, a.cols)));
    }
    if a.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("lu_det: non-finite entry".into()));
    }
    let n = a.rows;
    let mut m = a.data.clone();
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return Ok(SignedLog::ZERO);
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            sign = -sign;
        }
        let p = m[k * n + k];
        sign *= p.signum();
        log_abs += p.abs().ln();
        for i in k + 1..n {
            let f = m[i * n + k] / p;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    Ok(SignedLog::new(sign, log_abs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealSymTridiag {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl RealSymTridiag {
    /// Eigenvalues (ascending) and the first component of each normalized
    /// eigenvector, by implicit QL with Wilkinson shifts.
    pub fn eigen_first_components(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.diag.len();
        if n == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        if self.offdiag.len() + 1 != n {
            return Err(Error::InvalidParams(format!(
                "tridiagonal with {} diagonal and {} off-diagonal entries",
                n,
                self.offdiag.len()
            )));
        }
        let mut d = self.diag.clone();
        let mut e = self.offdiag.clone();
        e.push(0.0);
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenNonConvergence { sweeps: iter });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut underflow = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    let zf = z[i + 1];
                    z[i + 1] = s * z[i] + c * zf;
                    z[i] = c * z[i] - s * zf;
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        Ok((idx.iter().map(|&i| d[i]).collect(), idx.iter().map(|&i| z[i]).collect()))
    }

    pub fn eigvals(&self) -> Result<Vec<f64>> {
        Ok(self.eigen_first_components()?.0)
    }
}

/// Eigenvalues of a Hermitian matrix, ascending, by cyclic complex Jacobi.
///
/// The input is symmetrized as `(W + W†)/2` first. Sweeps stop once the
/// off-diagonal Frobenius mass drops below `tol * ‖W‖_F`.
pub fn hermitian_eigvals(w: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = w.rows;
    if w.cols != n {
        return Err(Error::InvalidParams("hermitian_eigvals needs a square matrix".into()));
    }
    if n > MAX_HERMITIAN_DIM {
        return Err(Error::SizeLimit { size: n, limit: MAX_HERMITIAN_DIM });
    }
    if w.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("hermitian_eigvals: non-finite entry".into()));
    }
    let scale = w.frobenius();
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (w.get(i, j) + w.get(j, i).conj());
        }
    }
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) >= tol * scale {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::EigenNonConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(phase) * rotation, acting on columns p and q.
                let ph = (apq / mag).conj();
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -ph * s;
                let jqq = ph * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_diag(d: &[f64]) -> ComplexMatrix {
        let n = d.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, c(x, 0.0));
        }
        m
    }

    #[test]
    fn lu_det_examples() {
        assert_eq!(lu_det(&RealMatrix::identity(4)).unwrap(), SignedLog::ONE);
        let d = lu_det(&RealMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap()).unwrap();
        assert_eq!(d.sign, 1.0);
        assert!((d.log_abs - 6f64.ln()).abs() < 1e-15);
        let d = lu_det(&RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()).unwrap();
        assert_eq!((d.sign, d.log_abs), (-1.0, 0.0));
        let s = lu_det(&RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap()).unwrap();
        assert!(s.is_zero() || s.log_abs < -30.0);
        assert!(lu_det(&RealMatrix::zeros(2, 3)).is_err());
        assert_eq!(lu_det(&RealMatrix::zeros(3, 3)).unwrap(), SignedLog::ZERO);
    }

    #[test]
    fn lu_det_large_entries_stay_in_log_domain() {
        let n = 6;
        let mut m = RealMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1e100);
        }
        m.set(0, 1, 5.0);
        let d = lu_det(&m).unwrap();
        assert_eq!(d.sign, 1.0);
        assert!((d.log_abs - 600.0 * 10f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn hermitian_examples() {
        assert_eq!(hermitian_eigvals(&real_diag(&[1.0, 1.0, 1.0]), 1e-14).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(hermitian_eigvals(&real_diag(&[3.0, 1.0, 2.0]), 1e-14).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn hermitian_2x2_matches_quadratic_formula() {
        let (a, d, b) = (1.3, -0.4, c(0.7, -1.1));
        let m = ComplexMatrix::new(2, 2, vec![c(a, 0.0), b, b.conj(), c(d, 0.0)]).unwrap();
        let ev = hermitian_eigvals(&m, 1e-15).unwrap();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        assert!((ev[0] - (mid - rad)).abs() < 1e-12);
        assert!((ev[1] - (mid + rad)).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_matches_jacobi() {
        let t = RealSymTridiag { diag: vec![2.0, -1.0, 0.5, 3.0], offdiag: vec![1.0, 0.3, -2.0] };
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..4 {
            m.set(i, i, c(t.diag[i], 0.0));
        }
        for i in 0..3 {
            m.set(i, i + 1, c(t.offdiag[i], 0.0));
            m.set(i + 1, i, c(t.offdiag[i], 0.0));
        }
        let (ev, first) = t.eigen_first_components().unwrap();
        let jac = hermitian_eigvals(&m, 1e-15).unwrap();
        for (x, y) in ev.iter().zip(&jac) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((first.iter().map(|z| z * z).sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(RealSymTridiag { diag: vec![1.0], offdiag: vec![1.0] }.eigvals().is_err());
    }

    fn random_matrix(rows: usize, cols: usize, vals: &[f64]) -> ComplexMatrix {
        let data = (0..rows * cols).map(|k| c(vals[2 * k % vals.len()], vals[(2 * k + 1) % vals.len()])).collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    }

    proptest! {
        #[test]
        fn similarity_invariants(vals in proptest::collection::vec(-2.0f64..2.0, 50)) {
            let x = random_matrix(5, 5, &vals);
            let h = {
                let mut h = x.clone();
                for i in 0..5 {
                    for j in 0..5 {
                        h.set(i, j, 0.5 * (x.get(i, j) + x.get(j, i).conj()));
                    }
                }
                h
            };
            let ev = hermitian_eigvals(&h, 1e-14).unwrap();
            let tr = h.trace().re;
            prop_assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-10 * (1.0 + tr.abs()));
            // det via the real 10x10 embedding [[A, -B], [B, A]] = |det H|^2
            let mut emb = RealMatrix::zeros(10, 10);
            for i in 0..5 {
                for j in 0..5 {
                    let z = h.get(i, j);
                    emb.set(i, j, z.re);
                    emb.set(i + 5, j + 5, z.re);
                    emb.set(i, j + 5, -z.im);
                    emb.set(i + 5, j, z.im);
                }
            }
            let d = lu_det(&emb).unwrap();
            let prod: f64 = ev.iter().product();
            let want = (0.5 * d.log_abs).exp();
            prop_assert!((prod.abs() - want).abs() <= 1e-8 * want.max(1e-6), "{} vs {}", prod, want);
        }

        #[test]
        fn gram_eigenvalues_nonnegative(vals in proptest::collection::vec(-2.0f64..2.0, 48), rows in 4usize..7) {
            let x = random_matrix(rows, 4, &vals);
            let ev = hermitian_eigvals(&x.gram(), 1e-14).unwrap();
            prop_assert!(ev.iter().all(|&l| l >= -1e-10));
        }
    }
}
