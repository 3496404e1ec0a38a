//! Sign / log-magnitude carrier for quantities whose magnitude can leave the
//! double-precision range even though the final answer is O(1).

use std::ops::Mul;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// One of -1, 0 or +1.
    pub sign: f64,
    /// Natural log of the magnitude; `-inf` when `sign == 0`.
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0.0, log_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1.0, log_abs: 0.0 };

    pub fn new(sign: f64, log_abs: f64) -> Self {
        if sign == 0.0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: sign.signum(), log_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: x.signum(), log_abs: x.abs().ln() }
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn recip(self) -> Self {
        SignedLog { sign: self.sign, log_abs: -self.log_abs }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.is_zero() || rhs.is_zero() {
            SignedLog::ZERO
        } else {
            SignedLog { sign: self.sign * rhs.sign, log_abs: self.log_abs + rhs.log_abs }
        }
    }
}

/// Sums signed log-magnitude terms without leaving the log domain until the end.
pub fn sum_signed(terms: &[SignedLog]) -> SignedLog {
    let max = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    let mut acc = crate::specfun::KahanSum::new();
    for t in terms.iter().filter(|t| !t.is_zero()) {
        acc.add(t.sign * (t.log_abs - max).exp());
    }
    let s = acc.sum();
    if s == 0.0 {
        SignedLog::ZERO
    } else {
        SignedLog { sign: s.signum(), log_abs: s.abs().ln() + max }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_value() {
        let a = SignedLog::from_f64(-3.0);
        let b = SignedLog::from_f64(0.5);
        assert!(((a * b).value() + 1.5).abs() < 1e-15);
        assert_eq!((a * SignedLog::ZERO).value(), 0.0);
    }

    #[test]
    fn signed_sum_survives_huge_magnitudes() {
        let big = SignedLog::new(1.0, 800.0);
        let neg = SignedLog::new(-1.0, 800.0 + (0.25f64).ln());
        let s = sum_signed(&[big, neg]);
        assert_eq!(s.sign, 1.0);
        assert!((s.log_abs - (800.0 + 0.75f64.ln())).abs() < 1e-12);
    }
}
