//! q-number arithmetic and the closed-form eigenvalues of the su_q(2)
//! invariants.
//!
//! `[n] = (q^n - q^-n) / (q - q^-1)`. At `q = 1` every routine takes an exact
//! classical branch instead of evaluating the 0/0 quotient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

/// Above this `|n|` the q-number is evaluated from the quotient form.
const DIRECT_SUM_LIMIT: i64 = 256;

/// The deformation parameter together with `lambda = q - 1/q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QParam<T> {
    q: T,
    lambda: T,
    classical: bool,
}

impl<T: Real> QParam<T> {
    /// Rejects non-positive or non-finite `q`.
    pub fn new(q: T) -> Result<Self> {
        let as_f64 = q.to_f64();
        if !as_f64.is_finite() || q <= T::zero() {
            return Err(Error::InvalidQ(as_f64));
        }
        let classical = q == T::one();
        let lambda = if classical {
            T::zero()
        } else {
            q.clone() - T::one() / q.clone()
        };
        Ok(QParam { q, lambda, classical })
    }

    pub fn from_f64(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::InvalidQ(q));
        }
        Self::new(T::from_f64(q))
    }

    /// Parse a decimal literal such as `"0.9"` at the scalar's own precision.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let q = T::parse_decimal(s).ok_or_else(|| Error::InvalidArgument(format!("not a number: {s}")))?;
        Self::new(q)
    }

    pub fn classical() -> Self {
        Self::new(T::one()).expect("q = 1 is valid")
    }

    /// The same deformation with `q` replaced by `1/q`.
    pub fn inverse(&self) -> Self {
        Self::new(T::one() / self.q.clone()).expect("1/q of a valid q is valid")
    }

    /// Parameter with base `q^2`, used by the rebased q-numbers.
    pub fn squared(&self) -> Self {
        Self::new(self.q.clone() * self.q.clone()).expect("q^2 of a valid q is valid")
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    pub fn lambda(&self) -> &T {
        &self.lambda
    }

    pub fn is_classical(&self) -> bool {
        self.classical
    }

    /// `q^n`, exactly one at `q = 1`.
    pub fn pow(&self, n: i64) -> T {
        if self.classical || n == 0 {
            T::one()
        } else {
            self.q.powi(n)
        }
    }

    /// `[n]` for integer `n`, summed as `q^{n-1} + q^{n-3} + ... + q^{1-n}` so that
    /// nothing cancels near `q = 1` and the result is symmetric under `q -> 1/q`.
    pub fn qnum(&self, n: i64) -> T {
        if self.classical {
            return T::from_i64(n);
        }
        if n < 0 {
            return -self.qnum(-n);
        }
        if n > DIRECT_SUM_LIMIT {
            return (self.q.powi(n) - self.q.powi(-n)) / self.lambda.clone();
        }
        // pair q^e with q^-e so the sum is exactly symmetric
        let mut acc = if n % 2 == 1 { T::one() } else { T::zero() };
        let mut e = n - 1;
        while e > 0 {
            acc = acc + self.q.powi(e) + self.q.powi(-e);
            e -= 2;
        }
        acc
    }

    /// `[x]` for real `x`.
    pub fn qnum_real(&self, x: &T) -> T {
        if self.classical {
            return x.clone();
        }
        if x.is_zero() {
            return T::zero();
        }
        let up = self.q.powf(x);
        (up.clone() - T::one() / up) / self.lambda.clone()
    }

    /// `[n]` evaluated through the base-`q^2` form `[2] [n/2]_{q^2}`.
    pub fn qnum_rebased(&self, n: i64) -> T {
        let half = T::from_i64(n) / T::from_i64(2);
        self.qnum(2) * self.squared().qnum_real(&half)
    }

    /// `[j/2]_{q^2} = (q^j - q^-j) / (q^2 - q^-2) = [j]/[2]`, the base-`q^2`
    /// q-number at a half-integer argument, addressed by twice the argument.
    pub fn qnum_sq_half(&self, twice: i64) -> T {
        self.qnum(twice) / self.qnum(2)
    }

    /// `[n]! = [n][n-1]...[1]`, with `[0]! = 1`.
    pub fn qfactorial(&self, n: u32) -> T {
        (1..=n as i64).fold(T::one(), |acc, i| acc * self.qnum(i))
    }

    /// `[n]!! = [n][n-2]...`, with `[0]!! = [-1]!! = 1`.
    pub fn q_double_factorial(&self, n: i64) -> Result<T> {
        if n < -1 {
            return Err(Error::DoubleFactorialDomain(n));
        }
        let mut acc = T::one();
        let mut k = n;
        while k > 0 {
            acc = acc * self.qnum(k);
            k -= 2;
        }
        Ok(acc)
    }

    /// Eigenvalues of the three invariants on the `(2l+1)`-dimensional irrep.
    pub fn invariants(&self, l: u32) -> InvariantSet<T> {
        let li = l as i64;
        if self.classical {
            let v = T::from_i64(li * (li + 1));
            return InvariantSet { l, casimir: v.clone(), casimir_prime: v, c: T::one() };
        }
        if l == 0 {
            return InvariantSet { l, casimir: T::zero(), casimir_prime: T::zero(), c: T::one() };
        }
        let two = self.qnum(2);
        InvariantSet {
            l,
            casimir: self.qnum(li) * self.qnum(li + 1),
            casimir_prime: self.qnum(2 * li) * self.qnum(2 * li + 2) / (two.clone() * two.clone()),
            c: (self.q.powi(2 * li + 1) + self.q.powi(-2 * li - 1)) / two,
        }
    }
}

/// `C_l = [l][l+1]`, `C'_l = [2l][2l+2]/[2]^2` and `c_l = (q^{2l+1} + q^{-2l-1})/[2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantSet<T> {
    pub l: u32,
    pub casimir: T,
    pub casimir_prime: T,
    pub c: T,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::HighPrecision;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn qp(q: f64) -> QParam<f64> {
        QParam::from_f64(q).unwrap()
    }

    #[test]
    fn rejects_bad_q() {
        assert!(QParam::<f64>::from_f64(0.0).is_err());
        assert!(QParam::<f64>::from_f64(-1.5).is_err());
        assert!(QParam::<f64>::from_f64(f64::NAN).is_err());
        assert!(QParam::<f64>::from_f64(f64::INFINITY).is_err());
    }

    #[test]
    fn lambda_is_cached() {
        let p = qp(2.0);
        assert_eq!(*p.lambda(), 1.5);
        assert_eq!(*qp(1.0).lambda(), 0.0);
    }

    #[test]
    fn qnum_examples() {
        assert_eq!(qp(1.0).qnum(7), 7.0);
        assert_eq!(qp(1.7).qnum(0), 0.0);
        // (4 - 1/4) / (2 - 1/2)
        assert_abs_diff_eq!(qp(2.0).qnum(2), 2.5, epsilon = 1e-15);
        let p = qp(0.7);
        assert_abs_diff_eq!(p.qnum(-3), -p.qnum(3), epsilon = 1e-15);
        assert_abs_diff_eq!(p.qnum_real(&2.0), p.qnum(2), epsilon = 1e-14);
    }

    #[test]
    fn qnum_continuous_at_one() {
        for n in 1..6 {
            let near = qp(1.0 + 1e-7).qnum(n);
            assert!((near - n as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn rebased_examples() {
        assert_abs_diff_eq!(qp(2.0).qnum_rebased(2), 2.5, epsilon = 1e-14);
        assert_eq!(qp(1.0).qnum_rebased(1), 1.0);
    }

    #[test]
    fn factorials() {
        let p = qp(2.0);
        assert_eq!(p.qfactorial(0), 1.0);
        assert_eq!(p.q_double_factorial(-1).unwrap(), 1.0);
        assert_eq!(p.q_double_factorial(0).unwrap(), 1.0);
        assert_eq!(qp(1.0).qfactorial(3), 6.0);
        // [4][2] = 10.625 * 2.5
        assert_abs_diff_eq!(p.q_double_factorial(4).unwrap(), 26.5625, epsilon = 1e-12);
        assert_eq!(p.q_double_factorial(-2), Err(Error::DoubleFactorialDomain(-2)));
    }

    #[test]
    fn invariant_examples() {
        let p = qp(2.0);
        let zero = p.invariants(0);
        assert_eq!((zero.casimir, zero.casimir_prime, zero.c), (0.0, 0.0, 1.0));
        // (8 + 1/8) / 2.5
        assert_abs_diff_eq!(p.invariants(1).c, 3.25, epsilon = 1e-14);
        for l in 0..7 {
            let inv = qp(1.0).invariants(l);
            let v = (l * (l + 1)) as f64;
            assert_eq!((inv.casimir, inv.casimir_prime, inv.c), (v, v, 1.0));
        }
    }

    #[test]
    fn high_precision_matches_double() {
        let hp = QParam::<HighPrecision>::from_decimal("1.3").unwrap();
        let d = qp(1.3);
        for n in -4..8 {
            assert!((hp.qnum(n).to_f64() - d.qnum(n)).abs() < 1e-13);
        }
        let diff = hp.qnum_rebased(5) - hp.qnum(5);
        assert!(diff.abs().to_f64() < 1e-50);
    }

    proptest! {
        #[test]
        fn rebased_matches_direct(n in -8i64..=8, q in 0.5f64..2.0) {
            let p = qp(q);
            prop_assert!((p.qnum_rebased(n) - p.qnum(n)).abs() < 1e-12);
        }

        #[test]
        fn qnum_symmetric_in_q(n in -10i64..=10, q in 0.3f64..3.0) {
            let a = qp(q).qnum(n);
            let b = qp(q).inverse().qnum(n);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn qnum_increasing(n in 0i64..20, q in 0.2f64..5.0) {
            let p = qp(q);
            prop_assert!(p.qnum(n + 1) > p.qnum(n));
        }

        #[test]
        fn invariants_symmetric_in_q(l in 0u32..9, q in 0.4f64..2.5) {
            let a = qp(q).invariants(l);
            let b = qp(q).inverse().invariants(l);
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(1.0);
            prop_assert!(close(a.casimir, b.casimir));
            prop_assert!(close(a.casimir_prime, b.casimir_prime));
            prop_assert!(close(a.c, b.c));
        }
    }
}
