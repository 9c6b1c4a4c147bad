use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::coeff::{int, rational_to_f64, Rational};

/// Finite Laurent combination sum_k c_k pi^k with rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is equality of
/// values (pi being transcendental).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactScalar {
    terms: BTreeMap<i32, Rational>,
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(c: Rational) -> Self {
        Self::pi_pow(c, 0)
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(int(n))
    }

    /// `c * pi^k`.
    pub fn pi_pow(c: Rational, k: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        ExactScalar { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    /// Coefficient of pi^k.
    pub fn coeff(&self, k: i32) -> Rational {
        self.terms.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    /// The rational `c` if the value is `c * pi^k` for the given `k` (or zero).
    pub fn as_single(&self, k: i32) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&k).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(k, c)| rational_to_f64(c) * std::f64::consts::PI.powi(*k)).sum()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ExactScalar { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    /// Multiplication by pi^k.
    pub fn shift(&self, k: i32) -> Self {
        ExactScalar { terms: self.terms.iter().map(|(j, v)| (j + k, v.clone())).collect() }
    }

    /// Inverse of a single-term value.
    pub fn inv(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next().unwrap();
        Some(Self::pi_pow(Rational::one() / c, -k))
    }

    /// Exact quotient when the divisor has a single term.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        Some(self * &rhs.inv()?)
    }

    fn add_term(&mut self, k: i32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    /// Serialized as `p/q * pi^k` terms joined by ` + `.
    pub fn to_report_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            let (sep, c) = if first {
                ("", c.clone())
            } else if c.is_negative() {
                (" - ", -c.clone())
            } else {
                (" + ", c.clone())
            };
            first = false;
            write!(f, "{sep}{c}")?;
            if *k != 0 {
                write!(f, " * pi^{k}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactScalar({self})")
    }
}

impl Add for &ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: ExactScalar) -> ExactScalar {
        &self + &rhs
    }
}

impl Sub for &ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        &self - &rhs
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let mut out = ExactScalar::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl std::iter::Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::coeff::ratio;

    #[test]
    fn ring_operations_cancel_to_canonical_zero() {
        let a = ExactScalar::pi_pow(ratio(151, 90), -4);
        let b = ExactScalar::pi_pow(ratio(2, 1), 2);
        let s = &a + &b;
        assert_eq!(&s - &a, b);
        assert!((&s - &s).is_zero());
        assert_eq!(&a * &b, ExactScalar::pi_pow(ratio(151, 45), -2));
    }

    #[test]
    fn display_format() {
        let v = ExactScalar::pi_pow(ratio(2, 1), 2) - ExactScalar::pi_pow(ratio(1, 3), 0);
        assert_eq!(v.to_string(), "2 * pi^2 - 1/3");
        assert_eq!(ExactScalar::zero().to_string(), "0");
    }

    #[test]
    fn inverse_of_monomial() {
        let v = ExactScalar::pi_pow(ratio(3, 7), 2);
        assert_eq!(&v * &v.inv().unwrap(), ExactScalar::integer(1));
        assert!((v.clone() + ExactScalar::integer(1)).inv().is_none());
        assert!((v.to_f64() - 3.0 / 7.0 * std::f64::consts::PI.powi(2)).abs() < 1e-14);
    }
}
