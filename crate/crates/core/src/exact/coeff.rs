use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rational numbers with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// Coefficient ring for polynomials: exact rationals or `f64`.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Coeff for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for Rational {
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn abs_f64(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
}

/// `p/q` as a rational.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Correctly rounded enough for our purposes even when numerator and
/// denominator individually overflow `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (r.numer().clone(), r.denom() << (shift as usize))
    } else {
        (r.numer() << ((-shift) as usize), r.denom().clone())
    };
    let q = (n / d).to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(shift as i32)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn is_one<T: Coeff>(c: &T) -> bool {
    *c == T::one()
}
