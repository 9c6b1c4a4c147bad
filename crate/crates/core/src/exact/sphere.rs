use std::ops::{Add, Mul, Neg, Sub};

use super::coeff::{Coeff, Rational};
use super::moments::sphere_moment;
use super::poly::{degree_of, Exponent, Poly};
use super::scalar::ExactScalar;
use crate::error::{HopfError, Result};

/// Exact integral of x^e over the unit 3-sphere.
pub fn integrate_monomial(e: &Exponent) -> ExactScalar {
    match sphere_moment(e) {
        Some(m) => ExactScalar::pi_pow(m, 2),
        None => ExactScalar::zero(),
    }
}

/// Exact integral of a rational polynomial restricted to the unit 3-sphere.
pub fn integrate_poly(p: &Poly<Rational>) -> ExactScalar {
    ExactScalar::pi_pow(p.sphere_integral_coeff(), 2)
}

/// A polynomial function on S^3 in normal form: no monomial contains x4^2.
///
/// The normal form is reached by rewriting x4^2 -> 1 - x1^2 - x2^2 - x3^2.
/// Rewriting preserves degree parity, so the parts are kept separate.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct SphereScalar<T: Coeff = Rational> {
    even: Poly<T>,
    odd: Poly<T>,
}

fn reduce<T: Coeff>(p: &Poly<T>) -> Poly<T> {
    let s = &Poly::one() - &(&(&Poly::monomial([2, 0, 0, 0], T::one()) + &Poly::monomial([0, 2, 0, 0], T::one())) + &Poly::monomial([0, 0, 2, 0], T::one()));
    let mut s_pows = vec![Poly::one()];
    let mut out = Poly::zero();
    for (e, c) in p.terms() {
        if e[3] < 2 {
            out.add_term(*e, c.clone());
            continue;
        }
        let k = (e[3] / 2) as usize;
        while s_pows.len() <= k {
            let next = &s_pows[s_pows.len() - 1] * &s;
            s_pows.push(next);
        }
        let rest = Poly::monomial([e[0], e[1], e[2], e[3] % 2], c.clone());
        out += &(&rest * &s_pows[k]);
    }
    out
}

impl<T: Coeff> SphereScalar<T> {
    pub fn zero() -> Self {
        SphereScalar { even: Poly::zero(), odd: Poly::zero() }
    }

    pub fn constant(c: T) -> Self {
        Self::canonicalize(&Poly::constant(c))
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn var(i: usize) -> Self {
        Self::canonicalize(&Poly::var(i))
    }

    /// Reduces an arbitrary polynomial to normal form.
    pub fn canonicalize(p: &Poly<T>) -> Self {
        let r = reduce(p);
        SphereScalar { even: r.parity_part(false), odd: r.parity_part(true) }
    }

    pub fn even_part(&self) -> &Poly<T> {
        &self.even
    }

    pub fn odd_part(&self) -> &Poly<T> {
        &self.odd
    }

    /// The normal form as a single polynomial.
    pub fn poly(&self) -> Poly<T> {
        &self.even + &self.odd
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    /// Largest degree in the normal form.
    pub fn degree(&self) -> Option<u32> {
        match (self.even.degree(), self.odd.degree()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        SphereScalar { even: self.even.scale(c), odd: self.odd.scale(c) }
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> SphereScalar<U> {
        SphereScalar { even: self.even.map_coeffs(&f), odd: self.odd.map_coeffs(&f) }
    }

    pub fn to_f64(&self) -> SphereScalar<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        self.even.eval(x) + self.odd.eval(x)
    }

    /// Coefficient of pi^2 in the integral over S^3.
    pub fn integral_coeff(&self) -> T {
        // odd part integrates to zero
        self.even.sphere_integral_coeff()
    }

    /// Coefficient of pi^2 in the integral of the product, without
    /// canonicalizing the product.
    pub fn pairing_coeff(&self, other: &Self) -> T {
        self.even.sphere_pairing_coeff(&other.even) + self.odd.sphere_pairing_coeff(&other.odd)
    }

    /// Derivative along the tangent linear field x -> Lx (L antisymmetric).
    pub fn directional_derivative(&self, l: &[[T; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                if l[i][j].clone() + l[j][i].clone() != T::zero() {
                    return Err(HopfError::NotAntisymmetric);
                }
            }
        }
        Ok(self.derive_linear(l))
    }

    pub(crate) fn derive_linear(&self, l: &[[T; 4]; 4]) -> Self {
        let p = self.poly();
        let mut out = Poly::zero();
        for k in 0..4 {
            let dk = p.partial(k);
            if dk.is_zero() {
                continue;
            }
            let mut lin = Poly::zero();
            for (m, c) in l[k].iter().enumerate() {
                let mut e = [0; 4];
                e[m] = 1;
                lin.add_term(e, c.clone());
            }
            out += &(&dk * &lin);
        }
        Self::canonicalize(&out)
    }

    /// Derivative along a field whose k-th Cartesian component is
    /// `sign[k] * x_{var[k]}`. The Hopf and anti-Hopf frames have this shape.
    pub(crate) fn derive_signed_perm(&self, table: &[(i8, usize); 4]) -> Self {
        let p = self.poly();
        let mut out = Poly::zero();
        for (k, &(sign, var)) in table.iter().enumerate() {
            for (e, c) in p.terms() {
                if e[k] == 0 {
                    continue;
                }
                let mut f = *e;
                f[k] -= 1;
                f[var] += 1;
                let v = c.clone() * T::from_i64(e[k] as i64 * sign as i64);
                out.add_term(f, v);
            }
        }
        Self::canonicalize(&out)
    }

    /// Representative in which every monomial of each parity part has the
    /// same degree. Returns `(degree, poly)` per nonzero part.
    pub fn homogeneous_parts(&self) -> Vec<(u32, Poly<T>)> {
        let mut out = Vec::new();
        for part in [&self.even, &self.odd] {
            if let Some(d) = part.degree() {
                out.push((d, part.homogenize(d).expect("parity part has a single parity")));
            }
        }
        out
    }

    /// Nonnegative Laplace-Beltrami operator.
    ///
    /// For P homogeneous of degree d, the restriction satisfies
    /// Delta P = d(d+2) P - (Delta_R4 P).
    pub fn laplace_beltrami(&self) -> Self {
        let mut out = Poly::zero();
        for (d, p) in self.homogeneous_parts() {
            let k = T::from_i64((d * (d + 2)) as i64);
            out += &(&p.scale(&k) - &p.laplacian_r4());
        }
        Self::canonicalize(&out)
    }

    /// Image under the antipodal map x -> -x.
    pub fn antipodal(&self) -> Self {
        SphereScalar { even: self.even.clone(), odd: -self.odd.clone() }
    }

    /// Substitution x -> M x (for orthogonal M this is composition with an
    /// isometry), re-canonicalized.
    pub fn compose_linear(&self, m: &[[T; 4]; 4]) -> Self {
        Self::canonicalize(&self.poly().linear_substitute(m))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl SphereScalar<Rational> {
    pub fn parse(src: &str) -> Result<Self> {
        Poly::parse(src).map(|p| Self::canonicalize(&p)).map_err(HopfError::Parse)
    }

    pub fn integrate(&self) -> ExactScalar {
        ExactScalar::pi_pow(self.integral_coeff(), 2)
    }
}

impl SphereScalar<f64> {
    pub fn integrate_f64(&self) -> f64 {
        self.even.sphere_integral()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.even.max_abs_coeff().max(self.odd.max_abs_coeff())
    }
}

impl<T: Coeff> From<Poly<T>> for SphereScalar<T> {
    fn from(p: Poly<T>) -> Self {
        Self::canonicalize(&p)
    }
}

impl<T: Coeff> Add for &SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn add(self, rhs: &SphereScalar<T>) -> SphereScalar<T> {
        SphereScalar { even: &self.even + &rhs.even, odd: &self.odd + &rhs.odd }
    }
}

impl<T: Coeff> Add for SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn add(self, rhs: SphereScalar<T>) -> SphereScalar<T> {
        SphereScalar { even: self.even + rhs.even, odd: self.odd + rhs.odd }
    }
}

impl<T: Coeff> Sub for &SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn sub(self, rhs: &SphereScalar<T>) -> SphereScalar<T> {
        SphereScalar { even: &self.even - &rhs.even, odd: &self.odd - &rhs.odd }
    }
}

impl<T: Coeff> Sub for SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn sub(self, rhs: SphereScalar<T>) -> SphereScalar<T> {
        &self - &rhs
    }
}

impl<T: Coeff> Neg for SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn neg(self) -> SphereScalar<T> {
        SphereScalar { even: -self.even, odd: -self.odd }
    }
}

impl<T: Coeff> Mul for &SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn mul(self, rhs: &SphereScalar<T>) -> SphereScalar<T> {
        SphereScalar::canonicalize(&(&self.poly() * &rhs.poly()))
    }
}

impl<T: Coeff> Mul for SphereScalar<T> {
    type Output = SphereScalar<T>;
    fn mul(self, rhs: SphereScalar<T>) -> SphereScalar<T> {
        &self * &rhs
    }
}

/// True when every term has the given degree parity.
pub fn has_parity<T: Coeff>(p: &Poly<T>, odd: bool) -> bool {
    p.terms().all(|(e, _)| (degree_of(e) % 2 == 1) == odd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::coeff::{int, ratio};

    fn s(src: &str) -> SphereScalar {
        SphereScalar::parse(src).unwrap()
    }

    #[test]
    fn monomial_integrals() {
        assert_eq!(integrate_monomial(&[0, 0, 0, 0]), ExactScalar::pi_pow(int(2), 2));
        assert!(integrate_monomial(&[1, 0, 0, 0]).is_zero());
        assert_eq!(integrate_monomial(&[2, 0, 0, 0]), ExactScalar::pi_pow(ratio(1, 2), 2));
        assert_eq!(integrate_monomial(&[2, 2, 0, 0]), ExactScalar::pi_pow(ratio(1, 12), 2));
    }

    #[test]
    fn polynomial_integrals() {
        let two_pi2 = ExactScalar::pi_pow(int(2), 2);
        assert_eq!(s("1").integrate(), two_pi2);
        assert_eq!(s("x1^2+x2^2+x3^2+x4^2").integrate(), two_pi2);
        assert_eq!(integrate_poly(&Poly::parse("(x1*x3 + x2*x4)^2").unwrap()), ExactScalar::pi_pow(ratio(1, 6), 2));
    }

    #[test]
    fn canonical_forms() {
        assert!(s("x1^2+x2^2+x3^2+x4^2 - 1").is_zero());
        assert_eq!(s("x4^2"), s("1 - x1^2 - x2^2 - x3^2"));
        let c = s("x1 + x4^2*x1");
        assert!(c.even_part().is_zero());
        assert_eq!(c.odd_part(), &Poly::parse("2*x1 - x1^3 - x1*x2^2 - x1*x3^2").unwrap());
    }

    #[test]
    fn directional_derivatives() {
        let b1 = crate::frame::generator_matrix::<Rational>(crate::frame::Frame::Hopf, 0);
        assert_eq!(s("x1").directional_derivative(&b1).unwrap(), s("-x2"));
        assert!(s("1").directional_derivative(&b1).unwrap().is_zero());
        assert!(s("x1^2+x2^2").directional_derivative(&b1).unwrap().is_zero());
        let mut bad = b1.clone();
        bad[0][0] = int(1);
        assert!(s("x1").directional_derivative(&bad).is_err());
    }

    #[test]
    fn laplacian_of_low_degree() {
        assert_eq!(s("x1").laplace_beltrami(), s("3*x1"));
        assert!(s("1").laplace_beltrami().is_zero());
        // x1 x2 is harmonic of degree 2: eigenvalue 8
        assert_eq!(s("x1*x2").laplace_beltrami(), s("8*x1*x2"));
    }
}
