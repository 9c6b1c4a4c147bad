use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use super::coeff::{Coeff, Rational};
use super::moments::{sphere_moment, sphere_moment_f64};

/// Exponent vector of a monomial in x1..x4.
pub type Exponent = [u32; 4];

pub fn degree_of(e: &Exponent) -> u32 {
    e.iter().sum()
}

/// Polynomial in four variables, stored sparsely. Used both as a function on
/// R^4 and, by restriction, as a function on the unit sphere.
#[derive(Clone, PartialEq)]
pub struct Poly<T: Coeff> {
    terms: BTreeMap<Exponent, T>,
}

impl<T: Coeff> Default for Poly<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Coeff> Poly<T> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    pub fn monomial(e: Exponent, c: T) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// |x|^2 = x1^2 + x2^2 + x3^2 + x4^2.
    pub fn radius_sq() -> Self {
        let mut p = Self::zero();
        for i in 0..4 {
            let mut e = [0; 4];
            e[i] = 2;
            p.add_term(e, T::one());
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> T {
        self.terms.get(e).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(degree_of).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(degree_of).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree() == self.min_degree()
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(e, v)| (*e, v.clone() * c.clone())).filter(|(_, v)| !v.is_zero()).collect();
        Poly { terms }
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, f(c));
        }
        out
    }

    pub fn to_f64(&self) -> Poly<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                out.add_term(f, c.clone() * T::from_i64(e[i] as i64));
            }
        }
        out
    }

    /// Euclidean Laplacian on R^4.
    pub fn laplacian_r4(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            out = out + self.partial(i).partial(i);
        }
        out
    }

    /// Terms of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        let terms = self.terms.iter().filter(|(e, _)| degree_of(e) == d).map(|(e, c)| (*e, c.clone())).collect();
        Poly { terms }
    }

    /// Terms of even (`odd = false`) or odd total degree.
    pub fn parity_part(&self, odd: bool) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| (degree_of(e) % 2 == 1) == odd)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        Poly { terms }
    }

    /// Multiplies every term of degree d by |x|^{target-d}, producing a
    /// homogeneous polynomial equal to `self` on the sphere. All degrees must
    /// have the parity of `target` and not exceed it.
    pub fn homogenize(&self, target: u32) -> Option<Self> {
        let mut out = Self::zero();
        let r2 = Self::radius_sq();
        let mut by_deg: BTreeMap<u32, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            by_deg.entry(degree_of(e)).or_insert_with(Self::zero).add_term(*e, c.clone());
        }
        for (d, part) in by_deg {
            if d > target || !(target - d).is_multiple_of(2) {
                return None;
            }
            out = out + &part * &r2.pow((target - d) / 2);
        }
        Some(out)
    }

    /// Substitutes x_k -> sum_l m[k][l] y_l.
    pub fn linear_substitute(&self, m: &[[T; 4]; 4]) -> Self {
        let lin: Vec<Self> = (0..4)
            .map(|k| {
                let mut p = Self::zero();
                for (l, c) in m[k].iter().enumerate() {
                    let mut e = [0; 4];
                    e[l] = 1;
                    p.add_term(e, c.clone());
                }
                p
            })
            .collect();
        let mut powers: Vec<Vec<Self>> = lin.iter().map(|p| vec![Self::one(), p.clone()]).collect();
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for k in 0..4 {
                let need = e[k] as usize;
                while powers[k].len() <= need {
                    let next = &powers[k][powers[k].len() - 1] * &lin[k];
                    powers[k].push(next);
                }
                t = &t * &powers[k][need];
            }
            out = out + t;
        }
        out
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for (e, c) in &self.terms {
            s += c.to_f64() * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32) * x[3].powi(e[3] as i32);
        }
        s
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// Coefficient of pi^2 in the integral over the unit 3-sphere.
    pub fn sphere_integral_coeff(&self) -> T {
        let mut s = T::zero();
        for (e, c) in &self.terms {
            if let Some(m) = sphere_moment(e) {
                s = s + c.clone() * T::from_rational(&m);
            }
        }
        s
    }

    /// Coefficient of pi^2 in the integral of `self * other`, without forming
    /// the product.
    pub fn sphere_pairing_coeff(&self, other: &Self) -> T {
        let mut s = T::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                if let Some(m) = sphere_moment(&e) {
                    s = s + ca.clone() * cb.clone() * T::from_rational(&m);
                }
            }
        }
        s
    }
}

impl Poly<f64> {
    /// Integral over the unit sphere in floating point.
    pub fn sphere_integral(&self) -> f64 {
        let mut s = 0.0;
        for (e, c) in &self.terms {
            s += c * sphere_moment_f64(e);
        }
        s * std::f64::consts::PI * std::f64::consts::PI
    }

    pub fn sphere_pairing(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                s += ca * cb * sphere_moment_f64(&e);
            }
        }
        s * std::f64::consts::PI * std::f64::consts::PI
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let terms = self.terms.iter().filter(|(_, c)| c.abs() > tol).map(|(e, c)| (*e, *c)).collect();
        Poly { terms }
    }
}

impl Poly<Rational> {
    /// Parses expressions like `3*x1^2*x2 - x4^3/2 + 1/3`.
    pub fn parse(src: &str) -> Result<Self, String> {
        super::parse::parse_poly(src)
    }
}

impl<'a, T: Coeff> Add<&'a Poly<T>> for &'a Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl<T: Coeff> Add for Poly<T> {
    type Output = Poly<T>;
    fn add(mut self, rhs: Poly<T>) -> Poly<T> {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl<T: Coeff> AddAssign<&Poly<T>> for Poly<T> {
    fn add_assign(&mut self, rhs: &Poly<T>) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl<'a, T: Coeff> Sub<&'a Poly<T>> for &'a Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl<T: Coeff> Sub for Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: Poly<T>) -> Poly<T> {
        &self - &rhs
    }
}

impl<T: Coeff> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        let terms = self.terms.into_iter().map(|(e, c)| (e, -c)).collect();
        Poly { terms }
    }
}

impl<'a, T: Coeff> Mul<&'a Poly<T>> for &'a Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Coeff> Mul for Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Poly<T>) -> Poly<T> {
        &self * &rhs
    }
}

impl<T: Coeff + fmt::Display> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl<T: Coeff> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// All exponents of total degree exactly `d`, in a fixed order.
pub fn monomials_of_degree(d: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            for c in (0..=d - a - b).rev() {
                out.push([a, b, c, d - a - b - c]);
            }
        }
    }
    out
}
