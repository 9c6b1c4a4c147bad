//! Vector fields on S^3 in the left-invariant orthonormal frame B1, B2, B3.

use std::ops::{Add, Neg, Sub};

use crate::error::{HopfError, Result};
use crate::exact::{Coeff, ExactScalar, Poly, Rational, SphereScalar};

/// Which of the two global orthonormal frames a table refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// B1 = (-x2, x1, -x4, x3), B2 = (-x3, x4, x1, -x2), B3 = (-x4, -x3, x2, x1).
    Hopf,
    /// Right-invariant counterparts; curl eigenvalue -2.
    AntiHopf,
}

/// Component k of field i is `sign * x_var`.
type Table = [(i8, usize); 4];

const HOPF: [Table; 3] = [
    [(-1, 1), (1, 0), (-1, 3), (1, 2)],
    [(-1, 2), (1, 3), (1, 0), (-1, 1)],
    [(-1, 3), (-1, 2), (1, 1), (1, 0)],
];

const ANTI_HOPF: [Table; 3] = [
    [(-1, 3), (1, 2), (-1, 1), (1, 0)],
    [(-1, 2), (-1, 3), (1, 0), (1, 1)],
    [(-1, 1), (1, 0), (1, 3), (-1, 2)],
];

fn table(frame: Frame, i: usize) -> &'static Table {
    match frame {
        Frame::Hopf => &HOPF[i],
        Frame::AntiHopf => &ANTI_HOPF[i],
    }
}

/// The antisymmetric matrix L with B_i(x) = L x.
pub fn generator_matrix<T: Coeff>(frame: Frame, i: usize) -> [[T; 4]; 4] {
    let mut m: [[T; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    for (k, &(s, v)) in table(frame, i).iter().enumerate() {
        m[k][v] = T::from_i64(s as i64);
    }
    m
}

/// Cartesian value of a frame vector at a point.
pub fn frame_vector(frame: Frame, i: usize, x: &[f64; 4]) -> [f64; 4] {
    let t = table(frame, i);
    std::array::from_fn(|k| t[k].0 as f64 * x[t[k].1])
}

/// Derivative of a scalar along B_i.
pub fn derive<T: Coeff>(s: &SphereScalar<T>, i: usize) -> SphereScalar<T> {
    s.derive_signed_perm(table(Frame::Hopf, i))
}

/// Derivative of a raw polynomial along B_i (no canonicalization; maps
/// homogeneous polynomials to homogeneous polynomials of the same degree).
pub fn derive_poly<T: Coeff>(p: &Poly<T>, i: usize) -> Poly<T> {
    let t = table(Frame::Hopf, i);
    let mut out = Poly::zero();
    for (k, &(sign, var)) in t.iter().enumerate() {
        for (e, c) in p.terms() {
            if e[k] == 0 {
                continue;
            }
            let mut f = *e;
            f[k] -= 1;
            f[var] += 1;
            out.add_term(f, c.clone() * T::from_i64(e[k] as i64 * sign as i64));
        }
    }
    out
}

/// Classification under the antipodal map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    DescendsToRp3,
    AntiInvariant,
    Mixed,
}

/// A vector field f1 B1 + f2 B2 + f3 B3.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct FrameField<T: Coeff = Rational> {
    pub f: [SphereScalar<T>; 3],
}

impl<T: Coeff> FrameField<T> {
    pub fn new(f1: SphereScalar<T>, f2: SphereScalar<T>, f3: SphereScalar<T>) -> Self {
        FrameField { f: [f1, f2, f3] }
    }

    pub fn zero() -> Self {
        FrameField { f: [SphereScalar::zero(), SphereScalar::zero(), SphereScalar::zero()] }
    }

    /// The constant field B_i.
    pub fn basis(i: usize) -> Self {
        let mut out = Self::zero();
        out.f[i] = SphereScalar::one();
        out
    }

    pub fn from_polys(p: [Poly<T>; 3]) -> Self {
        let [a, b, c] = p;
        Self::new(a.into(), b.into(), c.into())
    }

    pub fn is_zero(&self) -> bool {
        self.f.iter().all(|s| s.is_zero())
    }

    /// Largest coefficient degree.
    pub fn degree(&self) -> Option<u32> {
        self.f.iter().filter_map(|s| s.degree()).max()
    }

    pub fn scale(&self, c: &T) -> Self {
        FrameField { f: std::array::from_fn(|i| self.f[i].scale(c)) }
    }

    pub fn mul_scalar(&self, s: &SphereScalar<T>) -> Self {
        FrameField { f: std::array::from_fn(|i| &self.f[i] * s) }
    }

    pub fn map_coeffs<U: Coeff>(&self, g: impl Fn(&T) -> U) -> FrameField<U> {
        FrameField { f: std::array::from_fn(|i| self.f[i].map_coeffs(&g)) }
    }

    pub fn to_f64(&self) -> FrameField<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// curl(sum f_i B_i) = 2F + (B2 f3 - B3 f2) B1 + (B3 f1 - B1 f3) B2 + (B1 f2 - B2 f1) B3.
    pub fn curl(&self) -> Self {
        let d = |s: &SphereScalar<T>, i: usize| derive(s, i);
        let [f1, f2, f3] = &self.f;
        let two = T::from_i64(2);
        FrameField {
            f: [
                &f1.scale(&two) + &(&d(f3, 1) - &d(f2, 2)),
                &f2.scale(&two) + &(&d(f1, 2) - &d(f3, 0)),
                &f3.scale(&two) + &(&d(f2, 0) - &d(f1, 1)),
            ],
        }
    }

    /// The frame is divergence-free (Killing), so div F = sum B_i(f_i).
    pub fn divergence(&self) -> SphereScalar<T> {
        let mut out = SphereScalar::zero();
        for i in 0..3 {
            out = out + derive(&self.f[i], i);
        }
        out
    }

    pub fn grad(s: &SphereScalar<T>) -> Self {
        FrameField { f: std::array::from_fn(|i| derive(s, i)) }
    }

    pub fn pointwise_dot(&self, other: &Self) -> SphereScalar<T> {
        let mut p = Poly::zero();
        for i in 0..3 {
            p += &(&self.f[i].poly() * &other.f[i].poly());
        }
        SphereScalar::canonicalize(&p)
    }

    pub fn norm_sq_pointwise(&self) -> SphereScalar<T> {
        self.pointwise_dot(self)
    }

    /// Coefficient of pi^2 in the L2 inner product.
    pub fn inner_coeff(&self, other: &Self) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            s = s + self.f[i].pairing_coeff(&other.f[i]);
        }
        s
    }

    pub fn norm_sq_coeff(&self) -> T {
        self.inner_coeff(self)
    }

    /// Component along B1: the function B1 . F.
    pub fn b1_component(&self) -> &SphereScalar<T> {
        &self.f[0]
    }

    /// Cartesian components as polynomials in x.
    pub fn to_cartesian(&self) -> [Poly<T>; 4] {
        let mut out: [Poly<T>; 4] = Default::default();
        for i in 0..3 {
            let p = self.f[i].poly();
            for (k, &(s, v)) in table(Frame::Hopf, i).iter().enumerate() {
                let mut e = [0; 4];
                e[v] = 1;
                out[k] += &(&p * &Poly::monomial(e, T::from_i64(s as i64)));
            }
        }
        out
    }

    /// Frame coefficients of a tangent Cartesian field: f_i = V . B_i.
    pub fn from_cartesian(v: &[Poly<T>; 4]) -> Self {
        FrameField {
            f: std::array::from_fn(|i| {
                let mut p = Poly::zero();
                for (k, &(s, var)) in table(Frame::Hopf, i).iter().enumerate() {
                    let mut e = [0; 4];
                    e[var] = 1;
                    p += &(&v[k] * &Poly::monomial(e, T::from_i64(s as i64)));
                }
                SphereScalar::canonicalize(&p)
            }),
        }
    }

    pub fn eval_coeffs(&self, x: &[f64; 4]) -> [f64; 3] {
        std::array::from_fn(|i| self.f[i].eval(x))
    }

    pub fn eval_cartesian(&self, x: &[f64; 4]) -> [f64; 4] {
        let c = self.eval_coeffs(x);
        let mut out = [0.0; 4];
        for (i, ci) in c.iter().enumerate() {
            let b = frame_vector(Frame::Hopf, i, x);
            for k in 0..4 {
                out[k] += ci * b[k];
            }
        }
        out
    }

    /// (O_* F)(y) = O F(O^T y) for orthogonal O.
    pub fn isometry_pushforward(&self, o: &[[T; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let mut s = T::zero();
                for k in 0..4 {
                    s = s + o[k][i].clone() * o[k][j].clone();
                }
                let target = if i == j { T::one() } else { T::zero() };
                if s != target {
                    return Err(HopfError::NotOrthogonal);
                }
            }
        }
        let ot: [[T; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| o[j][i].clone()));
        let cart = self.to_cartesian();
        let pulled: Vec<Poly<T>> = cart.iter().map(|p| p.linear_substitute(&ot)).collect();
        let pushed: [Poly<T>; 4] = std::array::from_fn(|i| {
            let mut p = Poly::zero();
            for (k, q) in pulled.iter().enumerate() {
                p += &q.scale(&o[i][k]);
            }
            p
        });
        Ok(Self::from_cartesian(&pushed))
    }

    /// Under x -> -x the frame vectors are invariant as fields, so the
    /// pushforward acts by f_i -> f_i(-x).
    pub fn antipodal_parity(&self) -> Parity {
        let even = self.f.iter().all(|s| s.odd_part().is_zero());
        let odd = self.f.iter().all(|s| s.even_part().is_zero());
        match (even, odd) {
            (true, _) => Parity::DescendsToRp3,
            (false, true) => Parity::AntiInvariant,
            _ => Parity::Mixed,
        }
    }

    /// Components (even part, odd part) of the coefficients.
    pub fn parity_split(&self) -> (Self, Self) {
        let even = FrameField { f: std::array::from_fn(|i| SphereScalar::canonicalize(self.f[i].even_part())) };
        let odd = FrameField { f: std::array::from_fn(|i| SphereScalar::canonicalize(self.f[i].odd_part())) };
        (even, odd)
    }
}

impl FrameField<Rational> {
    pub fn parse(f1: &str, f2: &str, f3: &str) -> Result<Self> {
        Ok(Self::new(SphereScalar::parse(f1)?, SphereScalar::parse(f2)?, SphereScalar::parse(f3)?))
    }

    pub fn inner(&self, other: &Self) -> ExactScalar {
        ExactScalar::pi_pow(self.inner_coeff(other), 2)
    }

    pub fn norm_sq(&self) -> ExactScalar {
        self.inner(self)
    }
}

impl FrameField<f64> {
    pub fn inner_f64(&self, other: &Self) -> f64 {
        self.inner_coeff(other) * std::f64::consts::PI * std::f64::consts::PI
    }

    pub fn norm_sq_f64(&self) -> f64 {
        self.inner_f64(self)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.f.iter().map(|s| s.max_abs_coeff()).fold(0.0, f64::max)
    }
}

impl<T: Coeff> Add for &FrameField<T> {
    type Output = FrameField<T>;
    fn add(self, rhs: &FrameField<T>) -> FrameField<T> {
        FrameField { f: std::array::from_fn(|i| &self.f[i] + &rhs.f[i]) }
    }
}

impl<T: Coeff> Add for FrameField<T> {
    type Output = FrameField<T>;
    fn add(self, rhs: FrameField<T>) -> FrameField<T> {
        &self + &rhs
    }
}

impl<T: Coeff> Sub for &FrameField<T> {
    type Output = FrameField<T>;
    fn sub(self, rhs: &FrameField<T>) -> FrameField<T> {
        FrameField { f: std::array::from_fn(|i| &self.f[i] - &rhs.f[i]) }
    }
}

impl<T: Coeff> Sub for FrameField<T> {
    type Output = FrameField<T>;
    fn sub(self, rhs: FrameField<T>) -> FrameField<T> {
        &self - &rhs
    }
}

impl<T: Coeff> Neg for FrameField<T> {
    type Output = FrameField<T>;
    fn neg(self) -> FrameField<T> {
        let [a, b, c] = self.f;
        FrameField { f: [-a, -b, -c] }
    }
}

/// The Hopf frame B1, B2, B3 with constant coefficients.
pub fn hopf_frame() -> (FrameField, FrameField, FrameField) {
    (FrameField::basis(0), FrameField::basis(1), FrameField::basis(2))
}

/// Frame coefficients of the anti-Hopf field i (coefficient degree 2).
pub fn anti_hopf_field(i: usize) -> FrameField {
    let cart: [Poly<Rational>; 4] = std::array::from_fn(|k| {
        let (s, v) = ANTI_HOPF[i][k];
        let mut e = [0; 4];
        e[v] = 1;
        Poly::monomial(e, Rational::from_i64(s as i64))
    });
    FrameField::from_cartesian(&cart)
}

/// The orientation-reversing reflection T = diag(1, 1, 1, -1).
pub fn reflection_t<T: Coeff>() -> [[T; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| match (i == j, i) {
            (true, 3) => -T::one(),
            (true, _) => T::one(),
            _ => T::zero(),
        })
    })
}

/// A point of S^3 with a tangent vector, for probing Cartesian forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartesianSample {
    pub point: [f64; 4],
    pub vector: [f64; 4],
}

impl CartesianSample {
    pub fn new(point: [f64; 4], vector: [f64; 4]) -> Result<Self> {
        let n: f64 = point.iter().map(|v| v * v).sum::<f64>();
        let d: f64 = point.iter().zip(&vector).map(|(a, b)| a * b).sum();
        if (n - 1.0).abs() > 1e-12 || d.abs() > 1e-12 {
            return Err(HopfError::Invalid("sample point not on S^3 or vector not tangent".into()));
        }
        Ok(CartesianSample { point, vector })
    }

    pub fn of_field<T: Coeff>(field: &FrameField<T>, point: [f64; 4]) -> Result<Self> {
        Self::new(point, field.eval_cartesian(&point))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn sc(src: &str) -> SphereScalar {
        SphereScalar::parse(src).unwrap()
    }

    #[test]
    fn frame_vectors_at_base_point() {
        let (b1, b2, b3) = hopf_frame();
        let e1 = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(b1.eval_cartesian(&e1), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(b2.eval_cartesian(&e1), [0.0, 0.0, 1.0, 0.0]);
        assert!(b1.pointwise_dot(&b2).is_zero());
        assert!(b3.pointwise_dot(&b1).is_zero());
        assert_eq!(b1.pointwise_dot(&b1), SphereScalar::one());
    }

    #[test]
    fn curl_of_hopf_fields() {
        let (b1, _, _) = hopf_frame();
        assert_eq!(b1.curl(), b1.scale(&int(2)));
        for i in 0..3 {
            let a = anti_hopf_field(i);
            assert_eq!(a.curl(), a.scale(&int(-2)));
            assert_eq!(a.norm_sq(), ExactScalar::pi_pow(int(2), 2));
        }
    }

    #[test]
    fn divergence_and_gradient() {
        assert!(FrameField::<Rational>::basis(0).divergence().is_zero());
        let x1b1 = FrameField::new(sc("x1"), sc("0"), sc("0"));
        assert_eq!(x1b1.divergence(), sc("-x2"));
        let g = FrameField::grad(&sc("x1"));
        assert_eq!(g.divergence(), sc("-3*x1"));
        assert_eq!(g.norm_sq_pointwise(), sc("1 - x1^2"));
        assert!(FrameField::grad(&sc("1")).is_zero());
    }

    #[test]
    fn reflection_maps_b1_to_anti_hopf() {
        let t = reflection_t::<Rational>();
        let pushed = FrameField::basis(0).isometry_pushforward(&t).unwrap();
        assert_eq!(pushed, anti_hopf_field(2));
        let mut stretch = reflection_t::<Rational>();
        stretch[0][0] = int(2);
        assert!(FrameField::basis(0).isometry_pushforward(&stretch).is_err());
    }

    #[test]
    fn parity_classification() {
        assert_eq!(FrameField::<Rational>::basis(0).antipodal_parity(), Parity::DescendsToRp3);
        let u1 = FrameField::parse("0", "x1", "-x2").unwrap();
        assert_eq!(u1.antipodal_parity(), Parity::AntiInvariant);
        let mixed = &u1 + &FrameField::basis(0);
        assert_eq!(mixed.antipodal_parity(), Parity::Mixed);
    }

    #[test]
    fn cartesian_round_trip() {
        let f = FrameField::parse("x1*x2", "x3 - 2*x4^2", "1/3").unwrap();
        assert_eq!(FrameField::from_cartesian(&f.to_cartesian()), f);
        let s = CartesianSample::of_field(&f, [0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(s.point, [0.5; 4]);
        assert_eq!(f.inner(&f.scale(&ratio(1, 2))), f.norm_sq().scale(&ratio(1, 2)));
    }
}
