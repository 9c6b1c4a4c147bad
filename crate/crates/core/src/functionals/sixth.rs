//! Sixth-order analysis in the degenerate Z2 directions: the cubic
//! remainder field R, its divergence-free part C, and the weighted Taylor
//! coefficient of F along B1 + eps Z2 + eps^2 P.

use std::f64::consts::PI;

use crate::error::{HopfError, Result};
use crate::exact::{Coeff, Poly, Rational, SphereScalar};
use crate::frame::FrameField;
use crate::quadrature::QuadratureSpec;

use super::perturbation::{orthonormal_basis, HopfPerturbation};
use super::{hopf_prefactor, PathSeries};

/// 151 / (90 pi^4): |C|^2 per |Z2|^6.
pub fn correction_norm_coeff() -> f64 {
    151.0 / (90.0 * PI.powi(4))
}

/// Leading constant of the a-sextic in the transcribed sixth-order
/// polynomial, and the value produced by the series expansion.
pub const TRANSCRIBED_LEADING: f64 = 959.0;
pub const EXPANSION_LEADING: f64 = -406.0;

/// R = c1 B1 + c2 Z2 - 6 (B1.Z2) P with
/// c1 = -6 P.Z2 + 15 (P.B1)(B1.Z2) - 45/4 (B1.Z2)^3 + 15/2 |Z2|^2 (B1.Z2),
/// c2 = -6 (B1.P) - 3 |Z2|^2 + 15/2 (B1.Z2)^2.
pub fn remainder_unchecked<T: Coeff>(p: &FrameField<T>, z: &FrameField<T>) -> FrameField<T> {
    let k = |n: i64, d: i64| T::from_rational(&crate::exact::ratio(n, d));
    let s = z.b1_component();
    let p1 = p.b1_component();
    let q = z.norm_sq_pointwise();
    let pz = p.pointwise_dot(z);
    let s2 = s * s;
    let c1 = pz.scale(&k(-6, 1)) + (p1 * s).scale(&k(15, 1)) + (&s2 * s).scale(&k(-45, 4)) + (&q * s).scale(&k(15, 2));
    let c2 = p1.scale(&k(-6, 1)) + q.scale(&k(-3, 1)) + s2.scale(&k(15, 2));
    let mut out = z.mul_scalar(&c2) - p.mul_scalar(&s.scale(&k(6, 1)));
    out.f[0] = &out.f[0] + &c1;
    out
}

fn span_residual(f: &FrameField<f64>, basis: &[FrameField<f64>]) -> f64 {
    let mut r = f.clone();
    for e in basis {
        r = &r - &e.scale(&e.inner_f64(f));
    }
    r.norm_sq_f64().sqrt()
}

fn z2_basis() -> Vec<FrameField<f64>> {
    let b = orthonormal_basis(3).expect("eigenvalue 3");
    vec![b[4].clone(), b[7].clone()]
}

fn p32_basis() -> Vec<FrameField<f64>> {
    let b = orthonormal_basis(4).expect("eigenvalue 4");
    vec![b[9].clone(), b[11].clone(), b[14].clone()]
}

/// [`remainder_unchecked`] after checking P in span{v10, v12, v15} and
/// Z2 in span{u5, u8}.
pub fn remainder_field(p: &FrameField<f64>, z: &FrameField<f64>) -> Result<FrameField<f64>> {
    let tol = |f: &FrameField<f64>| 1e-10 * f.norm_sq_f64().sqrt().max(1.0);
    if span_residual(z, &z2_basis()) > tol(z) {
        return Err(HopfError::NotInSpan("Z2 must lie in span{u5, u8}".into()));
    }
    if span_residual(p, &p32_basis()) > tol(p) {
        return Err(HopfError::NotInSpan("P must lie in span{v10, v12, v15}".into()));
    }
    Ok(remainder_unchecked(p, z))
}

/// Exact variant of [`remainder_field`] for rational inputs.
pub fn remainder_field_exact(p: &FrameField, z: &FrameField) -> Result<FrameField> {
    let e3 = crate::atlas::explicit_basis(3)?;
    let e4 = crate::atlas::explicit_basis(4)?;
    if !crate::atlas::in_orthogonal_span(z, &[e3.fields[4].clone(), e3.fields[7].clone()]) {
        return Err(HopfError::NotInSpan("Z2 must lie in span{u5, u8}".into()));
    }
    let pb = [e4.fields[9].clone(), e4.fields[11].clone(), e4.fields[14].clone()];
    if !crate::atlas::in_orthogonal_span(p, &pb) {
        return Err(HopfError::NotInSpan("P must lie in span{v10, v12, v15}".into()));
    }
    Ok(remainder_unchecked::<Rational>(p, z))
}

/// (b10, b12, b15) solving the three balance relations with zero defect:
/// b15 = (a5^2 + a8^2)/(2 sqrt3 pi), b12 = sqrt7 (a5^2 - a8^2)/(6 pi),
/// b10 = -sqrt7 a5 a8 / (3 pi).
pub fn balanced_b(a5: f64, a8: f64) -> (f64, f64, f64) {
    let (r3, r7) = (3f64.sqrt(), 7f64.sqrt());
    let b15 = (a5 * a5 + a8 * a8) / (2.0 * r3 * PI);
    let b12 = r7 * (a5 * a5 - a8 * a8) / (6.0 * PI);
    let b10 = -r7 * a5 * a8 / (3.0 * PI);
    (b10, b12, b15)
}

/// Cubic potential G whose gradient removes the non-solenoidal part of R.
pub fn correction_potential(a5: f64, a8: f64, b10: f64, b12: f64, b15: f64) -> SphereScalar<f64> {
    let (r3, r21) = (3f64.sqrt(), 21f64.sqrt());
    let p = PI;
    let den = 945.0 * p.powi(3);
    let d1 = -(-177.0 * r21 * a8 * b10 * p - 259.0 * a8 * a8 * a5 * r3 - 112.0 * a5.powi(3) * r3
        + 87.0 * r21 * b12 * a5 * p
        + 189.0 * p * a5 * b15)
        / den;
    let d3 = -(267.0 * r21 * p * a8 * b12 - 182.0 * r3 * a8 * a5 * a5 - 189.0 * p * b15 * a8 + 259.0 * a8.powi(3) * r3
        - 3.0 * r21 * p * a5 * b10)
        / den;
    let d4 = (177.0 * r21 * p * a8 * b10 + 259.0 * r3 * a8 * a8 * a5 - 14.0 * r3 * a5.powi(3)
        + 75.0 * r21 * p * b12 * a5
        + 945.0 * p * a5 * b15)
        / den;
    let d5 = -(3.0 * r21 * p * a8 * b10 + 182.0 * r3 * a8 * a8 * a5 - 259.0 * r3 * a5.powi(3)
        + 267.0 * r21 * p * a5 * b12
        + 189.0 * p * a5 * b15)
        / den;
    let d7 = -(267.0 * r21 * p * a8 * b12 - 14.0 * r3 * a8 * a5 * a5 - 189.0 * p * b15 * a8 + 259.0 * a8.powi(3) * r3
        + 15.0 * r21 * p * a5 * b10)
        / den;
    let d10 = -(87.0 * r21 * p * a8 * b12 + 259.0 * r3 * a8 * a5 * a5 - 189.0 * p * b15 * a8
        + 112.0 * r3 * a8.powi(3)
        + 177.0 * r21 * p * a5 * b10)
        / den;
    let d12 = -(2.0 / (315.0 * p.powi(3)))
        * (-57.0 * r21 * a5 * b10 * p - 91.0 * r3 * a8 * a5 * a5 + 27.0 * r21 * p * a8 * b12 + 189.0 * p * b15 * a8);
    let d14 = -(-15.0 * r21 * p * a8 * b10 + 14.0 * r3 * a8 * a8 * a5 - 259.0 * a5.powi(3) * r3
        + 267.0 * r21 * p * b12 * a5
        + 189.0 * p * a5 * b15)
        / den;
    let d17 = -(2.0 / (315.0 * p.powi(3)))
        * (27.0 * r21 * p * a5 * b12 + 91.0 * r3 * a8 * a8 * a5 - 189.0 * p * a5 * b15 + 57.0 * r21 * p * a8 * b10);
    let d18 = (75.0 * r21 * p * a8 * b12 - 259.0 * r3 * a8 * a5 * a5 - 945.0 * p * b15 * a8 + 14.0 * r3 * a8.powi(3)
        - 177.0 * r21 * p * a5 * b10)
        / den;
    // exponents of x, y, z, w = x1..x4
    let terms: [([u32; 4], f64); 10] = [
        ([3, 0, 0, 0], d1),
        ([2, 0, 1, 0], d3),
        ([1, 2, 0, 0], d4),
        ([1, 0, 2, 0], d5),
        ([0, 2, 1, 0], d7),
        ([0, 0, 3, 0], d10),
        ([1, 1, 0, 1], d12),
        ([1, 0, 0, 2], d14),
        ([0, 1, 1, 1], d17),
        ([0, 0, 1, 2], d18),
    ];
    let mut g = Poly::zero();
    for (e, c) in terms {
        g.add_term(e, c);
    }
    SphereScalar::canonicalize(&g)
}

/// Z2 and P = b10 v^10 + b12 v^12 + b15 v^15 as fields.
pub fn degenerate_fields(a5: f64, a8: f64, b10: f64, b12: f64, b15: f64) -> (FrameField<f64>, FrameField<f64>) {
    let w = HopfPerturbation::degenerate_block(a5, a8, b10, b12, b15);
    (w.z2(), w.p32())
}

/// C = R - grad G for arbitrary (b10, b12, b15), with |C|^2.
pub fn correction_field_with(a5: f64, a8: f64, b10: f64, b12: f64, b15: f64) -> (FrameField<f64>, f64) {
    let (z, p) = degenerate_fields(a5, a8, b10, b12, b15);
    let r = remainder_unchecked(&p, &z);
    let g = correction_potential(a5, a8, b10, b12, b15);
    let c = &r - &FrameField::grad(&g);
    let n = c.norm_sq_f64();
    (c, n)
}

/// C at the balanced values of (b10, b12, b15).
pub fn correction_field(a5: f64, a8: f64) -> (FrameField<f64>, f64) {
    let (b10, b12, b15) = balanced_b(a5, a8);
    correction_field_with(a5, a8, b10, b12, b15)
}

/// 6 DF + 3 D^2F + D^3F + D^4F/4 + D^5F/20 + D^6F/120 at B1, which is
/// 6 times the sum of the Taylor coefficients of F(B1 + tW), k = 1..6.
pub fn taylor6_combination(w: &HopfPerturbation, q: QuadratureSpec) -> Result<f64> {
    let f = PathSeries::hopf_line(w).f_series(7, q)?;
    Ok(6.0 * f[2..].iter().sum::<f64>())
}

/// Same combination from finite differences of F.
pub fn taylor6_fd(w: &HopfPerturbation, q: QuadratureSpec) -> Result<f64> {
    let f = w.assemble();
    let mut acc = 0.0;
    let mut fact = 1.0;
    for k in 1..=6 {
        fact *= k as f64;
        acc += super::fd_f_derivative(&f, k, q)? / fact;
    }
    Ok(6.0 * acc)
}

/// Coefficient of eps^6 in 6 F(B1 + eps Z2 + eps^2 P): the part of the
/// sixth-order combination of total weight 6 when a ~ eps, b ~ eps^2.
pub fn weighted_sixth_order(a5: f64, a8: f64, b10: f64, b12: f64, b15: f64, q: QuadratureSpec) -> Result<f64> {
    let z = HopfPerturbation::from_a5_a8(a5, a8);
    let mut pp = HopfPerturbation::zero();
    pp.b[9] = b10;
    pp.b[11] = b12;
    pp.b[14] = b15;
    let path = PathSeries {
        fields: vec![FrameField::basis(0), z.z2(), pp.p32()],
        hform: vec![vec![PI * PI, 0.0, 0.0], vec![0.0, z.helicity(), 0.0], vec![0.0, 0.0, pp.helicity()]],
    };
    let f = path.f_series(7, q)?;
    Ok(6.0 * f[6])
}

/// The closed-form weight-6 polynomial, times E(B1)^{1/3}/H(B1), with the
/// constant of the a-sextic supplied by the caller.
pub fn sixth_order_polynomial(a5: f64, a8: f64, b10: f64, b12: f64, b15: f64, leading: f64) -> f64 {
    let (r3, r7, r21) = (3f64.sqrt(), 7f64.sqrt(), 21f64.sqrt());
    let (p, p2, p3) = (PI, PI * PI, PI.powi(3));
    let a = a5 * a5 + a8 * a8;
    let d = a5 * a5 - a8 * a8;
    let poly = 2304.0 * p2 * r21 * b15 * b10 * (-a5 * a8) - 3888.0 * p3 * r3 * b10 * b10 * b15
        + 1152.0 * p2 * r21 * b15 * b12 * d
        - 3888.0 * p3 * r3 * b15 * b12 * b12
        + 4500.0 * p2 * a * (b12 * b12 + b10 * b10)
        + 2268.0 * p2 * b15 * b15 * a
        - 84.0 * p * r3 * b15 * a * a
        - 168.0 * p * r7 * b12 * d * a
        + 336.0 * p * r7 * b10 * a5 * a8 * a
        + leading * a.powi(3);
    hopf_prefactor() * poly / (6048.0 * PI.powi(4))
}

/// D^6 F(B1)(Z2^6) / (|Z2|^6 E(B1)^{1/3}/H(B1)).
pub fn d6f_z2_coefficient(a5: f64, a8: f64, q: QuadratureSpec) -> Result<f64> {
    let n = a5 * a5 + a8 * a8;
    if n == 0.0 {
        return Err(HopfError::Invalid("Z2 must be nonzero".into()));
    }
    let d6 = super::dF_at_hopf(6, &HopfPerturbation::from_a5_a8(a5, a8), q)?;
    Ok(d6 / (n.powi(3) * hopf_prefactor()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_examples() {
        let z = FrameField::<f64>::zero();
        assert!(remainder_field(&z, &z).unwrap().is_zero());
        let u5 = z2_basis()[0].clone();
        let r = remainder_field(&z, &u5).unwrap();
        let s = u5.b1_component();
        let q = u5.norm_sq_pointwise();
        let c1 = (&(s * s) * s).scale(&-11.25) + (&q * s).scale(&7.5);
        let c2 = q.scale(&-3.0) + (s * s).scale(&7.5);
        let want = &u5.mul_scalar(&c2) + &FrameField::new(c1, SphereScalar::zero(), SphereScalar::zero());
        assert!((&r - &want).max_abs_coeff() < 1e-14);
        let v1 = orthonormal_basis(4).unwrap()[0].clone();
        assert!(remainder_field(&v1, &u5).is_err());
        assert!(remainder_field(&z, &v1).is_err());
    }

    #[test]
    fn exact_remainder_spans() {
        let e3 = crate::atlas::explicit_basis(3).unwrap();
        let e4 = crate::atlas::explicit_basis(4).unwrap();
        let r = remainder_field_exact(&e4.fields[9], &e3.fields[4]).unwrap();
        assert!(r.degree() == Some(3));
        assert!(remainder_field_exact(&e4.fields[0], &e3.fields[4]).is_err());
    }

    #[test]
    fn correction_norm() {
        let (c, n) = correction_field(0.0, 0.0);
        assert!(c.is_zero() || c.max_abs_coeff() == 0.0);
        assert_eq!(n, 0.0);
        for (a5, a8, scale) in [(1.0, 0.0, 1.0), (1.0, 1.0, 8.0), (0.3, -0.7, 0.58f64.powi(3))] {
            let (c, n) = correction_field(a5, a8);
            assert!(c.divergence().max_abs_coeff() < 1e-12);
            assert!((n - correction_norm_coeff() * scale).abs() < 1e-10 * n, "{n}");
        }
    }
}
