//! The metrics (dphi1^2 + dphi2^2)/n + n^2 dt^2 on T^2 x (0, 2 pi), their
//! closed-form curl spectrum and first eigenfields, and the bound
//! constants compared against them.

use std::f64::consts::PI;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{HopfError, Result};
use crate::exact::{int, ratio, rational_to_f64, ExactScalar, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusMetric {
    pub n: u32,
    /// Diagonal coefficients in (phi1, phi2, t).
    pub coefficients: [String; 3],
    pub determinant: String,
    pub volume: f64,
    #[serde(skip)]
    pub exact: [Rational; 3],
}

pub fn metric(n: u32) -> Result<AnnulusMetric> {
    if n == 0 {
        return Err(HopfError::Invalid("n must be at least 1".into()));
    }
    let ni = n as i64;
    let exact = [ratio(1, ni), ratio(1, ni), int(ni * ni)];
    let det = &exact[0] * &exact[1] * &exact[2];
    // sqrt(det) = 1 times the coordinate volume (2 pi)^3
    let volume = rational_to_f64(&det).sqrt() * (2.0 * PI).powi(3);
    Ok(AnnulusMetric {
        n,
        coefficients: exact.clone().map(|r| r.to_string()),
        determinant: det.to_string(),
        volume,
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeStatus {
    /// The m1 = m2 = 0 family, whose eigenfields are known in closed form.
    Confirmed,
    /// Satisfies the necessary condition only.
    Candidate,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusMode {
    pub n: u32,
    pub m1: u32,
    pub m2: u32,
    pub m: u32,
    /// Sign of lambda.
    pub branch: i8,
    /// lambda^2 = n m1^2 + n m2^2 + m^2 / (4 n^2), exact.
    pub lambda_sq: String,
    pub lambda: f64,
    pub status: ModeStatus,
    #[serde(skip)]
    pub lambda_sq_exact: Rational,
}

fn lambda_sq(n: u32, m1: u32, m2: u32, m: u32) -> Rational {
    let n = n as i64;
    int(n * (m1 as i64).pow(2) + n * (m2 as i64).pow(2)) + ratio((m as i64).pow(2), 4 * n * n)
}

/// Exact square root of a rational when it is a perfect square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (p, q) = (r.numer().sqrt(), r.denom().sqrt());
    (&p * &p == *r.numer() && &q * &q == *r.denom()).then(|| Rational::new(p, q))
}

/// Modes with 0 < |lambda| <= cutoff, both branches, sorted by |lambda|
/// then branch. Only even m enter the m1 = m2 = 0 family.
pub fn spectrum_candidates(n: u32, cutoff: f64) -> Result<Vec<AnnulusMode>> {
    if n == 0 {
        return Err(HopfError::Invalid("n must be at least 1".into()));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(HopfError::Invalid(format!("cutoff {cutoff} must be positive")));
    }
    let c2 = cutoff * cutoff;
    let nf = n as f64;
    let m1max = (c2 / nf).sqrt().floor() as u32;
    let mmax = (2.0 * nf * cutoff).floor() as u32;
    let mut out = Vec::new();
    for m1 in 0..=m1max {
        for m2 in 0..=m1max {
            for m in 0..=mmax {
                if m1 == 0 && m2 == 0 && (m == 0 || m % 2 == 1) {
                    continue;
                }
                let l2 = lambda_sq(n, m1, m2, m);
                let lf = rational_to_f64(&l2);
                if lf > c2 * (1.0 + 1e-15) {
                    continue;
                }
                let status = if m1 == 0 && m2 == 0 { ModeStatus::Confirmed } else { ModeStatus::Candidate };
                for branch in [1i8, -1] {
                    out.push(AnnulusMode {
                        n,
                        m1,
                        m2,
                        m,
                        branch,
                        lambda_sq: l2.to_string(),
                        lambda: branch as f64 * lf.sqrt(),
                        status,
                        lambda_sq_exact: l2.clone(),
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| a.lambda_sq_exact.cmp(&b.lambda_sq_exact).then(b.branch.cmp(&a.branch)));
    Ok(out)
}

/// Smallest positive eigenvalue, exact: 1/n from (0, 0, 2).
pub fn mu1(n: u32) -> Result<Rational> {
    let modes = spectrum_candidates(n, 1.0 / n as f64 + 1e-9)?;
    let first = modes.iter().find(|m| m.branch > 0).ok_or_else(|| HopfError::NoPositiveEigenvalue(format!("n = {n}")))?;
    rational_sqrt(&first.lambda_sq_exact)
        .ok_or_else(|| HopfError::Invalid(format!("lambda^2 = {} is not a square", first.lambda_sq_exact)))
}

/// a sin t + b cos t.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigT {
    #[serde(serialize_with = "as_string")]
    pub sin: Rational,
    #[serde(serialize_with = "as_string")]
    pub cos: Rational,
}

fn as_string<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

impl TrigT {
    fn new(s: i64, c: i64) -> Self {
        TrigT { sin: int(s), cos: int(c) }
    }

    fn derivative(&self) -> Self {
        TrigT { sin: -self.cos.clone(), cos: self.sin.clone() }
    }

    fn scale(&self, r: &Rational) -> Self {
        TrigT { sin: &self.sin * r, cos: &self.cos * r }
    }

    pub fn eval(&self, t: f64) -> f64 {
        rational_to_f64(&self.sin) * t.sin() + rational_to_f64(&self.cos) * t.cos()
    }

    fn is_zero(&self) -> bool {
        self.sin.is_zero() && self.cos.is_zero()
    }
}

/// A t-dependent vector field V^1 d/dphi1 + V^2 d/dphi2 + V^3 d/dt.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusField {
    pub components: [TrigT; 3],
}

impl AnnulusField {
    /// curl^i = eps^{ijk} d_j (g_kk V^k) / sqrt(det g); only d_t survives.
    pub fn curl(&self, m: &AnnulusMetric) -> Self {
        let lower: Vec<TrigT> = (0..3).map(|k| self.components[k].scale(&m.exact[k])).collect();
        let zero = TrigT::new(0, 0);
        AnnulusField { components: [lower[1].derivative().scale(&int(-1)), lower[0].derivative(), zero] }
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        std::array::from_fn(|i| self.components[i].eval(t))
    }

    fn scale(&self, r: &Rational) -> Self {
        AnnulusField { components: self.components.clone().map(|c| c.scale(r)) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstEigenfields {
    pub n: u32,
    pub lambda: String,
    pub fields: [AnnulusField; 2],
    /// curl v = lambda v exactly for both fields.
    pub eigen_equation: bool,
    /// No d/dt component, so both are tangent to t = 0 and t = 2 pi.
    pub tangent: bool,
    /// Zero period integrals, hence L2-orthogonal to d/dphi1, d/dphi2.
    pub orthogonal_to_harmonic: bool,
}

/// v1 = sin t d/dphi1 + cos t d/dphi2, v2 = cos t d/dphi1 - sin t d/dphi2.
pub fn first_eigenfields(n: u32) -> Result<FirstEigenfields> {
    let g = metric(n)?;
    let lambda = mu1(n)?;
    let v1 = AnnulusField { components: [TrigT::new(1, 0), TrigT::new(0, 1), TrigT::new(0, 0)] };
    let v2 = AnnulusField { components: [TrigT::new(0, 1), TrigT::new(-1, 0), TrigT::new(0, 0)] };
    let eigen_equation = [&v1, &v2].iter().all(|v| v.curl(&g) == v.scale(&lambda));
    let tangent = [&v1, &v2].iter().all(|v| v.components[2].is_zero());
    // only sin t and cos t terms: no constant part
    let orthogonal_to_harmonic = true;
    Ok(FirstEigenfields {
        n,
        lambda: lambda.to_string(),
        fields: [v1, v2],
        eigen_equation,
        tangent,
        orthogonal_to_harmonic,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundConstant {
    pub name: &'static str,
    pub expression: &'static str,
    /// The constant cubed, exactly.
    pub cube: String,
    pub value: f64,
}

fn bound(name: &'static str, expression: &'static str, cube: ExactScalar, direct: f64) -> BoundConstant {
    let value = cube.to_f64().cbrt();
    debug_assert!((value - direct).abs() < 1e-12 * direct);
    BoundConstant { name, expression, cube: cube.to_report_string(), value }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundConstants {
    /// Lower bound for Euclidean domains, 2 (2 pi^2)^{1/3}.
    pub euclidean_new: BoundConstant,
    /// The earlier bound (4 pi / 3)^{1/3}.
    pub euclidean_old: BoundConstant,
    /// Conformal-class constant on S^3, (16/pi)^{1/3}.
    pub sphere_conformal: BoundConstant,
    pub improvement: bool,
}

pub fn bound_constants() -> BoundConstants {
    let new = bound(
        "euclidean_new",
        "2 * (2 * pi^2)^(1/3)",
        ExactScalar::pi_pow(int(16), 2),
        2.0 * (2.0 * PI * PI).cbrt(),
    );
    let old = bound("euclidean_old", "(4 * pi / 3)^(1/3)", ExactScalar::pi_pow(ratio(4, 3), 1), (4.0 * PI / 3.0).cbrt());
    let sphere = bound("sphere_conformal", "(16 / pi)^(1/3)", ExactScalar::pi_pow(int(16), -1), (16.0 / PI).cbrt());
    let improvement = new.value > old.value;
    BoundConstants { euclidean_new: new, euclidean_old: old, sphere_conformal: sphere, improvement }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusRow {
    pub n: u32,
    pub mu1: String,
    pub mu1_value: f64,
    pub volume: f64,
    /// mu1 Vol^{1/3}, tending to zero.
    pub normalized: f64,
    pub modes: Vec<AnnulusMode>,
}

/// Rows for n = 1..=n_max with modes up to `cutoff`.
pub fn annulus_table(n_max: u32, cutoff: f64) -> Result<Vec<AnnulusRow>> {
    (1..=n_max)
        .map(|n| {
            let mu = mu1(n)?;
            let g = metric(n)?;
            let v = rational_to_f64(&mu);
            Ok(AnnulusRow {
                n,
                mu1: mu.to_string(),
                mu1_value: v,
                volume: g.volume,
                normalized: v * g.volume.cbrt(),
                modes: spectrum_candidates(n, cutoff)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_have_unit_determinant() {
        for n in 1..=10 {
            let g = metric(n).unwrap();
            assert_eq!(g.determinant, "1");
            assert!((g.volume - (2.0 * PI).powi(3)).abs() < 1e-12);
        }
        assert_eq!(metric(1).unwrap().coefficients, ["1", "1", "1"].map(String::from));
        assert!(metric(0).is_err());
    }

    #[test]
    fn first_eigenvalue_is_one_over_n() {
        for n in 1..=10 {
            assert_eq!(mu1(n).unwrap(), ratio(1, n as i64));
        }
        let c = spectrum_candidates(3, 1.0).unwrap();
        assert_eq!((c[0].m1, c[0].m2, c[0].m, c[0].branch), (0, 0, 2, 1));
        assert!(spectrum_candidates(1, 1.01).unwrap().iter().any(|m| m.m == 2 && (m.lambda - 1.0).abs() < 1e-15));
        assert!(spectrum_candidates(2, 0.4).unwrap().is_empty());
    }

    #[test]
    fn horizontal_modes_are_large() {
        for n in 1..=10 {
            for m in spectrum_candidates(n, 3.0).unwrap() {
                if m.m1 + m.m2 > 0 {
                    assert!(m.lambda_sq_exact >= int(1));
                }
            }
        }
    }

    #[test]
    fn eigenfields() {
        for n in 1..=4 {
            let e = first_eigenfields(n).unwrap();
            assert!(e.eigen_equation && e.tangent && e.orthogonal_to_harmonic);
        }
        let e = first_eigenfields(1).unwrap();
        assert_eq!(e.fields[0].eval(0.0), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn bounds() {
        let b = bound_constants();
        assert!(b.improvement);
        assert!((b.euclidean_new.value - 5.40513538012698).abs() < 1e-12);
        assert!((b.euclidean_old.value - 1.6119919540164696).abs() < 1e-12);
        assert!((b.sphere_conformal.value - 1.7205080276561993).abs() < 1e-12);
    }
}
