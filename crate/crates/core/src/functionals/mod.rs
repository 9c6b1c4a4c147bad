//! The L^{3/2} energy E, helicity H, the functionals F = E^{4/3}/H and
//! R = 1/F, and their derivatives at the Hopf field B1.
//!
//! Derivatives along a polynomial path X(t) = W0 + t W1 + t^2 W2 + ... with
//! |W0| = 1 are computed by power-series arithmetic: pointwise
//! |X|^2 = 1 + O(t) is raised to the 3/4 power term by term, so each Taylor
//! coefficient of E is the integral of a polynomial; H is an exact quadratic
//! form; F follows by series composition.

pub mod eval;
pub mod identities;
pub mod perturbation;
pub mod scan;
pub mod sixth;

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::atlas::default_solver;
use crate::error::{HopfError, Result};
use crate::exact::{ExactScalar, Rational};
use crate::frame::FrameField;
use crate::quadrature::{HopfGrid, QuadratureSpec};
use eval::{dot3, CompiledFamily, CompiledField};
pub use perturbation::{anti_hopf_orthonormal, orthonormal_basis, random_eigenfield, HopfPerturbation, EXTRA_EIGENVALUES};

/// Grid cache keyed by spec; grids are immutable once built.
pub fn grid(spec: QuadratureSpec) -> &'static HopfGrid {
    static DEFAULT: OnceLock<HopfGrid> = OnceLock::new();
    if spec == QuadratureSpec::default() {
        return DEFAULT.get_or_init(|| HopfGrid::new(spec));
    }
    static OTHERS: OnceLock<std::sync::Mutex<Vec<&'static HopfGrid>>> = OnceLock::new();
    let m = OTHERS.get_or_init(Default::default);
    let mut v = m.lock().expect("grid cache lock");
    if let Some(g) = v.iter().find(|g| g.spec == spec) {
        return g;
    }
    let g: &'static HopfGrid = Box::leak(Box::new(HopfGrid::new(spec)));
    v.push(g);
    g
}

/// E(F) = integral of |F|^{3/2}.
pub fn l32_energy(f: &FrameField<f64>, q: QuadratureSpec) -> f64 {
    let c = CompiledField::new(f);
    grid(q).integrate(|x| {
        let v = c.eval(x);
        dot3(&v, &v).powf(0.75)
    })
}

/// DE(F)(Y) = (3/2) integral of |F|^{-1/2} F.Y (zero where F vanishes).
pub fn d_energy(f: &FrameField<f64>, y: &FrameField<f64>, q: QuadratureSpec) -> f64 {
    let fam = CompiledFamily::new(&[f.clone(), y.clone()]);
    1.5 * grid(q).integrate(|x| {
        let v = fam.eval(x);
        let n = dot3(&v[0], &v[0]);
        if n == 0.0 {
            0.0
        } else {
            dot3(&v[0], &v[1]) / n.powf(0.25)
        }
    })
}

/// <curl^{-1} X, Y> through the spectral projectors of the shared solver.
/// Gradient components are ignored.
pub fn helicity_pairing(x: &FrameField<f64>, y: &FrameField<f64>) -> Result<f64> {
    let s = default_solver();
    let mut h = 0.0;
    for mu in s.spectrum() {
        if mu != 0 {
            h += s.project_f64(x, mu)?.inner_f64(y) / mu as f64;
        }
    }
    Ok(h)
}

/// DH(F)(Y) = 2 <curl^{-1} F, Y>, exact.
pub fn d_helicity(f: &FrameField, y: &FrameField) -> Result<ExactScalar> {
    let inv = crate::atlas::curl_inverse(f)?;
    Ok(inv.inner(y).scale(&Rational::from_integer(2.into())))
}

/// D^2 H(F)(Y, Y) = 2 H(Y), independent of F.
pub fn d2_helicity(y: &FrameField) -> Result<ExactScalar> {
    Ok(crate::atlas::helicity(y)?.scale(&Rational::from_integer(2.into())))
}

pub fn d_helicity_f64(f: &FrameField<f64>, y: &FrameField<f64>) -> Result<f64> {
    Ok(2.0 * helicity_pairing(f, y)?)
}

/// F(X) = E(X)^{4/3} / H(X).
#[allow(non_snake_case)]
pub fn big_F(f: &FrameField<f64>, q: QuadratureSpec) -> Result<f64> {
    let h = helicity_pairing(f, f)?;
    if h.abs() <= 1e-14 * f.norm_sq_f64().max(f64::MIN_POSITIVE) {
        return Err(HopfError::ZeroHelicity);
    }
    Ok(l32_energy(f, q).powf(4.0 / 3.0) / h)
}

/// R(X) = H(X) / E(X)^{4/3}.
pub fn rayleigh_r(f: &FrameField<f64>, q: QuadratureSpec) -> Result<f64> {
    Ok(1.0 / big_F(f, q)?)
}

/// E(B1)^{1/3} / H(B1) = (2 pi^2)^{1/3} / pi^2.
pub fn hopf_prefactor() -> f64 {
    (2.0 * PI * PI).cbrt() / (PI * PI)
}

/// Second derivative of R at a first eigenfield Y1 in direction W
/// orthogonal to the eigenvalue-2 space:
/// (2 mu1 H(W) - 2|W|^2 + int (Y1.W)^2 / |Y1|^2) / (mu1 E(Y1)^{4/3}), mu1 = 2.
pub fn second_variation_r(y1: &FrameField<f64>, w: &FrameField<f64>) -> Result<f64> {
    if y1.degree().is_some_and(|d| d > 0) || y1.is_zero() {
        return Err(HopfError::Invalid("first eigenfield must be a nonzero constant combination of B1, B2, B3".into()));
    }
    let c: [f64; 3] = std::array::from_fn(|i| y1.f[i].eval(&[1.0, 0.0, 0.0, 0.0]));
    let y_sq = c.iter().map(|v| v * v).sum::<f64>();
    let wn = w.norm_sq_f64();
    for i in 0..3 {
        let p = FrameField::<f64>::basis(i).inner_f64(w);
        if p.abs() > 1e-10 * wn.sqrt().max(1.0) {
            return Err(HopfError::NotOrthogonal);
        }
    }
    let mu1 = 2.0;
    let h = helicity_pairing(w, w)?;
    let dot = y1.pointwise_dot(w);
    let cross = (&dot * &dot).integrate_f64();
    let energy = 2.0 * PI * PI * y_sq.powf(0.75);
    Ok((2.0 * mu1 * h - 2.0 * wn + cross / y_sq) / (mu1 * energy.powf(4.0 / 3.0)))
}

/// Binomial coefficient C(p, n) for real p.
pub fn binom(p: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (p - j as f64) / (j + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Integrals of s^i q^j over S^3 with s = B1.W, q = |W|^2, for i + 2j <= k.
/// The integrands are polynomials of degree at most k times the coefficient
/// degree of W; the grid is exact for them when that is below its budget.
fn hopf_moments(w: &FrameField<f64>, k: usize, q: QuadratureSpec) -> Vec<Vec<f64>> {
    let c = CompiledField::new(w);
    let pairs: Vec<(usize, usize)> = (0..=k).flat_map(|i| (0..=(k - i) / 2).map(move |j| (i, j))).collect();
    let vals = grid(q).integrate_many(pairs.len(), |x, out| {
        let v = c.eval(x);
        let s = v[0];
        let qq = dot3(&v, &v);
        for (o, (i, j)) in out.iter_mut().zip(&pairs) {
            *o = s.powi(*i as i32) * qq.powi(*j as i32);
        }
    });
    let mut m = vec![vec![0.0; k / 2 + 1]; k + 1];
    for ((i, j), v) in pairs.iter().zip(vals) {
        m[*i][*j] = v;
    }
    m
}

/// D^k E(B1)(W, ..., W) from the binomial expansion of
/// |B1 + tW|^{3/2} = (1 + 2ts + t^2 q)^{3/4}:
/// k! sum_{i+2j=k} C(3/4, i+j) (i+j)!/(i! j!) 2^i int s^i q^j.
pub fn d_energy_at_hopf(k: usize, w: &FrameField<f64>, q: QuadratureSpec) -> f64 {
    let m = hopf_moments(w, k, q);
    let mut acc = 0.0;
    for j in 0..=k / 2 {
        let i = k - 2 * j;
        let n = i + j;
        acc += binom(0.75, n) * factorial(n) / (factorial(i) * factorial(j)) * 2f64.powi(i as i32) * m[i][j];
    }
    factorial(k) * acc
}

/// [`d_energy_at_hopf`] for an assembled perturbation.
#[allow(non_snake_case)]
pub fn dE_at_hopf(k: usize, w: &HopfPerturbation, q: QuadratureSpec) -> Result<f64> {
    if !(1..=6).contains(&k) {
        return Err(HopfError::Invalid(format!("derivative order {k} outside 1..=6")));
    }
    Ok(d_energy_at_hopf(k, &w.assemble(), q))
}

/// Power series a^p truncated at `a.len()` terms; requires a[0] > 0.
pub fn series_pow(a: &[f64], p: f64) -> Vec<f64> {
    let n = a.len();
    let mut y = vec![0.0; n];
    if n == 0 {
        return y;
    }
    y[0] = a[0].powf(p);
    for k in 1..n {
        let mut s = 0.0;
        for j in 1..=k {
            s += (p * j as f64 - (k - j) as f64) * a[j] * y[k - j];
        }
        y[k] = s / (k as f64 * a[0]);
    }
    y
}

/// Power series quotient a / b; requires b[0] != 0.
pub fn series_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut f = vec![0.0; n];
    for k in 0..n {
        let mut s = a[k];
        for j in 1..=k.min(b.len() - 1) {
            s -= b[j] * f[k - j];
        }
        f[k] = s / b[0];
    }
    f
}

/// A polynomial path X(t) = sum_k t^k W_k with unit-norm W_0 (B1 in all
/// uses here), together with its helicity form.
pub struct PathSeries {
    fields: Vec<FrameField<f64>>,
    /// <curl^{-1} W_i, W_j>.
    hform: Vec<Vec<f64>>,
}

impl PathSeries {
    /// Helicity form from the solver's projectors.
    pub fn new(fields: Vec<FrameField<f64>>) -> Result<Self> {
        let n = fields.len();
        let mut hform = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let h = helicity_pairing(&fields[i], &fields[j])?;
                hform[i][j] = h;
                hform[j][i] = h;
            }
        }
        Ok(PathSeries { fields, hform })
    }

    /// B1 + tW for a perturbation with known eigen-components; the helicity
    /// form is read off the components.
    pub fn hopf_line(w: &HopfPerturbation) -> Self {
        let hform = vec![vec![PI * PI, 0.0], vec![0.0, w.helicity()]];
        PathSeries { fields: vec![FrameField::basis(0), w.assemble()], hform }
    }

    /// Taylor coefficients [t^k] E(X(t)) for k < n.
    pub fn energy_series(&self, n: usize, q: QuadratureSpec) -> Result<Vec<f64>> {
        let fam = CompiledFamily::new(&self.fields);
        let m = self.fields.len();
        let g = grid(q);
        g.try_integrate_many(n, |x, out| {
            let v = fam.eval(x);
            let mut c = vec![0.0; n];
            for i in 0..m {
                for j in 0..m {
                    if i + j < n {
                        c[i + j] += dot3(&v[i], &v[j]);
                    }
                }
            }
            if c[0] <= 0.0 {
                return Err(HopfError::VanishingField);
            }
            out.copy_from_slice(&series_pow(&c, 0.75));
            Ok(())
        })
    }

    /// Taylor coefficients of H(X(t)).
    pub fn helicity_series(&self, n: usize) -> Vec<f64> {
        let mut h = vec![0.0; n];
        for (i, row) in self.hform.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i + j < n {
                    h[i + j] += v;
                }
            }
        }
        h
    }

    /// Taylor coefficients of F(X(t)) = E^{4/3}/H.
    pub fn f_series(&self, n: usize, q: QuadratureSpec) -> Result<Vec<f64>> {
        let e = self.energy_series(n, q)?;
        let h = self.helicity_series(n);
        if h[0] == 0.0 {
            return Err(HopfError::ZeroHelicity);
        }
        Ok(series_div(&series_pow(&e, 4.0 / 3.0), &h))
    }
}

/// D^k F(B1)(W, ..., W) = k! [t^k] F(B1 + tW).
#[allow(non_snake_case)]
pub fn dF_at_hopf(k: usize, w: &HopfPerturbation, q: QuadratureSpec) -> Result<f64> {
    if !(1..=6).contains(&k) {
        return Err(HopfError::Invalid(format!("derivative order {k} outside 1..=6")));
    }
    if k == 1 {
        // DE(B1)(W) = (3/2)<B1, W> and DH(B1)(W) = <B1, W> cancel in F.
        return Ok(0.0);
    }
    let f = PathSeries::hopf_line(w).f_series(k + 1, q)?;
    Ok(factorial(k) * f[k])
}

/// All of D^1 F .. D^6 F at once.
#[allow(non_snake_case)]
pub fn dF_all(w: &HopfPerturbation, q: QuadratureSpec) -> Result<[f64; 6]> {
    let f = PathSeries::hopf_line(w).f_series(7, q)?;
    let mut out = [0.0; 6];
    for k in 2..=6 {
        out[k - 1] = factorial(k) * f[k];
    }
    Ok(out)
}

/// Base step for the order-k difference of a unit-norm direction; large
/// enough that the h^2 error, removed by one Richardson step, dominates
/// quadrature roundoff.
pub fn fd_step(k: usize) -> f64 {
    const STEPS: [f64; 6] = [1e-3, 3e-3, 1e-2, 2e-2, 3e-2, 4e-2];
    STEPS[k.clamp(1, 6) - 1]
}

/// k-th central difference of g at 0 with step h; g(0) is taken as 0, so
/// callers pass increments g(t) - g(0) to avoid cancellation.
pub fn central_difference(g: impl Fn(f64) -> f64, k: usize, h: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..=k {
        let c = binom(k as f64, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        let t = (k as f64 / 2.0 - j as f64) * h;
        if t != 0.0 {
            acc += c * g(t);
        }
    }
    acc / h.powi(k as i32)
}

/// Central difference at steps h and h/2 combined to cancel the h^2 term.
pub fn richardson_difference(g: impl Fn(f64) -> f64, k: usize, h: f64) -> f64 {
    let coarse = central_difference(&g, k, h);
    let fine = central_difference(&g, k, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

fn scaled_step(w: &FrameField<f64>, k: usize) -> f64 {
    let n = w.norm_sq_f64().sqrt();
    fd_step(k) / if n > 0.0 { n } else { 1.0 }
}

/// E(B1 + tW) - E(B1), accumulated pointwise as |B1|^{3/2} expm1(...) to
/// keep the relative precision of small increments.
pub fn energy_increment(base: &FrameField<f64>, w: &FrameField<f64>, t: f64, q: QuadratureSpec) -> f64 {
    let fam = CompiledFamily::new(&[base.clone(), w.clone()]);
    grid(q).integrate(|x| {
        let v = fam.eval(x);
        let a = dot3(&v[0], &v[0]);
        let d = t * (2.0 * dot3(&v[0], &v[1]) + t * dot3(&v[1], &v[1]));
        if a == 0.0 {
            return d.max(0.0).powf(0.75);
        }
        a.powf(0.75) * (0.75 * (d / a).ln_1p()).exp_m1()
    })
}

/// Finite-difference D^k E(B1)(W^k).
pub fn fd_energy_derivative(w: &FrameField<f64>, k: usize, q: QuadratureSpec) -> f64 {
    let b1 = FrameField::basis(0);
    richardson_difference(|t| energy_increment(&b1, w, t, q), k, scaled_step(w, k))
}

/// Finite-difference D^k F(B1)(W^k); E by quadrature, H through the
/// solver's projectors.
pub fn fd_f_derivative(w: &FrameField<f64>, k: usize, q: QuadratureSpec) -> Result<f64> {
    let b1 = FrameField::<f64>::basis(0);
    let e0 = 2.0 * PI * PI;
    let h0 = helicity_pairing(&b1, &b1)?;
    let hb = helicity_pairing(&b1, w)?;
    let hw = helicity_pairing(w, w)?;
    let f0 = e0.powf(4.0 / 3.0) / h0;
    let inc = |t: f64| {
        let de = energy_increment(&b1, w, t, q);
        let dh = 2.0 * t * hb + t * t * hw;
        f0 * ((4.0 / 3.0) * (de / e0).ln_1p() - (dh / h0).ln_1p()).exp_m1()
    };
    Ok(richardson_difference(inc, k, scaled_step(w, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::explicit_basis;

    fn unit(mu: i64, i: usize) -> FrameField<f64> {
        orthonormal_basis(mu).unwrap()[i].clone()
    }

    #[test]
    fn hopf_energy_and_homogeneity() {
        let q = QuadratureSpec::default();
        let b1 = FrameField::<f64>::basis(0);
        let e = l32_energy(&b1, q);
        assert!((e - 2.0 * PI * PI).abs() < 1e-12 * e);
        let e2 = l32_energy(&b1.scale(&2.0), q);
        assert!((e2 - 2f64.powf(1.5) * e).abs() < 1e-12 * e2);
        let u1 = orthonormal_basis(3).unwrap()[0].clone();
        let eu = l32_energy(&u1, q);
        // |u1|^3 has an endpoint singularity in the radial variable.
        assert!((eu - 8.0 * PI.sqrt() / 7.0).abs() < 1e-5, "{eu}");
    }

    #[test]
    fn energy_derivative_examples() {
        let q = QuadratureSpec::default();
        let b1 = FrameField::<f64>::basis(0);
        assert!(d_energy(&b1, &unit(3, 4), q).abs() < 1e-13);
        assert!((d_energy(&b1, &b1, q) - 3.0 * PI * PI).abs() < 1e-11);
        let u1 = unit(3, 0);
        assert!((d_energy(&u1, &u1, q) - 1.5 * l32_energy(&u1, q)).abs() < 1e-11);
    }

    #[test]
    fn closed_form_examples() {
        let q = QuadratureSpec::default();
        let v1 = unit(4, 0);
        assert!((d_energy_at_hopf(2, &v1, q) - 1.5).abs() < 1e-12);
        let u5 = unit(3, 4);
        assert!(d_energy_at_hopf(3, &u5, q).abs() < 1e-13);
        let p2 = PI * PI;
        let want = 3.0 / 16.0 * (-12.0 * 2.0 / (3.0 * p2) + 60.0 * 14.0 / (27.0 * p2) - 45.0 * 4.0 / (9.0 * p2));
        assert!((d_energy_at_hopf(4, &u5, q) - want).abs() < 1e-12);
    }

    #[test]
    fn series_agrees_with_closed_form() {
        let q = QuadratureSpec::default();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let w = HopfPerturbation::random(&mut rng, 0.5, false);
        let path = PathSeries::hopf_line(&w);
        let e = path.energy_series(7, q).unwrap();
        let f = w.assemble();
        for k in 1..=6 {
            let a = factorial(k) * e[k];
            let b = d_energy_at_hopf(k, &f, q);
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn f_derivative_examples() {
        let q = QuadratureSpec::default();
        let pref = hopf_prefactor();
        let z2 = HopfPerturbation::from_a5_a8(1.0, 0.0);
        assert!(dF_at_hopf(2, &z2, q).unwrap().abs() < 1e-12);
        let mut z1 = HopfPerturbation::zero();
        z1.a[0] = 1.0;
        assert!((dF_at_hopf(2, &z1, q).unwrap() - pref * 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(dF_at_hopf(1, &z1, q).unwrap(), 0.0);
    }

    #[test]
    fn f_and_r_at_hopf() {
        let q = QuadratureSpec::default();
        let b1 = FrameField::<f64>::basis(0);
        let f = big_F(&b1, q).unwrap();
        let want = (2.0 * PI * PI).powf(4.0 / 3.0) / (PI * PI);
        assert!((f - want).abs() < 1e-12 * want);
        assert!((rayleigh_r(&b1, q).unwrap() - 1.0 / want).abs() < 1e-12 / want);
        let b2 = FrameField::<f64>::basis(1);
        assert!((big_F(&b2, q).unwrap() - f).abs() < 1e-12 * f);
        assert!((big_F(&b1.scale(&3.0), q).unwrap() - f).abs() < 1e-12 * f);
        assert!(matches!(big_F(&unit(3, 0).scale(&0.0), q), Err(HopfError::ZeroHelicity)));
    }

    #[test]
    fn second_variation_examples() {
        let b1 = FrameField::<f64>::basis(0);
        let d = 2.0 * (2.0 * PI * PI).powf(4.0 / 3.0);
        assert!(second_variation_r(&b1, &unit(3, 4)).unwrap().abs() < 1e-13);
        assert!((second_variation_r(&b1, &unit(4, 0)).unwrap() + 1.0 / d).abs() < 1e-13);
        let bh = &anti_hopf_orthonormal()[0];
        assert!((second_variation_r(&b1, bh).unwrap() + 11.0 / 3.0 / d).abs() < 1e-13);
        assert!(second_variation_r(&b1, &b1).is_err());
    }

    #[test]
    fn helicity_derivatives_exact() {
        let b1 = FrameField::basis(0);
        assert_eq!(d_helicity(&b1, &b1).unwrap(), ExactScalar::pi_pow(Rational::from_integer(2.into()), 2));
        let u5 = explicit_basis(3).unwrap().fields[4].clone();
        assert!(d_helicity(&b1, &u5).unwrap().is_zero());
        // v1 has squared norm (2/3) pi^2: 2 H(v1) / |v1|^2 = 2 / 4
        let v1 = explicit_basis(4).unwrap().fields[0].clone();
        let r = d2_helicity(&v1).unwrap().coeff(2) / v1.norm_sq_coeff();
        assert_eq!(r, crate::exact::ratio(1, 2));
    }

    #[test]
    fn series_helpers() {
        let y = series_pow(&[4.0, 1.0, 0.0], 0.5);
        assert!((y[0] - 2.0).abs() < 1e-15 && (y[1] - 0.25).abs() < 1e-15 && (y[2] + 1.0 / 64.0).abs() < 1e-15);
        let f = series_div(&[1.0, 0.0, 0.0], &[1.0, -1.0]);
        assert_eq!(f, vec![1.0, 1.0, 1.0]);
    }
}
