//! Fourier fields on the flat torus [0, 2 pi)^3: ABC flows, the
//! constant-speed test, first variations and a conformal Galerkin pencil
//! on the Beltrami and gradient modes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HopfError, Result};

pub type Wavevector = [i32; 3];

const I: Complex64 = Complex64::new(0.0, 1.0);
/// Relative size below which a Fourier coefficient counts as zero.
const COEFF_TOL: f64 = 1e-14;

pub fn volume() -> f64 {
    (2.0 * PI).powi(3)
}

fn norm_sq(k: &Wavevector) -> i32 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

fn neg(k: &Wavevector) -> Wavevector {
    [-k[0], -k[1], -k[2]]
}

fn add(a: &Wavevector, b: &Wavevector) -> Wavevector {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// A trigonometric polynomial sum c_k exp(i k.x).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TorusScalar {
    pub modes: BTreeMap<Wavevector, Complex64>,
}

impl TorusScalar {
    pub fn constant(c: f64) -> Self {
        let mut s = Self::default();
        s.add_mode([0, 0, 0], Complex64::new(c, 0.0));
        s
    }

    pub fn add_mode(&mut self, k: Wavevector, c: Complex64) {
        *self.modes.entry(k).or_default() += c;
    }

    /// c cos(k.x).
    pub fn cos(k: Wavevector, c: f64) -> Self {
        let mut s = Self::default();
        s.add_mode(k, Complex64::new(c / 2.0, 0.0));
        s.add_mode(neg(&k), Complex64::new(c / 2.0, 0.0));
        s.prune()
    }

    /// c sin(k.x).
    pub fn sin(k: Wavevector, c: f64) -> Self {
        let mut s = Self::default();
        s.add_mode(k, Complex64::new(0.0, -c / 2.0));
        s.add_mode(neg(&k), Complex64::new(0.0, c / 2.0));
        s.prune()
    }

    /// sin x sin y sin z.
    pub fn sin_product() -> Self {
        let sx = Self::sin([1, 0, 0], 1.0);
        let sy = Self::sin([0, 1, 0], 1.0);
        let sz = Self::sin([0, 0, 1], 1.0);
        sx.mul(&sy).mul(&sz)
    }

    fn scale_ref(&self) -> f64 {
        self.modes.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients below COEFF_TOL relative to the largest.
    pub fn prune(mut self) -> Self {
        let s = self.scale_ref();
        self.modes.retain(|_, c| c.norm() > COEFF_TOL * s);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.modes {
            out.add_mode(*k, *c);
        }
        out.prune()
    }

    pub fn scale(&self, c: f64) -> Self {
        TorusScalar { modes: self.modes.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (k, a) in &self.modes {
            for (l, b) in &other.modes {
                out.add_mode(add(k, l), a * b);
            }
        }
        out.prune()
    }

    pub fn mean(&self) -> Complex64 {
        self.modes.get(&[0, 0, 0]).copied().unwrap_or_default()
    }

    pub fn coeff(&self, k: &Wavevector) -> Complex64 {
        self.modes.get(k).copied().unwrap_or_default()
    }

    pub fn is_real(&self) -> bool {
        let s = self.scale_ref().max(1.0);
        self.modes.iter().all(|(k, c)| (self.coeff(&neg(k)) - c.conj()).norm() <= COEFF_TOL * s)
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.modes
            .iter()
            .map(|(k, c)| (c * Complex64::from_polar(1.0, k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2])).re)
            .sum()
    }

    /// Integral over the torus.
    pub fn integrate(&self) -> f64 {
        self.mean().re * volume()
    }

    /// Minimum over a uniform n^3 grid.
    pub fn grid_min(&self, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        let mut m = f64::INFINITY;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    m = m.min(self.eval(&[a as f64 * h, b as f64 * h, c as f64 * h]));
                }
            }
        }
        m
    }
}

/// A vector field sum a_k exp(i k.x), a_k in C^3.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TorusField {
    pub modes: BTreeMap<Wavevector, [Complex64; 3]>,
}

impl TorusField {
    pub fn add_mode(&mut self, k: Wavevector, a: [Complex64; 3]) {
        let e = self.modes.entry(k).or_default();
        for c in 0..3 {
            e[c] += a[c];
        }
    }

    fn from_components(c: [TorusScalar; 3]) -> Self {
        let mut f = Self::default();
        for (i, s) in c.iter().enumerate() {
            for (k, v) in &s.modes {
                let mut a = [Complex64::default(); 3];
                a[i] = *v;
                f.add_mode(*k, a);
            }
        }
        f.prune()
    }

    pub fn component(&self, i: usize) -> TorusScalar {
        TorusScalar { modes: self.modes.iter().map(|(k, a)| (*k, a[i])).collect() }.prune()
    }

    fn prune(mut self) -> Self {
        let s = self.modes.values().flat_map(|a| a.iter().map(|c| c.norm())).fold(0.0, f64::max);
        self.modes.retain(|_, a| a.iter().any(|c| c.norm() > COEFF_TOL * s));
        self
    }

    /// Curl acts on each mode as i k x a.
    pub fn curl(&self) -> Self {
        let mut out = Self::default();
        for (k, a) in &self.modes {
            let kf = k.map(|v| Complex64::new(v as f64, 0.0));
            let cross = [kf[1] * a[2] - kf[2] * a[1], kf[2] * a[0] - kf[0] * a[2], kf[0] * a[1] - kf[1] * a[0]];
            out.add_mode(*k, cross.map(|c| I * c));
        }
        out.prune()
    }

    /// - Laplacian acts on each mode as |k|^2.
    pub fn neg_laplacian(&self) -> Self {
        TorusField { modes: self.modes.iter().map(|(k, a)| (*k, a.map(|c| c * norm_sq(k) as f64))).collect() }.prune()
    }

    pub fn is_divergence_free(&self) -> bool {
        let s = self.modes.values().flat_map(|a| a.iter().map(|c| c.norm())).fold(0.0, f64::max).max(1.0);
        self.modes.iter().all(|(k, a)| {
            (a[0] * k[0] as f64 + a[1] * k[1] as f64 + a[2] * k[2] as f64).norm() <= COEFF_TOL * s
        })
    }

    pub fn is_real(&self) -> bool {
        (0..3).all(|i| self.component(i).is_real())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let keys: std::collections::BTreeSet<_> = self.modes.keys().chain(other.modes.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.modes.get(k).copied().unwrap_or_default();
            let b = other.modes.get(k).copied().unwrap_or_default();
            (0..3).all(|i| (a[i] - b[i]).norm() <= tol)
        })
    }

    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.component(i).eval(x))
    }

    /// |F|^2 as a trigonometric polynomial.
    pub fn speed_sq(&self) -> TorusScalar {
        let mut s = TorusScalar::default();
        for i in 0..3 {
            let c = self.component(i);
            s = s.add(&c.mul(&c));
        }
        s
    }
}

/// (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x).
pub fn abc_field(a: f64, b: f64, c: f64) -> TorusField {
    let (x, y, z) = ([1, 0, 0], [0, 1, 0], [0, 0, 1]);
    TorusField::from_components([
        TorusScalar::sin(z, a).add(&TorusScalar::cos(y, c)),
        TorusScalar::sin(x, b).add(&TorusScalar::cos(z, a)),
        TorusScalar::sin(y, c).add(&TorusScalar::cos(x, b)),
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedCheck {
    pub constant: bool,
    /// Largest nonconstant mode of |F|^2 and its coefficient (re, im).
    pub witness: Option<(Wavevector, [f64; 2])>,
}

pub fn speed_is_constant(f: &TorusField) -> SpeedCheck {
    let s = f.speed_sq();
    let witness = s
        .modes
        .iter()
        .filter(|(k, _)| **k != [0, 0, 0])
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(b.0.cmp(a.0)))
        .map(|(k, c)| (*k, [c.re, c.im]));
    SpeedCheck { constant: witness.is_none(), witness }
}

/// int phidot |u|^2 over the torus, by Fourier orthogonality.
pub fn first_variation(u: &TorusField, phidot: &TorusScalar) -> Result<f64> {
    let scale = phidot.modes.values().map(|c| c.norm()).fold(1.0, f64::max);
    if phidot.mean().norm() > COEFF_TOL * scale {
        return Err(HopfError::NotMeanZero);
    }
    let s = u.speed_sq();
    let sum: Complex64 = phidot.modes.iter().map(|(k, c)| c * s.coeff(&neg(k))).sum();
    Ok(sum.re * volume())
}

/// Wavevectors with 0 < |k| <= kmax.
fn wavevectors(kmax: u32) -> Vec<Wavevector> {
    let r = kmax as i32;
    let mut v = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let k = [a, b, c];
                let n = norm_sq(&k);
                if n > 0 && n <= r * r {
                    v.push(k);
                }
            }
        }
    }
    v
}

/// Unit polarizations of exp(i k.x): (h, curl eigenvalue) for the two
/// helical modes and the gradient mode.
fn polarizations(k: &Wavevector) -> [([Complex64; 3], f64); 3] {
    let kf = k.map(|v| v as f64);
    let len = (norm_sq(k) as f64).sqrt();
    let kh = kf.map(|v| v / len);
    let seed = if kh[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = seed[0] * kh[0] + seed[1] * kh[1] + seed[2] * kh[2];
    let u0: [f64; 3] = std::array::from_fn(|i| seed[i] - d * kh[i]);
    let nu = (u0[0] * u0[0] + u0[1] * u0[1] + u0[2] * u0[2]).sqrt();
    let u = u0.map(|v| v / nu);
    let v = [kh[1] * u[2] - kh[2] * u[1], kh[2] * u[0] - kh[0] * u[2], kh[0] * u[1] - kh[1] * u[0]];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // i k x (u + i v) = |k| (u + i v) since kh x u = v, kh x v = -u
    let plus = std::array::from_fn(|i| Complex64::new(u[i] * s, v[i] * s));
    let minus = std::array::from_fn(|i| Complex64::new(u[i] * s, -v[i] * s));
    let grad = kh.map(|c| Complex64::new(c, 0.0));
    [(plus, len), (minus, -len), (grad, 0.0)]
}

#[derive(Clone, Debug)]
pub struct TorusMode {
    pub k: Wavevector,
    pub polarization: [Complex64; 3],
    pub eigenvalue: f64,
}

impl TorusMode {
    pub fn field(&self) -> TorusField {
        let mut f = TorusField::default();
        f.add_mode(self.k, self.polarization);
        f
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusPencilReport {
    pub kmax: u32,
    pub t: f64,
    pub dim: usize,
    pub gradient_dim: usize,
    /// Smallest positive eigenvalue at t, and its normalized value.
    pub mu1: f64,
    pub mu1_normalized: f64,
    /// Multiplicity of mu1 = 1 at t = 0.
    pub first_multiplicity: usize,
    /// First-order derivatives of the mu1 group at t = 0, ascending.
    pub derivatives: Vec<f64>,
    /// The same for mu1 Vol^{1/3}.
    pub normalized_derivatives: Vec<f64>,
    pub min_derivative: f64,
}

/// Modes exp(i k.x) h / (2 pi)^{3/2}, orthonormal at t = 0.
pub fn torus_basis(kmax: u32) -> Vec<TorusMode> {
    let mut out = Vec::new();
    for k in wavevectors(kmax) {
        for (h, mu) in polarizations(&k) {
            out.push(TorusMode { k, polarization: h, eigenvalue: mu });
        }
    }
    out
}

/// int q conj(e_i).e_j for unit modes.
fn q_form(q: &TorusScalar, modes: &[TorusMode]) -> DMatrix<Complex64> {
    DMatrix::from_fn(modes.len(), modes.len(), |i, j| {
        let (a, b) = (&modes[i], &modes[j]);
        let c = q.coeff(&add(&a.k, &neg(&b.k)));
        if c == Complex64::default() {
            return c;
        }
        let dot: Complex64 = (0..3).map(|n| a.polarization[n].conj() * b.polarization[n]).sum();
        c * dot
    })
}

/// The pencil A = <curl e_i, e_j>, B = int (1+tq) <e_i, e_j> over all modes
/// with |k| <= kmax, its smallest positive eigenvalue at t, and the
/// degenerate first-order derivatives of the eigenvalue-1 group at t = 0.
pub fn torus_pencil(q: &TorusScalar, t: f64, kmax: u32) -> Result<TorusPencilReport> {
    if kmax == 0 {
        return Err(HopfError::Invalid("kmax must be positive".into()));
    }
    if !q.is_real() {
        return Err(HopfError::Invalid("q must be real".into()));
    }
    let modes = torus_basis(kmax);
    let n = modes.len();
    let qf = q_form(q, &modes);
    let b = DMatrix::<Complex64>::identity(n, n) + &qf * Complex64::new(t, 0.0);
    let chol = b.clone().cholesky().ok_or_else(|| HopfError::Indefinite(format!("torus B at t = {t}")))?;
    let linv = chol.l().try_inverse().ok_or_else(|| HopfError::Indefinite("torus Cholesky factor".into()))?;
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        modes.iter().map(|m| Complex64::new(m.eigenvalue, 0.0)),
    ));
    let c = &linv * a * linv.adjoint();
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let gradient_dim = modes.iter().filter(|m| m.eigenvalue == 0.0).count();
    let zeros = ev.iter().filter(|v| v.abs() < 1e-8).count();
    if zeros != gradient_dim {
        return Err(HopfError::SpectrumIncomplete(format!("{zeros} zero modes, expected {gradient_dim}")));
    }
    let mu1 = ev
        .iter()
        .copied()
        .find(|v| *v >= 1e-8)
        .ok_or_else(|| HopfError::NoPositiveEigenvalue("torus pencil".into()))?;

    let first: Vec<usize> = (0..n).filter(|&i| modes[i].eigenvalue == 1.0).collect();
    let proj = DMatrix::from_fn(first.len(), first.len(), |i, j| -qf[(first[i], first[j])]);
    let proj = (&proj + proj.adjoint()) * Complex64::new(0.5, 0.0);
    let mut derivatives: Vec<f64> = SymmetricEigen::new(proj).eigenvalues.iter().copied().collect();
    derivatives.sort_by(f64::total_cmp);
    let mean = q.mean().re;
    let normalized_derivatives = derivatives.iter().map(|d| d + mean).collect();
    let vol = q.scale(t).add(&TorusScalar::constant(1.0));
    let vol = vol.mul(&vol).mul(&vol).integrate();
    Ok(TorusPencilReport {
        kmax,
        t,
        dim: n,
        gradient_dim,
        mu1,
        mu1_normalized: mu1 * vol.cbrt(),
        first_multiplicity: first.len(),
        min_derivative: derivatives.first().copied().unwrap_or(0.0),
        derivatives,
        normalized_derivatives,
    })
}

/// |abc(1,1,1)|^2 - 3, the speed fluctuation of the symmetric ABC flow.
pub fn abc_speed_direction() -> TorusScalar {
    abc_field(1.0, 1.0, 1.0).speed_sq().add(&TorusScalar::constant(-3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abc_is_beltrami() {
        let u = abc_field(1.0, 1.0, 1.0);
        assert!(u.curl().approx_eq(&u, 1e-15));
        assert!(u.is_divergence_free() && u.is_real());
        assert!(u.curl().curl().approx_eq(&u.neg_laplacian(), 1e-15));
        assert!(abc_field(0.0, 0.0, 0.0).modes.is_empty());
        let x = [0.3, -1.2, 2.5];
        let v = u.eval(&x);
        assert!((v[0] - (x[2].sin() + x[1].cos())).abs() < 1e-14);
        assert!((v[1] - (x[0].sin() + x[2].cos())).abs() < 1e-14);
    }

    #[test]
    fn speed() {
        let s = speed_is_constant(&abc_field(1.0, 1.0, 1.0));
        assert!(!s.constant && s.witness.is_some());
        assert!(speed_is_constant(&abc_field(1.0, 0.0, 0.0)).constant);
        let e = abc_field(1.0, 0.0, 0.0);
        assert_eq!(e.speed_sq(), TorusScalar::constant(1.0));
    }

    #[test]
    fn first_variations() {
        let u = abc_field(1.0, 1.0, 1.0);
        let v = first_variation(&u, &abc_speed_direction()).unwrap();
        assert!((v - 3.0 * volume()).abs() < 1e-12 * v);
        assert!(first_variation(&u, &TorusScalar::sin_product()).unwrap().abs() < 1e-12);
        assert!(first_variation(&abc_field(1.0, 0.0, 0.0), &abc_speed_direction()).unwrap().abs() < 1e-12);
        assert!(matches!(first_variation(&u, &TorusScalar::constant(1.0)), Err(HopfError::NotMeanZero)));
    }

    #[test]
    fn round_pencil() {
        let r = torus_pencil(&TorusScalar::default(), 0.0, 1).unwrap();
        assert_eq!(r.first_multiplicity, 6);
        assert!((r.mu1 - 1.0).abs() < 1e-14);
        assert!(r.derivatives.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn basis_modes_are_eigenfields() {
        for m in torus_basis(2) {
            let f = m.field();
            let c = f.curl();
            let mut g = TorusField::default();
            g.add_mode(m.k, m.polarization.map(|v| v * m.eigenvalue));
            assert!(c.approx_eq(&g, 1e-14));
        }
    }

    #[test]
    fn speed_direction_decreases_mu1() {
        let r = torus_pencil(&abc_speed_direction(), 0.0, 1).unwrap();
        assert!((r.min_derivative + 1.0).abs() < 1e-12, "{:?}", r.derivatives);
        let r = torus_pencil(&TorusScalar::cos([2, 0, 0], 1.0), 0.0, 2).unwrap();
        assert!(r.derivatives.iter().all(|d| d.abs() < 1e-14), "{:?}", r.derivatives);
    }

    #[test]
    fn pencil_follows_derivative() {
        let q = abc_speed_direction();
        let t = 1e-4;
        let r = torus_pencil(&q, t, 2).unwrap();
        // the ABC direction lowers mu1 at rate 1
        assert!(((r.mu1 - 1.0) / t + 1.0).abs() < 0.05, "{}", r.mu1);
    }
}
