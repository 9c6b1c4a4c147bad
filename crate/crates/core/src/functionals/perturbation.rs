//! Perturbations of the Hopf field organized by curl eigenspace, and the
//! floating orthonormal bases they are expressed in.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;

use crate::atlas::{default_solver, explicit_atlas};
use crate::error::{HopfError, Result};
use crate::exact::rational_to_f64;
use crate::frame::{anti_hopf_field, reflection_t, FrameField};

/// Eigenvalues allowed as keys of [`HopfPerturbation::extra`].
pub const EXTRA_EIGENVALUES: [i64; 5] = [-4, -3, 5, 6, 7];

/// 1-based indices of the eigenvalue-4 basis fields forming the quadratic
/// response to the Z2 block.
pub const P32_INDICES: [usize; 3] = [10, 12, 15];

const LOWEST: i64 = -7;
const HIGHEST: i64 = 7;

/// L2-orthonormal floating basis of an eigenspace, for 2 <= |mu| <= 7.
/// Entries up to |mu| = 5 come from the closed-form tables, 6 and 7 from
/// the exact solver, -6 and -7 by reflecting those.
pub fn orthonormal_basis(mu: i64) -> Result<&'static [FrameField<f64>]> {
    static CACHE: [OnceLock<Vec<FrameField<f64>>>; 15] = [const { OnceLock::new() }; 15];
    if !(LOWEST..=HIGHEST).contains(&mu) || mu.abs() < 2 {
        return Err(HopfError::UnsupportedEigenvalue(mu));
    }
    let slot = &CACHE[(mu - LOWEST) as usize];
    Ok(slot.get_or_init(|| {
        if let Some(e) = explicit_atlas().get(&mu) {
            return e.orthonormal_f64();
        }
        if mu < 0 {
            let t = reflection_t::<f64>();
            return orthonormal_basis(-mu)
                .expect("positive counterpart")
                .iter()
                .map(|f| f.isometry_pushforward(&t).expect("reflection is orthogonal"))
                .collect();
        }
        let s = default_solver().eigenbasis(mu);
        s.fields
            .iter()
            .zip(&s.norms)
            .map(|(f, n)| f.to_f64().scale(&(1.0 / (rational_to_f64(n).sqrt() * PI))))
            .collect()
    }))
}

/// B^_1, B^_2, B^_3 scaled to unit L2 norm.
pub fn anti_hopf_orthonormal() -> &'static [FrameField<f64>; 3] {
    static B: OnceLock<[FrameField<f64>; 3]> = OnceLock::new();
    B.get_or_init(|| std::array::from_fn(|i| anti_hopf_field(i).to_f64().scale(&(1.0 / (2f64.sqrt() * PI)))))
}

fn combine(basis: &[FrameField<f64>], coeffs: &[f64]) -> FrameField<f64> {
    let mut out = FrameField::zero();
    for (e, c) in basis.iter().zip(coeffs) {
        if *c != 0.0 {
            out = &out + &e.scale(c);
        }
    }
    out
}

fn coordinates(basis: &[FrameField<f64>], f: &FrameField<f64>) -> Vec<f64> {
    basis.iter().map(|e| e.inner_f64(f)).collect()
}

/// A perturbation of B1 orthogonal to the eigenvalue-2 space:
/// W = W_{-1} + Z1 + Z2 + W3 + (fields of the other listed eigenspaces),
/// with W_{-1} in the anti-Hopf span (eigenvalue -2), Z1 + Z2 in the
/// eigenvalue-3 space, W3 in the eigenvalue-4 space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HopfPerturbation {
    /// Coordinates over the orthonormal anti-Hopf fields.
    pub beta: [f64; 3],
    /// Coordinates over the orthonormal eigenvalue-3 basis; 1..4 form Z1,
    /// 5..8 form Z2.
    pub a: [f64; 8],
    /// Coordinates over the orthonormal eigenvalue-4 basis.
    pub b: [f64; 15],
    /// Components in further eigenspaces, keyed by curl eigenvalue.
    pub extra: BTreeMap<i64, FrameField<f64>>,
}

impl HopfPerturbation {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Z2 = a5 u^5 + a8 u^8.
    pub fn from_a5_a8(a5: f64, a8: f64) -> Self {
        let mut w = Self::zero();
        w.a[4] = a5;
        w.a[7] = a8;
        w
    }

    /// a5, a8 together with b10, b12, b15.
    pub fn degenerate_block(a5: f64, a8: f64, b10: f64, b12: f64, b15: f64) -> Self {
        let mut w = Self::from_a5_a8(a5, a8);
        w.b[9] = b10;
        w.b[11] = b12;
        w.b[14] = b15;
        w
    }

    pub fn set_extra(&mut self, mu: i64, field: FrameField<f64>) -> Result<()> {
        if !EXTRA_EIGENVALUES.contains(&mu) {
            return Err(HopfError::UnsupportedEigenvalue(mu));
        }
        self.extra.insert(mu, field);
        Ok(())
    }

    /// Random coordinates in [-scale, scale]; with `extras`, every listed
    /// eigenspace also receives a random component.
    pub fn random<R: Rng>(rng: &mut R, scale: f64, extras: bool) -> Self {
        let mut w = Self::zero();
        for v in w.beta.iter_mut().chain(w.a.iter_mut()).chain(w.b.iter_mut()) {
            *v = rng.gen_range(-scale..=scale);
        }
        if extras {
            for mu in EXTRA_EIGENVALUES {
                w.extra.insert(mu, random_eigenfield(rng, mu, scale).expect("listed eigenvalue"));
            }
        }
        w
    }

    pub fn w_minus1(&self) -> FrameField<f64> {
        combine(anti_hopf_orthonormal(), &self.beta)
    }

    pub fn z1(&self) -> FrameField<f64> {
        combine(&basis(3)[..4], &self.a[..4])
    }

    pub fn z2(&self) -> FrameField<f64> {
        combine(&basis(3)[4..], &self.a[4..])
    }

    pub fn w3(&self) -> FrameField<f64> {
        combine(basis(4), &self.b)
    }

    /// Part of W3 outside indices 10, 12, 15.
    pub fn p31(&self) -> FrameField<f64> {
        let mut b = self.b;
        for i in P32_INDICES {
            b[i - 1] = 0.0;
        }
        combine(basis(4), &b)
    }

    /// Part of W3 along indices 10, 12, 15.
    pub fn p32(&self) -> FrameField<f64> {
        let mut b = [0.0; 15];
        for i in P32_INDICES {
            b[i - 1] = self.b[i - 1];
        }
        combine(basis(4), &b)
    }

    /// Sum of the extra components.
    pub fn w_hat0(&self) -> FrameField<f64> {
        self.extra.values().fold(FrameField::zero(), |acc, f| &acc + f)
    }

    /// Components by eigenvalue (zero parts omitted).
    pub fn parts(&self) -> Vec<(i64, FrameField<f64>)> {
        let mut out = Vec::new();
        if self.beta.iter().any(|v| *v != 0.0) {
            out.push((-2, self.w_minus1()));
        }
        if self.a.iter().any(|v| *v != 0.0) {
            out.push((3, combine(basis(3), &self.a)));
        }
        if self.b.iter().any(|v| *v != 0.0) {
            out.push((4, self.w3()));
        }
        for (mu, f) in &self.extra {
            if !f.is_zero() {
                out.push((*mu, f.clone()));
            }
        }
        out
    }

    pub fn assemble(&self) -> FrameField<f64> {
        self.parts().into_iter().fold(FrameField::zero(), |acc, (_, f)| &acc + &f)
    }

    pub fn norm_sq(&self) -> f64 {
        let coords: f64 = self.beta.iter().chain(&self.a).chain(&self.b).map(|v| v * v).sum();
        coords + self.extra.values().map(|f| f.norm_sq_f64()).sum::<f64>()
    }

    /// H(W) = sum |W_mu|^2 / mu.
    pub fn helicity(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        -sq(&self.beta) / 2.0
            + sq(&self.a) / 3.0
            + sq(&self.b) / 4.0
            + self.extra.iter().map(|(mu, f)| f.norm_sq_f64() / *mu as f64).sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> Self {
        HopfPerturbation {
            beta: self.beta.map(|v| v * s),
            a: self.a.map(|v| v * s),
            b: self.b.map(|v| v * s),
            extra: self.extra.iter().map(|(m, f)| (*m, f.scale(&s))).collect(),
        }
    }

    /// Recovers the coordinates of a field by spectral projection. Fails
    /// when the field has components outside the supported eigenspaces.
    pub fn recover(field: &FrameField<f64>) -> Result<Self> {
        let solver = default_solver();
        let mut w = Self::zero();
        let p = solver.project_f64(field, -2)?;
        let beta = coordinates(anti_hopf_orthonormal(), &p);
        w.beta.copy_from_slice(&beta);
        let p = solver.project_f64(field, 3)?;
        w.a.copy_from_slice(&coordinates(basis(3), &p));
        let p = solver.project_f64(field, 4)?;
        w.b.copy_from_slice(&coordinates(basis(4), &p));
        for mu in EXTRA_EIGENVALUES {
            let p = solver.project_f64(field, mu)?;
            if p.max_abs_coeff() > 0.0 {
                w.extra.insert(mu, p);
            }
        }
        let scale = field.max_abs_coeff().max(1.0);
        if (field - &w.assemble()).max_abs_coeff() > 1e-10 * scale {
            return Err(HopfError::NotInSpan("field has components outside the perturbation eigenspaces".into()));
        }
        Ok(w)
    }
}

fn basis(mu: i64) -> &'static [FrameField<f64>] {
    orthonormal_basis(mu).expect("supported eigenvalue")
}

/// Random combination of an orthonormal basis with coordinates in
/// [-scale, scale].
pub fn random_eigenfield<R: Rng>(rng: &mut R, mu: i64, scale: f64) -> Result<FrameField<f64>> {
    let b = orthonormal_basis(mu)?;
    let c: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-scale..=scale)).collect();
    Ok(combine(b, &c))
}
