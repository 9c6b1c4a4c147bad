//! Curl eigenspaces of the round S^3: closed-form bases, an exact solver,
//! and the spectral quantities built from them (helicity, curl inverse,
//! Rayleigh quotient).

pub mod explicit;
pub mod solver;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{HopfError, Result};
use crate::exact::{int, ExactScalar, Rational};
use crate::frame::{reflection_t, FrameField};
pub use solver::{block_spectrum, in_orthogonal_span, EigenSolver, SolvedEigenspace};

/// Where an atlas entry comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Transcribed closed-form basis.
    Explicit,
    /// Pushforward of a positive entry by the reflection diag(1, 1, 1, -1).
    Reflected,
    /// Produced by the exact eigensolver.
    Solver,
}

#[derive(Clone, Debug)]
pub struct AtlasEntry {
    pub eigenvalue: i64,
    pub fields: Vec<FrameField>,
    pub squared_norms: Vec<ExactScalar>,
    pub label: Provenance,
}

impl AtlasEntry {
    fn new(eigenvalue: i64, fields: Vec<FrameField>, norms: Vec<Rational>, label: Provenance) -> Self {
        let squared_norms = norms.into_iter().map(|n| ExactScalar::pi_pow(n, 2)).collect();
        AtlasEntry { eigenvalue, fields, squared_norms, label }
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Squared norms as rational multiples of pi^2.
    pub fn norm_coeffs(&self) -> Vec<Rational> {
        self.squared_norms.iter().map(|s| s.coeff(2)).collect()
    }

    /// Floating orthonormal basis.
    pub fn orthonormal_f64(&self) -> Vec<FrameField<f64>> {
        self.fields
            .iter()
            .zip(&self.squared_norms)
            .map(|(f, n)| f.to_f64().scale(&(1.0 / n.to_f64().sqrt())))
            .collect()
    }

    /// Combination sum c_i e_i / |e_i| with floating coefficients.
    pub fn combine_orthonormal(&self, coeffs: &[f64]) -> FrameField<f64> {
        let mut out = FrameField::zero();
        for (e, c) in self.orthonormal_f64().iter().zip(coeffs) {
            if *c != 0.0 {
                out = &out + &e.scale(c);
            }
        }
        out
    }

    /// Dimension predicted for eigenvalue +-(k+2): (k+1)(k+3).
    pub fn expected_dim(eigenvalue: i64) -> usize {
        let k = eigenvalue.unsigned_abs() as usize - 2;
        (k + 1) * (k + 3)
    }

    /// Exact check that every field is an eigenfield and the Gram matrix is
    /// diagonal with the recorded norms. Returns failure descriptions.
    pub fn verify(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let mu = int(self.eigenvalue);
        for (i, f) in self.fields.iter().enumerate() {
            if f.curl() != f.scale(&mu) {
                bad.push(format!("field {} is not a curl eigenfield for {}", i + 1, self.eigenvalue));
            }
        }
        let norms = self.norm_coeffs();
        for i in 0..self.fields.len() {
            for j in i..self.fields.len() {
                let g = self.fields[i].inner_coeff(&self.fields[j]);
                let want = if i == j { norms[i].clone() } else { Rational::zero() };
                if g != want {
                    bad.push(format!("gram entry ({}, {}) is {} (expected {})", i + 1, j + 1, g, want));
                }
            }
        }
        bad
    }
}

/// Closed-form basis for eigenvalue in {+-2, +-3, +-4, +-5}; negative
/// entries are reflections of the positive ones.
pub fn explicit_basis(eigenvalue: i64) -> Result<AtlasEntry> {
    let (fields, norms) = match eigenvalue.abs() {
        2 => explicit::e2(),
        3 => explicit::e3(),
        4 => explicit::e4(),
        5 => explicit::e5(),
        _ => return Err(HopfError::UnsupportedEigenvalue(eigenvalue)),
    };
    if eigenvalue > 0 {
        return Ok(AtlasEntry::new(eigenvalue, fields, norms, Provenance::Explicit));
    }
    let t = reflection_t::<Rational>();
    let fields = fields.iter().map(|f| f.isometry_pushforward(&t).expect("reflection is orthogonal")).collect();
    Ok(AtlasEntry::new(eigenvalue, fields, norms, Provenance::Reflected))
}

/// Cached explicit entries for the eight supported eigenvalues.
pub fn explicit_atlas() -> &'static BTreeMap<i64, AtlasEntry> {
    static ATLAS: OnceLock<BTreeMap<i64, AtlasEntry>> = OnceLock::new();
    ATLAS.get_or_init(|| {
        [2, 3, 4, 5, -2, -3, -4, -5].iter().map(|&m| (m, explicit_basis(m).expect("supported eigenvalue"))).collect()
    })
}

/// Result of solving on all fields with coefficient degree <= dmax + 2.
pub struct SolveReport {
    pub dmax: u32,
    /// Entries for 0 < |mu| <= dmax + 2, positive first.
    pub entries: Vec<AtlasEntry>,
    pub gradient_dim: usize,
    /// Full block spectrum with dimensions (including eigenvalues above the
    /// reported range, which the larger trial space also contains).
    pub all_dims: Vec<(i64, usize)>,
}

/// Largest dmax accepted by [`eigenspace_solve`].
pub const DEFAULT_DMAX_LIMIT: u32 = 5;

/// Every eigenvalue +-(k+2) with k <= dmax needs coefficient degree up to
/// k + 2 on the negative side, so the trial space uses degree dmax + 2.
pub fn eigenspace_solve(dmax: u32) -> Result<SolveReport> {
    eigenspace_solve_with(dmax, true)
}

/// As [`eigenspace_solve`]; `with_bases = false` leaves `entries` empty and
/// only fills the dimension table.
pub fn eigenspace_solve_with(dmax: u32, with_bases: bool) -> Result<SolveReport> {
    if dmax > DEFAULT_DMAX_LIMIT {
        return Err(HopfError::DegreeOverflow { degree: dmax, limit: DEFAULT_DMAX_LIMIT });
    }
    let solver = EigenSolver::new(dmax + 2)?;
    let top = dmax as i64 + 2;
    let spectrum = solver.spectrum();
    let mut entries = Vec::new();
    if with_bases {
        for &mu in spectrum.iter().filter(|m| **m != 0 && m.abs() <= top) {
            let s = solver.eigenbasis(mu);
            entries.push(AtlasEntry::new(mu, s.fields, s.norms, Provenance::Solver));
        }
    }
    entries.sort_by_key(|e| (e.eigenvalue < 0, e.eigenvalue.abs()));
    let all_dims = spectrum.iter().map(|&m| (m, solver.dimension(m))).collect();
    Ok(SolveReport { dmax, gradient_dim: solver.dimension(0), entries, all_dims })
}

impl SolveReport {
    pub fn dimension(&self, mu: i64) -> usize {
        self.all_dims.iter().find(|(m, _)| *m == mu).map_or(0, |(_, d)| *d)
    }
}

/// Shared solver for coefficient degree <= 5 (eigenvalues -5..7).
pub fn default_solver() -> &'static EigenSolver {
    static S: OnceLock<EigenSolver> = OnceLock::new();
    S.get_or_init(|| EigenSolver::new(5).expect("degree-5 spectrum is complete"))
}

/// Eigen-components of a field.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub components: BTreeMap<i64, FrameField>,
    pub residual: FrameField,
}

impl EigenDecomposition {
    pub fn gradient_part(&self) -> Option<&FrameField> {
        self.components.get(&0)
    }
}

pub fn decompose(f: &FrameField) -> Result<EigenDecomposition> {
    decompose_with(default_solver(), f)
}

pub fn decompose_with(solver: &EigenSolver, f: &FrameField) -> Result<EigenDecomposition> {
    let mut components = BTreeMap::new();
    let mut sum = FrameField::zero();
    for mu in solver.spectrum() {
        let p = solver.project(f, mu)?;
        if !p.is_zero() {
            sum = &sum + &p;
            components.insert(mu, p);
        }
    }
    let residual = f - &sum;
    if !residual.is_zero() {
        return Err(HopfError::SpectrumIncomplete("eigen-components do not sum to the input".into()));
    }
    Ok(EigenDecomposition { components, residual })
}

pub fn project_eigen(f: &FrameField, eigenvalue: i64) -> Result<FrameField> {
    default_solver().project(f, eigenvalue)
}

fn exact_components(f: &FrameField) -> Result<EigenDecomposition> {
    if !f.divergence().is_zero() {
        return Err(HopfError::HelicityUndefined("field has nonzero divergence".into()));
    }
    let d = decompose(f)?;
    if d.gradient_part().is_some() {
        return Err(HopfError::HelicityUndefined("field has a gradient component".into()));
    }
    Ok(d)
}

/// H(F) = sum over eigenvalues of |P_mu F|^2 / mu.
pub fn helicity(f: &FrameField) -> Result<ExactScalar> {
    let d = exact_components(f)?;
    let mut h = Rational::zero();
    for (mu, c) in &d.components {
        h += c.norm_sq_coeff() / int(*mu);
    }
    Ok(ExactScalar::pi_pow(h, 2))
}

/// The exact field whose curl is F.
pub fn curl_inverse(f: &FrameField) -> Result<FrameField> {
    let d = exact_components(f)?;
    let mut out = FrameField::zero();
    for (mu, c) in &d.components {
        out = &out + &c.scale(&(Rational::from_integer(1.into()) / int(*mu)));
    }
    Ok(out)
}

/// |F|^2 / |H(F)|, exact since both are rational multiples of pi^2.
pub fn rayleigh_quotient(f: &FrameField) -> Result<Rational> {
    let h = helicity(f)?.coeff(2);
    if h.is_zero() {
        return Err(HopfError::ZeroHelicity);
    }
    Ok(f.norm_sq_coeff() / h.abs())
}

/// Floating helicity through the shared solver's projectors.
pub fn helicity_f64(f: &FrameField<f64>) -> Result<f64> {
    let s = default_solver();
    let mut h = 0.0;
    for mu in s.spectrum() {
        if mu == 0 {
            continue;
        }
        let p = s.project_f64(f, mu)?;
        h += p.norm_sq_f64() / mu as f64;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn explicit_entries_are_exact() {
        for (mu, e) in explicit_atlas() {
            assert_eq!(e.dim(), AtlasEntry::expected_dim(*mu), "dimension for {mu}");
            let bad = e.verify();
            assert!(bad.is_empty(), "eigenvalue {mu}: {bad:?}");
        }
    }

    #[test]
    fn unsupported_eigenvalue() {
        assert!(matches!(explicit_basis(6), Err(HopfError::UnsupportedEigenvalue(6))));
        assert!(explicit_basis(0).is_err());
    }

    #[test]
    fn small_solver_dimensions() {
        let r = eigenspace_solve(0).unwrap();
        let dims: Vec<(i64, usize)> = r.entries.iter().map(|e| (e.eigenvalue, e.dim())).collect();
        assert_eq!(dims, vec![(2, 3), (-2, 3)]);
        for e in &r.entries {
            assert!(e.verify().is_empty());
        }
    }

    #[test]
    fn hopf_helicity_and_inverse() {
        let b1 = FrameField::basis(0);
        assert_eq!(helicity(&b1).unwrap(), ExactScalar::pi_pow(int(1), 2));
        assert_eq!(curl_inverse(&b1).unwrap(), b1.scale(&ratio(1, 2)));
        assert_eq!(rayleigh_quotient(&b1).unwrap(), int(2));
        let g = FrameField::grad(&crate::exact::SphereScalar::var(0));
        assert!(helicity(&g).is_err());
    }
}
