//! Seeded sampling of R around B1 in the span of the eigenspaces with
//! |mu| <= 5.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HopfError, Result};
use crate::frame::FrameField;
use crate::quadrature::{HopfGrid, QuadratureSpec};

use super::eval::{dot3, CompiledField};
use super::perturbation::orthonormal_basis;
use super::{grid, l32_energy, second_variation_r};

/// Eigenvalues spanned by the scan.
pub const SCAN_EIGENVALUES: [i64; 8] = [-5, -4, -3, -2, 2, 3, 4, 5];

/// Tolerance on R(B1 + W) - R(B1).
pub const INCREASE_TOL: f64 = 1e-9;
/// Non-E1 parts below this count as "essentially in E1".
pub const E1_TOL: f64 = 1e-8;

/// Kinds of sampled directions, cycled by sample index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    /// All eigenspaces.
    Full,
    /// Only the eigenvalue-2 space (R is constant there).
    FirstEigenspace,
    /// Only u5, u8 (the directions where the second variation vanishes).
    Degenerate,
    /// A random nonempty subset of eigenspaces.
    Subset,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSample {
    pub index: usize,
    pub kind: SampleKind,
    pub sup_norm: f64,
    /// L2 norm of the part outside the eigenvalue-2 space.
    pub non_e1_norm: f64,
    pub r: f64,
    pub delta_r: f64,
    pub pass: bool,
    /// Orthonormal coordinates by eigenvalue.
    pub coeffs: BTreeMap<i64, Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalMaxReport {
    pub radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub r_hopf: f64,
    pub max_delta: f64,
    pub violations: Vec<ScanSample>,
    pub rows: Vec<ScanSample>,
    pub pass: bool,
}

fn sup_norm(f: &FrameField<f64>, g: &HopfGrid) -> f64 {
    let c = CompiledField::new(f);
    g.points().par_iter().map(|x| dot3(&c.eval(x), &c.eval(x)).sqrt()).reduce(|| 0.0, f64::max)
}

fn sample_coeffs(rng: &mut ChaCha8Rng, kind: SampleKind) -> BTreeMap<i64, Vec<f64>> {
    let chosen: Vec<i64> = match kind {
        SampleKind::Full => SCAN_EIGENVALUES.to_vec(),
        SampleKind::FirstEigenspace => vec![2],
        SampleKind::Degenerate => vec![3],
        SampleKind::Subset => {
            let mut v: Vec<i64> = SCAN_EIGENVALUES.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            if v.is_empty() {
                v.push(SCAN_EIGENVALUES[rng.gen_range(0..SCAN_EIGENVALUES.len())]);
            }
            v
        }
    };
    let mut out = BTreeMap::new();
    for mu in chosen {
        let n = orthonormal_basis(mu).expect("scan eigenvalue").len();
        let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if kind == SampleKind::Degenerate {
            for (i, v) in c.iter_mut().enumerate() {
                if i != 4 && i != 7 {
                    *v = 0.0;
                }
            }
        }
        out.insert(mu, c);
    }
    out
}

fn assemble(coeffs: &BTreeMap<i64, Vec<f64>>) -> FrameField<f64> {
    let mut f = FrameField::zero();
    for (mu, c) in coeffs {
        for (e, v) in orthonormal_basis(*mu).expect("scan eigenvalue").iter().zip(c) {
            if *v != 0.0 {
                f = &f + &e.scale(v);
            }
        }
    }
    f
}

/// H from orthonormal coordinates, B1 contributing sqrt(2) pi along the
/// first eigenvalue-2 basis field.
fn helicity_from_coeffs(coeffs: &BTreeMap<i64, Vec<f64>>) -> f64 {
    let mut e1 = coeffs.get(&2).cloned().unwrap_or_else(|| vec![0.0; 3]);
    e1[0] += 2f64.sqrt() * PI;
    let mut h = e1.iter().map(|v| v * v).sum::<f64>() / 2.0;
    for (mu, c) in coeffs.iter().filter(|(m, _)| **m != 2) {
        h += c.iter().map(|v| v * v).sum::<f64>() / *mu as f64;
    }
    h
}

/// R at B1 + W for W given by coordinates.
pub fn rayleigh_at(coeffs: &BTreeMap<i64, Vec<f64>>, q: QuadratureSpec) -> f64 {
    let f = &FrameField::basis(0) + &assemble(coeffs);
    helicity_from_coeffs(coeffs) / l32_energy(&f, q).powf(4.0 / 3.0)
}

/// Samples `samples` directions with sup-norm in [radius/2, radius] and
/// compares R(B1 + W) with R(B1). Each sample uses its own RNG stream, so
/// results do not depend on scheduling.
pub fn local_max_scan(radius: f64, samples: usize, seed: u64, q: QuadratureSpec) -> Result<LocalMaxReport> {
    if !(radius > 0.0 && radius <= 0.1) {
        return Err(HopfError::Invalid(format!("radius {radius} outside (0, 0.1]")));
    }
    let probe = grid(QuadratureSpec::new(12, 24));
    let r_hopf = rayleigh_at(&BTreeMap::new(), q);
    let kinds = [SampleKind::Full, SampleKind::FirstEigenspace, SampleKind::Degenerate, SampleKind::Subset];
    let rows: Vec<ScanSample> = (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let kind = kinds[index % kinds.len()];
            let raw = sample_coeffs(&mut rng, kind);
            let target = radius * rng.gen_range(0.5..=1.0);
            let s = target / sup_norm(&assemble(&raw), probe);
            let coeffs: BTreeMap<i64, Vec<f64>> =
                raw.into_iter().map(|(m, c)| (m, c.into_iter().map(|v| v * s).collect())).collect();
            let w = assemble(&coeffs);
            let non_e1_norm = coeffs
                .iter()
                .filter(|(m, _)| **m != 2)
                .map(|(_, c)| c.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                .sqrt();
            let r = rayleigh_at(&coeffs, q);
            let delta_r = r - r_hopf;
            let equal = delta_r.abs() <= INCREASE_TOL;
            let pass = delta_r <= INCREASE_TOL && (!equal || non_e1_norm < E1_TOL);
            ScanSample { index, kind, sup_norm: sup_norm(&w, probe), non_e1_norm, r, delta_r, pass, coeffs }
        })
        .collect();
    let violations: Vec<ScanSample> = rows.iter().filter(|r| !r.pass).cloned().collect();
    let max_delta = rows.iter().map(|r| r.delta_r).fold(f64::NEG_INFINITY, f64::max);
    Ok(LocalMaxReport { radius, samples, seed, r_hopf, max_delta, pass: violations.is_empty(), violations, rows })
}

/// Eigenvalues of the atlas span (|mu| <= 5) whose fields descend to RP^3,
/// excluding the eigenvalue-2 space.
pub const RP3_DIRECTIONS: [i64; 3] = [-4, -2, 4];
/// Required upper bound on the second variation of R per unit norm.
pub const SECOND_VARIATION_BOUND: f64 = -0.01;

#[derive(Clone, Debug, Serialize)]
pub struct SecondVariationReport {
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    /// Second variation of R at B1 divided by |W|^2, per sample.
    pub values: Vec<f64>,
    pub max: f64,
    pub min: f64,
    /// The same quotient for v9, which maximizes int (B1.W)^2 on the
    /// eigenvalue-4 space and so attains the supremum over all directions.
    pub extremal: f64,
    pub pass: bool,
}

/// Samples isotropic unit W in the span of [`RP3_DIRECTIONS`] and checks
/// second_variation_r(B1, W) / |W|^2 <= [`SECOND_VARIATION_BOUND`].
pub fn rp3_second_variation_scan(samples: usize, seed: u64) -> Result<SecondVariationReport> {
    let b1 = FrameField::<f64>::basis(0);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let mut w = FrameField::zero();
            for mu in RP3_DIRECTIONS {
                for e in orthonormal_basis(mu)? {
                    let c: f64 = rng.sample(StandardNormal);
                    w = &w + &e.scale(&c);
                }
            }
            debug_assert_eq!(w.antipodal_parity(), crate::frame::Parity::DescendsToRp3);
            Ok(second_variation_r(&b1, &w)? / w.norm_sq_f64())
        })
        .collect::<Result<_>>()?;
    let v9 = &orthonormal_basis(4)?[8];
    let extremal = second_variation_r(&b1, v9)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SecondVariationReport {
        samples,
        seed,
        bound: SECOND_VARIATION_BOUND,
        pass: samples > 0 && max <= SECOND_VARIATION_BOUND,
        values,
        max,
        min,
        extremal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_eigenspace_keeps_r() {
        let q = QuadratureSpec::default();
        let r0 = rayleigh_at(&BTreeMap::new(), q);
        let mut c = BTreeMap::new();
        c.insert(2, vec![0.01, -0.02, 0.03]);
        assert!((rayleigh_at(&c, q) - r0).abs() < 1e-13);
        let mut c = BTreeMap::new();
        let mut v = vec![0.0; 15];
        v[0] = 0.05;
        c.insert(4, v);
        assert!(rayleigh_at(&c, q) < r0 - 1e-6);
    }

    #[test]
    fn second_variation_extremes() {
        let r = rp3_second_variation_scan(4, 3).unwrap();
        let unit = 1.0 / (2.0 * (2.0 * PI * PI).powf(4.0 / 3.0));
        assert!((r.extremal + unit / 3.0).abs() < 1e-12);
        assert!(r.values.iter().all(|v| *v <= -unit / 3.0 + 1e-12 && *v >= -11.0 / 3.0 * unit - 1e-12));
    }

    #[test]
    fn rejects_large_radius() {
        assert!(local_max_scan(0.2, 1, 0, QuadratureSpec::default()).is_err());
    }
}
