//! First curl eigenvalue of conformally rescaled round metrics on S^3 and
//! RP^3.
//!
//! For g = (1+tq)^2 g0 the eigen-equation curl_g X = mu X becomes
//! curl_0 X = mu (1+tq) X, whose weak form on a trial space is the pencil
//! A = <curl e_i, e_j>, B = int (1+tq) <e_i, e_j>. The trial space holds
//! orthonormal round eigenfields with 2 <= |mu| <= dmax + 2 and gradients of
//! polynomials of degree <= dmax + 2, so A is diagonal and the t = 0
//! spectrum is exact. B is assembled with a product rule that is exact for
//! the polynomial degrees involved.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::exact::{ratio, ExactScalar, Poly, Rational, SphereScalar};
use crate::frame::{FrameField, Parity};
use crate::functionals::eval::{dot3, CompiledField};
use crate::functionals::{grid, orthonormal_basis};
use crate::quadrature::{HopfGrid, QuadratureSpec};

/// Largest supported dmax: the eigenfield tables stop at |mu| = 7.
pub const MAX_DMAX: u32 = 5;
/// Pencil eigenvalues below this magnitude are treated as gradient modes.
pub const ZERO_TOL: f64 = 1e-8;
/// Largest accepted change of mu1 under dmax -> dmax + 1.
pub const REFINEMENT_TOL: f64 = 1e-4;
/// Slack allowed when comparing the t = 0 value with the grid minimum.
pub const MINIMUM_TOL: f64 = 1e-6;
/// Default scan parameters.
pub const DEFAULT_T_GRID: [f64; 7] = [-0.05, -0.02, -0.01, 0.0, 0.01, 0.02, 0.05];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    S3,
    Rp3,
    T3,
}

impl Manifold {
    pub fn name(&self) -> &'static str {
        match self {
            Manifold::S3 => "s3",
            Manifold::Rp3 => "rp3",
            Manifold::T3 => "t3",
        }
    }

    /// Volume of the round metric.
    pub fn round_volume(&self) -> f64 {
        match self {
            Manifold::S3 => 2.0 * PI * PI,
            Manifold::Rp3 => PI * PI,
            Manifold::T3 => (2.0 * PI).powi(3),
        }
    }
}

impl std::str::FromStr for Manifold {
    type Err = HopfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s3" => Ok(Manifold::S3),
            "rp3" => Ok(Manifold::Rp3),
            "t3" => Ok(Manifold::T3),
            _ => Err(HopfError::Invalid(format!("unknown manifold {s:?}"))),
        }
    }
}

fn probe_grid() -> &'static HopfGrid {
    grid(QuadratureSpec::new(16, 32))
}

/// The factor F = (1+tq)^2 of a conformal metric F g0.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    pub q: SphereScalar,
    pub t: f64,
    /// int q^k over S^3 for k = 0..=3.
    moments: [ExactScalar; 4],
}

impl ConformalFactor {
    /// Rejects factors with 1 + tq <= 0 somewhere on a probe grid.
    pub fn new(q: SphereScalar, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(HopfError::Invalid("t must be finite".into()));
        }
        let qf = q.to_f64();
        let min = probe_grid().points().par_iter().map(|x| 1.0 + t * qf.eval(x)).reduce(|| f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(HopfError::Invalid(format!("1 + tq reaches {min:.3e} <= 0")));
        }
        let moments = std::array::from_fn(|k| q.pow(k as u32).integrate());
        Ok(ConformalFactor { q, t, moments })
    }

    pub fn round() -> Self {
        Self::new(SphereScalar::zero(), 0.0).expect("constant factor")
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        Self::new(self.q.clone(), t)
    }

    pub fn is_even(&self) -> bool {
        self.q.odd_part().is_zero()
    }

    /// sqrt(F) = 1 + tq at a point.
    pub fn sqrt_factor(&self, x: &[f64; 4]) -> f64 {
        1.0 + self.t * self.q.eval(x)
    }

    /// int_{S^3} (1+tq)^3 as exact coefficients of t^0..t^3.
    pub fn volume_coefficients(&self) -> [ExactScalar; 4] {
        let binom = [1, 3, 3, 1];
        std::array::from_fn(|k| self.moments[k].scale(&Rational::from_integer(binom[k].into())))
    }

    /// Volume of (S^3, F g0), or half of it on RP^3.
    pub fn volume(&self, manifold: Manifold) -> Result<f64> {
        let v: f64 = self.volume_coefficients().iter().enumerate().map(|(k, c)| c.to_f64() * self.t.powi(k as i32)).sum();
        match manifold {
            Manifold::S3 => Ok(v),
            Manifold::Rp3 => Ok(v / 2.0),
            Manifold::T3 => Err(HopfError::Invalid("sphere factor used on the torus".into())),
        }
    }
}

/// Trial fields evaluated on an exact product rule.
struct TrialSpace {
    /// Curl eigenvalue per column; 0 for gradient columns.
    eigenvalues: Vec<f64>,
    gradient_dim: usize,
    nodes: Vec<[f64; 4]>,
    weights: Vec<f64>,
    /// Row 3n + c holds frame coefficient c at node n, times sqrt(weight).
    values: DMatrix<f64>,
    /// <e_i, e_j> at t = 0.
    gram: DMatrix<f64>,
}

fn parity_ok(manifold: Manifold, f: &FrameField<f64>) -> bool {
    manifold == Manifold::S3 || f.antipodal_parity() == Parity::DescendsToRp3
}

/// Normal-form monomials (x4 exponent <= 1) of degree 1..=n.
fn gradient_generators(n: u32, even_only: bool) -> Vec<SphereScalar> {
    let mut out = Vec::new();
    for d in 1..=n {
        if even_only && d % 2 == 1 {
            continue;
        }
        for e in crate::exact::monomials_of_degree(d) {
            if e[3] <= 1 {
                out.push(SphereScalar::canonicalize(&Poly::monomial(e, Rational::one())));
            }
        }
    }
    out
}

fn exact_rule_for_degree(d: usize) -> QuadratureSpec {
    let spec = QuadratureSpec::new(d / 4 + 1, d + 1);
    debug_assert!(spec.polynomial_exactness() >= d);
    spec
}

fn evaluate(fields: &[FrameField<f64>], nodes: &[[f64; 4]], weights: &[f64]) -> DMatrix<f64> {
    let compiled: Vec<CompiledField> = fields.iter().map(CompiledField::new).collect();
    let cols: Vec<Vec<f64>> = compiled
        .par_iter()
        .map(|c| {
            let mut col = Vec::with_capacity(3 * nodes.len());
            for (x, w) in nodes.iter().zip(weights) {
                let s = w.sqrt();
                col.extend(c.eval(x).iter().map(|v| v * s));
            }
            col
        })
        .collect();
    DMatrix::from_fn(3 * nodes.len(), fields.len(), |r, c| cols[c][r])
}

impl TrialSpace {
    fn build(manifold: Manifold, dmax: u32) -> Result<Self> {
        let top = dmax as i64 + 2;
        let mut fields = Vec::new();
        let mut eigenvalues = Vec::new();
        for mu in (-top..=top).filter(|m| m.abs() >= 2) {
            for f in orthonormal_basis(mu)? {
                if parity_ok(manifold, f) {
                    fields.push(f.clone());
                    eigenvalues.push(mu as f64);
                }
            }
        }
        let eigen_dim = fields.len();
        let grads: Vec<FrameField<f64>> = gradient_generators(dmax + 2, manifold == Manifold::Rp3)
            .iter()
            .map(|s| FrameField::grad(s).to_f64())
            .collect();
        let gradient_dim = grads.len();
        fields.extend(grads);
        eigenvalues.extend(std::iter::repeat_n(0.0, gradient_dim));

        let max_deg = fields.iter().filter_map(|f| f.degree()).max().unwrap_or(0) as usize;
        let g = HopfGrid::new(exact_rule_for_degree(2 * max_deg + 2));
        let (nodes, weights) = (g.points().to_vec(), g.weights().to_vec());
        let mut values = evaluate(&fields, &nodes, &weights);

        // orthonormalize the gradient block so that B(0) is the identity
        let gb = values.columns(eigen_dim, gradient_dim).into_owned();
        let gram_g = gb.transpose() * &gb;
        let chol = gram_g
            .cholesky()
            .ok_or_else(|| HopfError::Indefinite("gradient Gram matrix".into()))?;
        let linv = chol.l().try_inverse().ok_or_else(|| HopfError::Indefinite("gradient Gram factor".into()))?;
        let ortho = gb * linv.transpose();
        values.columns_mut(eigen_dim, gradient_dim).copy_from(&ortho);
        let gram = values.transpose() * &values;
        Ok(TrialSpace { eigenvalues, gradient_dim, nodes, weights, values, gram })
    }

    fn cached(manifold: Manifold, dmax: u32) -> Result<Arc<TrialSpace>> {
        static CACHE: OnceLock<Mutex<HashMap<(Manifold, u32), Arc<TrialSpace>>>> = OnceLock::new();
        let m = CACHE.get_or_init(Default::default);
        if let Some(s) = m.lock().expect("trial cache lock").get(&(manifold, dmax)) {
            return Ok(s.clone());
        }
        let s = Arc::new(Self::build(manifold, dmax)?);
        m.lock().expect("trial cache lock").insert((manifold, dmax), s.clone());
        Ok(s)
    }

    /// int q <e_i, e_j>.
    fn weighted_gram(&self, q: &SphereScalar<f64>) -> DMatrix<f64> {
        let mut scaled = self.values.clone();
        for (n, x) in self.nodes.iter().enumerate() {
            let v = q.eval(x);
            for c in 0..3 {
                scaled.row_mut(3 * n + c).scale_mut(v);
            }
        }
        self.values.transpose() * scaled
    }
}

/// The symmetric pair (A, B) with generalized eigenvalues approximating
/// the curl spectrum of (1+tq)^2 g0.
#[derive(Clone, Debug)]
pub struct GalerkinPencil {
    pub manifold: Manifold,
    pub dmax: u32,
    pub t: f64,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Number of gradient trial fields (the expected zero modes).
    pub gradient_dim: usize,
    /// Curl eigenvalues of the round trial fields, 0 for gradients.
    pub round_eigenvalues: Vec<f64>,
}

impl GalerkinPencil {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn b_min_eigenvalue(&self) -> f64 {
        self.b.clone().symmetric_eigenvalues().min()
    }

    /// All generalized eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let chol = self
            .b
            .clone()
            .cholesky()
            .ok_or_else(|| HopfError::Indefinite(format!("B at t = {}", self.t)))?;
        let linv = chol.l().try_inverse().ok_or_else(|| HopfError::Indefinite("Cholesky factor".into()))?;
        let c = &linv * &self.a * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Eigenvalues with the gradient zero modes removed, after checking
    /// that their count matches the gradient dimension.
    pub fn nonzero_eigenvalues(&self) -> Result<Vec<f64>> {
        let ev = self.eigenvalues()?;
        let zeros = ev.iter().filter(|v| v.abs() < ZERO_TOL).count();
        if zeros != self.gradient_dim {
            return Err(HopfError::SpectrumIncomplete(format!(
                "{zeros} zero eigenvalues, expected {} gradient modes",
                self.gradient_dim
            )));
        }
        Ok(ev.into_iter().filter(|v| v.abs() >= ZERO_TOL).collect())
    }

    /// Smallest positive eigenvalue.
    pub fn mu1(&self) -> Result<f64> {
        self.nonzero_eigenvalues()?
            .into_iter()
            .find(|v| *v > 0.0)
            .ok_or_else(|| HopfError::NoPositiveEigenvalue(format!("pencil of size {}", self.dim())))
    }
}

/// Cached per-factor data: the matrix int q <e_i, e_j> for one trial space.
pub struct PencilFamily {
    manifold: Manifold,
    dmax: u32,
    space: Arc<TrialSpace>,
    q_gram: DMatrix<f64>,
    a: DMatrix<f64>,
}

impl PencilFamily {
    pub fn new(manifold: Manifold, q: &SphereScalar, dmax: u32) -> Result<Self> {
        if manifold == Manifold::T3 {
            return Err(HopfError::Invalid("use the torus module for t3".into()));
        }
        if dmax > MAX_DMAX {
            return Err(HopfError::DegreeOverflow { degree: dmax, limit: MAX_DMAX });
        }
        if manifold == Manifold::Rp3 && !q.odd_part().is_zero() {
            return Err(HopfError::Parity("rp3 needs an antipodally even q".into()));
        }
        let space = TrialSpace::cached(manifold, dmax)?;
        let q_gram = space.weighted_gram(&q.to_f64());
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&space.eigenvalues));
        Ok(PencilFamily { manifold, dmax, space, q_gram, a })
    }

    pub fn at(&self, t: f64) -> GalerkinPencil {
        let b = &self.space.gram + &self.q_gram * t;
        GalerkinPencil {
            manifold: self.manifold,
            dmax: self.dmax,
            t,
            a: self.a.clone(),
            b: (&b + b.transpose()) * 0.5,
            gradient_dim: self.space.gradient_dim,
            round_eigenvalues: self.space.eigenvalues.clone(),
        }
    }

    /// Integration nodes and weights of the assembly rule.
    pub fn rule_size(&self) -> usize {
        self.space.weights.len()
    }
}

pub fn assemble_pencil(manifold: Manifold, cf: &ConformalFactor, dmax: u32) -> Result<GalerkinPencil> {
    Ok(PencilFamily::new(manifold, &cf.q, dmax)?.at(cf.t))
}

/// mu1 times Vol^{1/3}.
pub fn mu1_normalized(manifold: Manifold, cf: &ConformalFactor, dmax: u32) -> Result<f64> {
    let mu = assemble_pencil(manifold, cf, dmax)?.mu1()?;
    Ok(mu * cf.volume(manifold)?.cbrt())
}

/// 2 (2 pi^2)^{1/3} and 2 pi^{2/3}.
pub fn round_value(manifold: Manifold) -> f64 {
    2.0 * manifold.round_volume().cbrt()
}

/// Lower bound (16/pi)^{1/3} for the normalized first eigenvalue in the
/// round conformal class.
pub fn conformal_lower_bound() -> f64 {
    (16.0 / PI).cbrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub manifold: Manifold,
    pub q_id: String,
    pub t: f64,
    pub dmax: u32,
    pub mu1: f64,
    pub mu1_normalized: f64,
    pub refinement_delta: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanFit {
    pub q_id: String,
    /// Least-squares coefficients of c0 + c1 t + c2 t^2.
    pub coefficients: [f64; 3],
    pub t_at_minimum: f64,
    pub minimum_at_zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub manifold: Manifold,
    pub dmax: u32,
    pub round_value: f64,
    pub lower_bound: f64,
    pub rows: Vec<ScanRow>,
    pub fits: Vec<ScanFit>,
    pub pass: bool,
}

fn fit_quadratic(ts: &[f64], ys: &[f64]) -> [f64; 3] {
    let m = DMatrix::from_fn(ts.len(), 3, |i, j| ts[i].powi(j as i32));
    let y = nalgebra::DVector::from_column_slice(ys);
    match m.clone().svd(true, true).solve(&y, 1e-14) {
        Ok(c) => [c[0], c[1], c[2]],
        Err(_) => [f64::NAN; 3],
    }
}

/// Normalized mu1 over q x t, with the refinement dmax -> dmax + 1 at each
/// point. A q passes when its t = 0 value is the grid minimum, every value
/// respects the lower bound and every refinement delta is small.
pub fn optimality_scan(
    manifold: Manifold,
    q_list: &[(String, SphereScalar)],
    t_grid: &[f64],
    dmax: u32,
) -> Result<ScanReport> {
    if dmax >= MAX_DMAX {
        return Err(HopfError::DegreeOverflow { degree: dmax + 1, limit: MAX_DMAX });
    }
    let per_q: Vec<Result<(Vec<ScanRow>, ScanFit)>> = q_list
        .par_iter()
        .map(|(id, q)| {
            let coarse = PencilFamily::new(manifold, q, dmax)?;
            let fine = PencilFamily::new(manifold, q, dmax + 1)?;
            let mut rows = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                let cf = ConformalFactor::new(q.clone(), t)?;
                let vol = cf.volume(manifold)?.cbrt();
                let mu = coarse.at(t).mu1()?;
                let mu_fine = fine.at(t).mu1()?;
                let delta = (mu_fine - mu).abs();
                let normalized = mu * vol;
                rows.push(ScanRow {
                    manifold,
                    q_id: id.clone(),
                    t,
                    dmax,
                    mu1: mu,
                    mu1_normalized: normalized,
                    refinement_delta: delta,
                    pass: delta < REFINEMENT_TOL && normalized >= conformal_lower_bound(),
                });
            }
            let ys: Vec<f64> = rows.iter().map(|r| r.mu1_normalized).collect();
            let min_row = rows.iter().min_by(|a, b| a.mu1_normalized.total_cmp(&b.mu1_normalized)).expect("nonempty grid");
            let at_zero = rows.iter().find(|r| r.t == 0.0).map(|r| r.mu1_normalized);
            let minimum_at_zero = at_zero.is_some_and(|z| z <= min_row.mu1_normalized + MINIMUM_TOL);
            let fit = ScanFit {
                q_id: id.clone(),
                coefficients: fit_quadratic(t_grid, &ys),
                t_at_minimum: min_row.t,
                minimum_at_zero,
            };
            Ok((rows, fit))
        })
        .collect();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for r in per_q {
        let (r, f) = r?;
        rows.extend(r);
        fits.push(f);
    }
    let pass = !q_list.is_empty()
        && t_grid.contains(&0.0)
        && rows.iter().all(|r| r.pass)
        && fits.iter().all(|f| f.minimum_at_zero);
    Ok(ScanReport {
        manifold,
        dmax,
        round_value: round_value(manifold),
        lower_bound: conformal_lower_bound(),
        rows,
        fits,
        pass,
    })
}

/// Seeded polynomials of degree <= 2 with coefficients in (1/64)Z and
/// sup norm at most 1. Only even ones when `even_only`.
pub fn random_quadratics(count: usize, seed: u64, even_only: bool) -> Vec<(String, SphereScalar)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut p = Poly::<f64>::zero();
            p.add_term([0, 0, 0, 0], rng.gen_range(-1.0..1.0));
            for d in 1..=2 {
                if even_only && d == 1 {
                    continue;
                }
                for e in crate::exact::monomials_of_degree(d) {
                    p.add_term(e, rng.gen_range(-1.0..1.0));
                }
            }
            let s = SphereScalar::canonicalize(&p);
            let sup = probe_grid().points().iter().map(|x| s.eval(x).abs()).fold(0.0, f64::max);
            let scale = 1.0 / (sup * 1.05);
            let mut exact = Poly::<Rational>::zero();
            for (e, c) in p.terms() {
                let k = (c * scale * 64.0).round() as i64;
                if k != 0 {
                    exact.add_term(*e, ratio(k, 64));
                }
            }
            (format!("q{i}"), SphereScalar::canonicalize(&exact))
        })
        .collect()
}

/// The image of u under the isomorphism X = (1+tq)^{-3} u, which preserves
/// helicity and the L^{3/2} norm when the second is measured in F g0.
#[derive(Clone, Debug)]
pub struct WeightedField {
    pub field: FrameField<f64>,
    /// X = sqrt_factor^power * field.
    pub power: i32,
    pub factor: ConformalFactor,
}

pub fn conformal_pushforward(u: &FrameField<f64>, cf: &ConformalFactor) -> WeightedField {
    WeightedField { field: u.clone(), power: -3, factor: cf.clone() }
}

impl WeightedField {
    pub fn eval(&self, x: &[f64; 4]) -> [f64; 3] {
        let w = self.factor.sqrt_factor(x).powi(self.power);
        self.field.eval_coeffs(x).map(|v| v * w)
    }

    /// int |X|_g^{3/2} dV_g with g = (1+tq)^2 g0.
    pub fn l32_energy(&self, q: QuadratureSpec) -> f64 {
        let c = CompiledField::new(&self.field);
        let p = self.power;
        let cf = &self.factor;
        grid(q).integrate(|x| {
            let phi = cf.sqrt_factor(x);
            let v = c.eval(x);
            (phi * phi.powi(p)).powf(1.5) * dot3(&v, &v).powf(0.75) * phi.powi(3)
        })
    }

    /// int g(Y, X) dV_g where curl_g Y = X, using
    /// curl_g Y = phi^{-3} curl_0(phi^2 Y).
    pub fn helicity(&self, q: QuadratureSpec) -> Result<f64> {
        if self.power != -3 {
            return Err(HopfError::Invalid("helicity needs the flux-preserving weight".into()));
        }
        let pot = curl_inverse_f64(&self.field)?;
        let cp = CompiledField::new(&pot);
        let cu = CompiledField::new(&self.field);
        let cf = &self.factor;
        Ok(grid(q).integrate(|x| {
            let phi = cf.sqrt_factor(x);
            let y = cp.eval(x).map(|v| v / (phi * phi));
            let xx = cu.eval(x).map(|v| v * phi.powi(-3));
            phi.powi(5) * dot3(&y, &xx)
        }))
    }
}

/// curl^{-1} on exact floating fields in the solver's range.
pub fn curl_inverse_f64(f: &FrameField<f64>) -> Result<FrameField<f64>> {
    let s = crate::atlas::default_solver();
    let mut out = FrameField::zero();
    for mu in s.spectrum() {
        if mu != 0 {
            out = &out + &s.project_f64(f, mu)?.scale(&(1.0 / mu as f64));
        }
    }
    Ok(out)
}

/// The metric kappa |u| g0 built from a nonvanishing field, with the
/// checks that it keeps the volume and gives the transported field
/// constant norm 1/kappa.
#[derive(Clone, Debug, Serialize)]
pub struct MinimizerMetric {
    pub kappa: f64,
    pub min_speed: f64,
    pub volume: f64,
    pub volume_error: f64,
    /// max | |X|_g - 1/kappa | over the grid for X = (kappa|u|)^{-3/2} u.
    pub norm_deviation: f64,
    #[serde(skip)]
    field: FrameField<f64>,
}

impl MinimizerMetric {
    /// The conformal weight kappa |u(x)|.
    pub fn weight(&self, x: &[f64; 4]) -> f64 {
        let v = self.field.eval_coeffs(x);
        self.kappa * dot3(&v, &v).sqrt()
    }
}

pub fn metric_from_minimizer(u: &FrameField<f64>, q: QuadratureSpec) -> Result<MinimizerMetric> {
    let g = grid(q);
    let c = CompiledField::new(u);
    let speed = |x: &[f64; 4]| {
        let v = c.eval(x);
        dot3(&v, &v).sqrt()
    };
    let min_speed = g.points().par_iter().map(speed).reduce(|| f64::INFINITY, f64::min);
    if min_speed <= 1e-12 {
        return Err(HopfError::VanishingField);
    }
    let vol0 = Manifold::S3.round_volume();
    let energy = g.integrate(|x| speed(x).powf(1.5));
    let kappa = (vol0 / energy).powf(2.0 / 3.0);
    let volume = g.integrate(|x| (kappa * speed(x)).powf(1.5));
    let norm_deviation = g
        .points()
        .par_iter()
        .map(|x| {
            let w = kappa * speed(x);
            // |X|_g = sqrt(w) |X|_0 with X = w^{-3/2} u
            (w.sqrt() * w.powf(-1.5) * speed(x) - 1.0 / kappa).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(MinimizerMetric {
        kappa,
        min_speed,
        volume,
        volume_error: (volume - vol0).abs(),
        norm_deviation,
        field: u.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_x1x1_minus_x2x2() -> SphereScalar {
        SphereScalar::parse("x1^2 - x2^2").unwrap()
    }

    fn multiplicities(ev: &[f64]) -> Vec<(i64, usize)> {
        let mut out: Vec<(i64, usize)> = Vec::new();
        for v in ev {
            let k = v.round() as i64;
            assert!((v - k as f64).abs() < 1e-12, "{v}");
            match out.last_mut() {
                Some((m, n)) if *m == k => *n += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    #[test]
    fn round_spectrum_s3() {
        let p = assemble_pencil(Manifold::S3, &ConformalFactor::round(), 3).unwrap();
        let m = multiplicities(&p.nonzero_eigenvalues().unwrap());
        assert_eq!(m, vec![(-5, 24), (-4, 15), (-3, 8), (-2, 3), (2, 3), (3, 8), (4, 15), (5, 24)]);
        assert_eq!(p.eigenvalues().unwrap().len() - 100, p.gradient_dim);
    }

    #[test]
    fn round_spectrum_rp3() {
        let p = assemble_pencil(Manifold::Rp3, &ConformalFactor::round(), 3).unwrap();
        let m = multiplicities(&p.nonzero_eigenvalues().unwrap());
        assert_eq!(m, vec![(-4, 15), (-2, 3), (2, 3), (4, 15)]);
    }

    #[test]
    fn round_normalized_values() {
        let cf = ConformalFactor::round();
        let s3 = mu1_normalized(Manifold::S3, &cf, 3).unwrap();
        assert!((s3 - 2.0 * (2.0 * PI * PI).cbrt()).abs() < 1e-10);
        let rp3 = mu1_normalized(Manifold::Rp3, &cf, 3).unwrap();
        assert!((rp3 - 2.0 * PI.powf(2.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn odd_q_rejected_on_rp3() {
        let cf = ConformalFactor::new(SphereScalar::parse("x1").unwrap(), 0.01).unwrap();
        assert!(matches!(assemble_pencil(Manifold::Rp3, &cf, 2), Err(HopfError::Parity(_))));
    }

    #[test]
    fn b_moves_linearly_in_t() {
        let q = q_x1x1_minus_x2x2();
        let b0 = assemble_pencil(Manifold::S3, &ConformalFactor::new(q.clone(), 0.0).unwrap(), 2).unwrap().b;
        let b1 = assemble_pencil(Manifold::S3, &ConformalFactor::new(q.clone(), 0.01).unwrap(), 2).unwrap().b;
        let b2 = assemble_pencil(Manifold::S3, &ConformalFactor::new(q, 0.02).unwrap(), 2).unwrap().b;
        let d1 = (&b1 - &b0).norm();
        let d2 = (&b2 - &b0).norm();
        assert!(d1 > 0.0 && (d2 - 2.0 * d1).abs() < 1e-12 * d2);
    }

    #[test]
    fn perturbed_value_above_round() {
        let cf = ConformalFactor::new(q_x1x1_minus_x2x2(), 0.02).unwrap();
        let v = mu1_normalized(Manifold::S3, &cf, 4).unwrap();
        assert!(v >= round_value(Manifold::S3), "{v}");
    }

    #[test]
    fn volume_exact_coefficients() {
        let cf = ConformalFactor::new(SphereScalar::parse("x1").unwrap(), 0.1).unwrap();
        // int (1 + t x1)^3 = 2 pi^2 + 3 t^2 pi^2 / 2
        let v = cf.volume(Manifold::S3).unwrap();
        assert!((v - (2.0 * PI * PI + 3.0 * 0.01 * PI * PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn positivity_enforced() {
        assert!(ConformalFactor::new(SphereScalar::parse("x1").unwrap(), 1.5).is_err());
    }

    #[test]
    fn pushforward_preserves_norm_and_helicity() {
        let q = QuadratureSpec::default();
        let b1 = FrameField::<f64>::basis(0);
        let cf = ConformalFactor::new(q_x1x1_minus_x2x2(), 0.05).unwrap();
        let x = conformal_pushforward(&b1, &cf);
        let e0 = crate::functionals::l32_energy(&b1, q);
        assert!((x.l32_energy(q) - e0).abs() < 1e-8 * e0);
        assert!((x.helicity(q).unwrap() - PI * PI).abs() < 1e-10);
        let id = conformal_pushforward(&b1, &ConformalFactor::round());
        assert_eq!(id.eval(&[0.5, 0.5, 0.5, 0.5]), b1.eval_coeffs(&[0.5, 0.5, 0.5, 0.5]));
    }

    #[test]
    fn minimizer_metrics() {
        let q = QuadratureSpec::default();
        let m = metric_from_minimizer(&FrameField::basis(0), q).unwrap();
        assert!((m.kappa - 1.0).abs() < 1e-12 && m.norm_deviation < 1e-10);
        let m = metric_from_minimizer(&FrameField::<f64>::basis(0).scale(&2.0), q).unwrap();
        assert!((m.kappa - 0.5).abs() < 1e-12);
        assert!((m.weight(&[1.0, 0.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
        let u = &FrameField::<f64>::basis(0) + &orthonormal_basis(3).unwrap()[4].scale(&0.1);
        let m = metric_from_minimizer(&u, q).unwrap();
        assert!(m.volume_error < 1e-10 * m.volume && m.norm_deviation < 1e-10);
        assert!(metric_from_minimizer(&FrameField::zero(), q).is_err());
    }

    #[test]
    fn random_quadratics_bounded() {
        for (_, q) in random_quadratics(4, 7, true) {
            assert!(q.odd_part().is_zero());
            assert!(ConformalFactor::new(q, 0.5).is_ok());
        }
    }
}
