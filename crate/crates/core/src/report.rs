//! Batch verification runs: configuration, check records and the seven
//! report commands.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annulus::{annulus_table, bound_constants};
use crate::atlas::{
    decompose_with, eigenspace_solve_with, explicit_atlas, AtlasEntry, EigenSolver, DEFAULT_DMAX_LIMIT,
};
use crate::conformal::{
    optimality_scan, random_quadratics, round_value, Manifold, DEFAULT_T_GRID, MAX_DMAX, MINIMUM_TOL, REFINEMENT_TOL,
};
use crate::exact::{int, ratio, ExactScalar};
use crate::frame::FrameField;
use crate::functionals::identities::{identity_table, IdentityRow};
use crate::functionals::scan::{local_max_scan, rp3_second_variation_scan, INCREASE_TOL, SECOND_VARIATION_BOUND};
use crate::functionals::sixth::{balanced_b, d6f_z2_coefficient, weighted_sixth_order};
use crate::functionals::{dE_at_hopf, dF_at_hopf, fd_energy_derivative, fd_f_derivative, hopf_prefactor, HopfPerturbation};
use crate::quadrature::QuadratureSpec;
use crate::torus::{abc_field, abc_speed_direction, first_variation, speed_is_constant, torus_pencil};
use crate::{HopfError, Result};

/// Anchor strings a record may carry; each names the identity or scan it
/// instantiates.
pub const ANCHORS: &[&str] = &[
    "curl-eigen-equation",
    "atlas-gram-diagonal",
    "eigenspace-multiplicity",
    "eigen-decomposition",
    "hopf-helicity",
    "z2-helicity-third",
    "z2-b1-square",
    "z2-quartic-moments",
    "minus3-b1-square",
    "five-b1-sharp-constant",
    "antihopf-z2-cubic",
    "b1-w3-norm",
    "antihopf-w3-pairing",
    "w3-z2-cubic",
    "second-order-split",
    "correction-norm",
    "higher-mode-lower-bound",
    "energy-derivatives",
    "functional-derivatives",
    "sixth-derivative-z2",
    "weighted-sixth-order",
    "local-maximality",
    "rp3-second-variation",
    "conformal-round-value",
    "conformal-minimum-at-round",
    "conformal-refinement",
    "conformal-lower-bound",
    "torus-speed",
    "torus-first-variation",
    "torus-pencil-derivative",
    "annulus-first-eigenvalue",
    "annulus-spectral-floor",
    "annulus-volume",
    "euclidean-lower-bound",
    "bound-comparison",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyAtlas,
    VerifyIdentities,
    TaylorCheck,
    LocalMaxScan,
    OptimalityScan,
    Annulus,
    Bounds,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyAtlas,
        Command::VerifyIdentities,
        Command::TaylorCheck,
        Command::LocalMaxScan,
        Command::OptimalityScan,
        Command::Annulus,
        Command::Bounds,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyAtlas => "verify-atlas",
            Command::VerifyIdentities => "verify-identities",
            Command::TaylorCheck => "taylor-check",
            Command::LocalMaxScan => "local-max-scan",
            Command::OptimalityScan => "optimality-scan",
            Command::Annulus => "annulus",
            Command::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = HopfError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HopfError::Invalid(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = HopfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(HopfError::Invalid(format!("unknown format {s:?}"))),
        }
    }
}

/// Everything a run depends on. Missing keys take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    /// Tolerance of exact checks; 0 demands equality.
    pub tol_exact: f64,
    /// Tolerance of floating values against closed forms.
    pub tol_float: f64,
    pub dmax: u32,
    pub quadrature: QuadratureSpec,
    pub manifold: Manifold,
    /// Sup-norm radius and sample count of the local maximality scan.
    pub radius: f64,
    pub samples: usize,
    /// Draws of the second-variation scan.
    pub variation_samples: usize,
    /// Random directions of the derivative comparison.
    pub directions: usize,
    /// Conformal factors per optimality scan.
    pub q_count: usize,
    pub t_grid: Vec<f64>,
    /// Wavevector cutoff of the torus trial space.
    pub kmax: u32,
    pub n_max: u32,
    /// Largest |lambda| listed per annulus.
    pub cutoff: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Copy per-section wall times into the records (breaks determinism).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::VerifyAtlas,
            seed: 2024,
            tol_exact: 0.0,
            tol_float: 1e-10,
            dmax: 3,
            quadrature: QuadratureSpec::default(),
            manifold: Manifold::S3,
            radius: 0.05,
            samples: 200,
            variation_samples: 100,
            directions: 10,
            q_count: 10,
            t_grid: DEFAULT_T_GRID.to_vec(),
            kmax: 2,
            n_max: 10,
            cutoff: 4.0,
            out: None,
            format: Format::Json,
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn for_command(command: Command) -> Self {
        RunConfig { command, ..Default::default() }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| HopfError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HopfError::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| HopfError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| HopfError::Parse(e.to_string()))
    }

    /// Rejects configurations no command can run.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HopfError::Invalid(m));
        if !(self.tol_exact >= 0.0 && self.tol_float >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed must fit in a signed 64-bit integer".into());
        }
        if self.quadrature.radial_order == 0 || self.quadrature.angular_order == 0 {
            return bad("quadrature orders must be positive".into());
        }
        match self.command {
            Command::VerifyAtlas if self.dmax > DEFAULT_DMAX_LIMIT => {
                bad(format!("dmax {} exceeds {}", self.dmax, DEFAULT_DMAX_LIMIT))
            }
            Command::TaylorCheck if self.directions == 0 => bad("directions must be positive".into()),
            Command::LocalMaxScan if !(self.radius > 0.0) || self.samples == 0 || self.variation_samples == 0 => {
                bad("local-max-scan needs a positive radius and sample counts".into())
            }
            Command::OptimalityScan if self.manifold != Manifold::T3 => {
                if self.dmax >= MAX_DMAX {
                    bad(format!("dmax must be below {MAX_DMAX} (the scan refines to dmax + 1)"))
                } else if self.q_count == 0 || !self.t_grid.contains(&0.0) {
                    bad("optimality-scan needs q_count > 0 and t = 0 in the grid".into())
                } else if self.t_grid.iter().any(|t| !t.is_finite() || t.abs() >= 0.5) {
                    bad("t values must satisfy |t| < 1/2".into())
                } else {
                    Ok(())
                }
            }
            Command::OptimalityScan if self.kmax == 0 => bad("kmax must be positive".into()),
            Command::Annulus if self.n_max == 0 || !(self.cutoff >= 1.0) => {
                bad("annulus needs n_max >= 1 and cutoff >= 1".into())
            }
            _ => Ok(()),
        }
    }
}

/// One verified quantity. `rel_err` is the error relative to a reference
/// magnitude (|expected| unless stated otherwise), or the absolute error
/// when that magnitude is zero; `pass` holds exactly when `rel_err <= tol`.
/// One-sided checks store the amount of violation as the error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    /// Closed form as `p/q * pi^k` terms, or an expression when irrational.
    pub expected_exact: String,
    pub expected: f64,
    pub computed: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
    pub wall_time_ms: Option<f64>,
}

impl CheckRecord {
    /// Two-sided comparison; relative when `expected != 0`.
    pub fn compare(id: impl Into<String>, anchor: &str, exact: impl Into<String>, expected: f64, computed: f64, tol: f64) -> Self {
        let abs_err = (computed - expected).abs();
        let rel_err = if expected != 0.0 { abs_err / expected.abs() } else { abs_err };
        Self::finish(id.into(), anchor, exact.into(), expected, computed, abs_err, rel_err, tol)
    }

    /// Relative error against `max(|expected|, scale)`, for quantities that
    /// can vanish.
    pub fn scaled(id: impl Into<String>, anchor: &str, exact: impl Into<String>, expected: f64, computed: f64, scale: f64, tol: f64) -> Self {
        let abs_err = (computed - expected).abs();
        let rel_err = abs_err / expected.abs().max(scale).max(f64::MIN_POSITIVE);
        Self::finish(id.into(), anchor, exact.into(), expected, computed, abs_err, rel_err, tol)
    }

    /// |computed - expected| <= abs_tol, stored as a relative tolerance.
    pub fn absolute(id: impl Into<String>, anchor: &str, exact: impl Into<String>, expected: f64, computed: f64, abs_tol: f64) -> Self {
        let tol = if expected != 0.0 { abs_tol / expected.abs() } else { abs_tol };
        Self::compare(id, anchor, exact, expected, computed, tol)
    }

    /// computed <= bound.
    pub fn at_most(id: impl Into<String>, anchor: &str, bound: f64, computed: f64) -> Self {
        let v = violation(computed - bound);
        let rel = if bound != 0.0 { v / bound.abs() } else { v };
        Self::finish(id.into(), anchor, format!("<= {bound:e}"), bound, computed, v, rel, 0.0)
    }

    /// computed >= bound.
    pub fn at_least(id: impl Into<String>, anchor: &str, bound: f64, computed: f64) -> Self {
        let v = violation(bound - computed);
        let rel = if bound != 0.0 { v / bound.abs() } else { v };
        Self::finish(id.into(), anchor, format!(">= {bound:e}"), bound, computed, v, rel, 0.0)
    }

    /// Exact equality of two counts or flags.
    pub fn exact(id: impl Into<String>, anchor: &str, exact: impl Into<String>, expected: f64, computed: f64, tol: f64) -> Self {
        Self::compare(id, anchor, exact, expected, computed, tol)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(id: String, anchor: &str, expected_exact: String, expected: f64, computed: f64, abs_err: f64, rel_err: f64, tol: f64) -> Self {
        CheckRecord {
            id,
            anchor: anchor.into(),
            expected_exact,
            expected,
            computed,
            abs_err,
            rel_err,
            tol,
            pass: rel_err.is_finite() && rel_err <= tol,
            wall_time_ms: None,
        }
    }
}

/// Positive part, keeping NaN.
fn violation(d: f64) -> f64 {
    if d.is_nan() {
        d
    } else {
        d.max(0.0)
    }
}

impl From<IdentityRow> for CheckRecord {
    fn from(r: IdentityRow) -> Self {
        CheckRecord {
            id: format!("identity.{}", r.id),
            pass: r.pass && r.rel_err.is_finite() && r.rel_err <= r.tol,
            anchor: r.anchor,
            expected_exact: r.expected_exact,
            expected: r.expected,
            computed: r.computed,
            abs_err: r.abs_err,
            rel_err: r.rel_err,
            tol: r.tol,
            wall_time_ms: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    /// Per section, in run order.
    pub sections: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub config: RunConfig,
    pub pass: bool,
    pub records: Vec<CheckRecord>,
    /// Diagnostic values that are reported but not checked.
    pub notes: BTreeMap<String, f64>,
    /// The only non-deterministic part of a report.
    pub timing: Timing,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map(|s| s + "\n").map_err(|e| HopfError::Parse(e.to_string()))
    }

    /// Records only, in field order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r).map_err(|e| HopfError::Parse(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| HopfError::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HopfError::Parse(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Parses records written by [`Report::to_csv`].
pub fn records_from_csv(s: &str) -> Result<Vec<CheckRecord>> {
    csv::Reader::from_reader(s.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| HopfError::Parse(e.to_string()))
}

fn pi_exact(p: i64, q: i64, k: i32) -> String {
    ExactScalar::pi_pow(ratio(p, q), k).to_report_string()
}

struct Run<'a> {
    config: &'a RunConfig,
    records: Vec<CheckRecord>,
    notes: BTreeMap<String, f64>,
    timing: Timing,
}

impl Run<'_> {
    fn section(&mut self, name: &str, f: impl FnOnce(&mut Vec<CheckRecord>, &mut BTreeMap<String, f64>) -> Result<()>) -> Result<()> {
        let start = Instant::now();
        let first = self.records.len();
        f(&mut self.records, &mut self.notes)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        if self.config.timing {
            for r in &mut self.records[first..] {
                r.wall_time_ms = Some(ms);
            }
        }
        self.timing.sections.push((name.into(), ms));
        Ok(())
    }
}

/// Executes the configured command. Invalid configurations are rejected
/// before any work is done.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut run = Run { config, records: Vec::new(), notes: BTreeMap::new(), timing: Timing::default() };
    match config.command {
        Command::VerifyAtlas => verify_atlas(&mut run)?,
        Command::VerifyIdentities => run.section("identities", |r, _| {
            r.extend(identity_table(config.seed).into_iter().map(CheckRecord::from));
            Ok(())
        })?,
        Command::TaylorCheck => taylor_check(&mut run)?,
        Command::LocalMaxScan => local_max(&mut run)?,
        Command::OptimalityScan => optimality(&mut run)?,
        Command::Annulus => annulus(&mut run)?,
        Command::Bounds => run.section("bounds", |r, _| {
            r.extend(bounds_records(config.tol_float));
            Ok(())
        })?,
    }
    run.timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
    let pass = !run.records.is_empty() && run.records.iter().all(|r| r.pass);
    Ok(Report { command: config.command, config: config.clone(), pass, records: run.records, notes: run.notes, timing: run.timing })
}

fn eigen_residual(f: &FrameField, mu: i64) -> f64 {
    let r = &f.curl() - &f.scale(&int(mu));
    if r.is_zero() {
        0.0
    } else {
        r.to_f64().max_abs_coeff().max(f64::MIN_POSITIVE)
    }
}

fn verify_atlas(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let tol = cfg.tol_exact;
    run.section("eigen-equations", |recs, _| {
        for (mu, entry) in explicit_atlas().range(1..) {
            for (i, f) in entry.fields.iter().enumerate() {
                let id = format!("atlas.eigen.{mu}.{}", i + 1);
                recs.push(CheckRecord::exact(id, "curl-eigen-equation", "0", 0.0, eigen_residual(f, *mu), tol));
            }
        }
        for (mu, entry) in explicit_atlas() {
            let failures = entry.verify().len() as f64;
            recs.push(CheckRecord::exact(format!("atlas.gram.{mu}"), "atlas-gram-diagonal", "0", 0.0, failures, tol));
        }
        Ok(())
    })?;
    run.section("multiplicities", |recs, notes| {
        let rep = eigenspace_solve_with(cfg.dmax, false)?;
        notes.insert("gradient_dim".into(), rep.gradient_dim as f64);
        let top = cfg.dmax as i64 + 2;
        for mu in (2..=top).chain((2..=top).map(|m| -m)) {
            let want = AtlasEntry::expected_dim(mu);
            recs.push(CheckRecord::exact(
                format!("atlas.dim.{mu}"),
                "eigenspace-multiplicity",
                want.to_string(),
                want as f64,
                rep.dimension(mu) as f64,
                tol,
            ));
        }
        Ok(())
    })?;
    run.section("decomposition", |recs, _| {
        let solver = EigenSolver::new(cfg.dmax + 2)?;
        let top = cfg.dmax as i64 + 2;
        let mut mixed = FrameField::zero();
        let mut mixed_parts = BTreeMap::new();
        for (mu, entry) in explicit_atlas().iter().filter(|(m, _)| m.abs() <= top) {
            let f = entry.fields.iter().fold(FrameField::zero(), |acc, e| &acc + e);
            recs.push(CheckRecord::exact(
                format!("atlas.decompose.{mu}"),
                "eigen-decomposition",
                "0",
                0.0,
                decomposition_mismatches(&solver, &f, &BTreeMap::from([(*mu, f.clone())])),
                tol,
            ));
            mixed = &mixed + &entry.fields[0];
            mixed_parts.insert(*mu, entry.fields[0].clone());
        }
        recs.push(CheckRecord::exact(
            "atlas.decompose.mixed",
            "eigen-decomposition",
            "0",
            0.0,
            decomposition_mismatches(&solver, &mixed, &mixed_parts),
            tol,
        ));
        Ok(())
    })
}

/// Number of eigenvalues whose projection differs from the expected part;
/// an unresolved residual counts as one more.
fn decomposition_mismatches(solver: &EigenSolver, f: &FrameField, want: &BTreeMap<i64, FrameField>) -> f64 {
    match decompose_with(solver, f) {
        Ok(d) => {
            let keys: std::collections::BTreeSet<i64> = d.components.keys().chain(want.keys()).copied().collect();
            keys.into_iter().filter(|k| d.components.get(k) != want.get(k)).count() as f64
        }
        Err(_) => 1.0,
    }
}

/// Bound on |D(E or F)(B1)(W)| by Cauchy-Schwarz; first derivatives vanish
/// for W orthogonal to B1, so errors are measured against this scale.
fn first_order_scales(w: &FrameField<f64>) -> (f64, f64) {
    let b1w = (2.0 * PI * PI).sqrt() * w.norm_sq_f64().sqrt();
    let e0 = 2.0 * PI * PI;
    let f0 = e0.powf(4.0 / 3.0) / (PI * PI);
    (1.5 * b1w, f0 * 2.0 * b1w / (PI * PI))
}

/// Closed-form D^k E and D^k F at B1 against Richardson-extrapolated
/// central differences over seeded random directions; the worst direction
/// per (functional, order) is kept.
pub fn derivative_records(seed: u64, directions: usize, q: QuadratureSpec) -> Result<Vec<CheckRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<HopfPerturbation> = (0..directions).map(|_| HopfPerturbation::random(&mut rng, 1.0, true)).collect();
    let mut recs = Vec::new();
    for k in 1..=6 {
        let tol = if k <= 3 { 1e-5 } else { 1e-3 };
        let mut worst: [Option<CheckRecord>; 2] = [None, None];
        for w in &dirs {
            let f = w.assemble();
            let (se, sf) = if k == 1 { first_order_scales(&f) } else { (0.0, 0.0) };
            let e = CheckRecord::scaled(
                format!("taylor.dE.{k}"),
                "energy-derivatives",
                "",
                dE_at_hopf(k, w, q)?,
                fd_energy_derivative(&f, k, q),
                se,
                tol,
            );
            let g = CheckRecord::scaled(
                format!("taylor.dF.{k}"),
                "functional-derivatives",
                "",
                dF_at_hopf(k, w, q)?,
                fd_f_derivative(&f, k, q)?,
                sf,
                tol,
            );
            for (slot, r) in worst.iter_mut().zip([e, g]) {
                if slot.as_ref().is_none_or(|s| r.rel_err > s.rel_err || !r.rel_err.is_finite()) {
                    *slot = Some(r);
                }
            }
        }
        recs.extend(worst.into_iter().flatten());
    }
    Ok(recs)
}

/// The Z2 sextic coefficient of D^6 F(B1) and the weight-6 leading
/// coefficient under the balance relations, each against the transcribed
/// constant and against the value the binomial expansion gives.
pub fn sixth_order_records(a5: f64, a8: f64, q: QuadratureSpec) -> Result<Vec<CheckRecord>> {
    let pi4 = PI.powi(4);
    let d6 = d6f_z2_coefficient(a5, a8, q)?;
    let (b10, b12, b15) = balanced_b(a5, a8);
    let n3 = (a5 * a5 + a8 * a8).powi(3);
    let lead = weighted_sixth_order(a5, a8, b10, b12, b15, q)? / (hopf_prefactor() * n3);
    Ok(vec![
        CheckRecord::compare("taylor.d6f-z2", "sixth-derivative-z2", pi_exact(685, 36, -4), 685.0 / (36.0 * pi4), d6, 1e-8),
        CheckRecord::compare(
            "taylor.d6f-z2.expansion",
            "sixth-derivative-z2",
            pi_exact(-145, 18, -4),
            -145.0 / (18.0 * pi4),
            d6,
            1e-8,
        ),
        CheckRecord::compare("taylor.weighted-leading", "weighted-sixth-order", pi_exact(11, 32, -4), 11.0 / (32.0 * pi4), lead, 1e-6),
        CheckRecord::compare(
            "taylor.weighted-leading.expansion",
            "weighted-sixth-order",
            pi_exact(17, 144, -4),
            17.0 / (144.0 * pi4),
            lead,
            1e-6,
        ),
    ])
}

fn taylor_check(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    let q = cfg.quadrature;
    run.section("derivatives", |recs, _| {
        recs.extend(derivative_records(cfg.seed, cfg.directions, q)?);
        Ok(())
    })?;
    run.section("sixth-order", |recs, notes| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
        let (a5, a8): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        recs.extend(sixth_order_records(a5, a8, q)?);
        notes.insert("a5".into(), a5);
        notes.insert("a8".into(), a8);
        Ok(())
    })
}

fn local_max(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    run.section("local-max", |recs, notes| {
        let rep = local_max_scan(cfg.radius, cfg.samples, cfg.seed, cfg.quadrature)?;
        notes.insert("r_hopf".into(), rep.r_hopf);
        notes.insert("violations".into(), rep.violations.len() as f64);
        recs.push(CheckRecord::at_most("local-max.max-increase", "local-maximality", INCREASE_TOL, rep.max_delta));
        recs.push(CheckRecord::exact("local-max.violations", "local-maximality", "0", 0.0, rep.violations.len() as f64, 0.0));
        Ok(())
    })?;
    run.section("second-variation", |recs, notes| {
        let rep = rp3_second_variation_scan(cfg.variation_samples, cfg.seed)?;
        notes.insert("second_variation_min".into(), rep.min);
        notes.insert("second_variation_extremal".into(), rep.extremal);
        recs.push(CheckRecord::at_most("second-variation.max", "rp3-second-variation", SECOND_VARIATION_BOUND, rep.max));
        Ok(())
    })
}

fn optimality(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    if cfg.manifold == Manifold::T3 {
        return run.section("torus", |recs, notes| {
            let u = abc_field(1.0, 1.0, 1.0);
            let constant = speed_is_constant(&u).constant;
            recs.push(CheckRecord::exact("torus.abc-speed-constant", "torus-speed", "0", 0.0, constant as u8 as f64, 0.0));
            let fv = first_variation(&u, &abc_speed_direction())?;
            recs.push(CheckRecord::compare("torus.first-variation", "torus-first-variation", pi_exact(24, 1, 3), 24.0 * PI.powi(3), fv, 1e-12));
            let p = torus_pencil(&abc_speed_direction(), 0.0, cfg.kmax)?;
            notes.insert("first_multiplicity".into(), p.first_multiplicity as f64);
            notes.insert("mu1".into(), p.mu1);
            recs.push(CheckRecord::at_most("torus.min-derivative", "torus-pencil-derivative", -0.01, p.min_derivative));
            Ok(())
        });
    }
    let m = cfg.manifold;
    run.section(m.name(), |recs, notes| {
        let qs = random_quadratics(cfg.q_count, cfg.seed, m == Manifold::Rp3);
        let rep = optimality_scan(m, &qs, &cfg.t_grid, cfg.dmax)?;
        let exact = match m {
            Manifold::S3 => "2 * (2 * pi^2)^(1/3)",
            _ => "2 * pi^(2/3)",
        };
        notes.insert("lower_bound".into(), rep.lower_bound);
        for fit in &rep.fits {
            let rows: Vec<_> = rep.rows.iter().filter(|r| r.q_id == fit.q_id).collect();
            let zero = rows.iter().find(|r| r.t == 0.0).map_or(f64::NAN, |r| r.mu1_normalized);
            let min = rows.iter().map(|r| r.mu1_normalized).fold(f64::INFINITY, f64::min);
            let tag = format!("optimality.{}.{}", m.name(), fit.q_id);
            recs.push(CheckRecord::absolute(format!("{tag}.round"), "conformal-round-value", exact, round_value(m), zero, cfg.tol_float));
            recs.push(CheckRecord::at_most(format!("{tag}.minimum-gap"), "conformal-minimum-at-round", MINIMUM_TOL, zero - min));
            let delta = rows.iter().map(|r| r.refinement_delta).fold(0.0, f64::max);
            recs.push(CheckRecord::at_most(format!("{tag}.refinement"), "conformal-refinement", REFINEMENT_TOL, delta));
            recs.push(CheckRecord::at_least(format!("{tag}.lower-bound"), "conformal-lower-bound", rep.lower_bound, min));
            notes.insert(format!("{}.curvature", fit.q_id), fit.coefficients[2]);
        }
        Ok(())
    })
}

fn annulus(run: &mut Run) -> Result<()> {
    let cfg = run.config;
    run.section("annulus", |recs, _| {
        let vol = (2.0 * PI).powi(3);
        for row in annulus_table(cfg.n_max, cfg.cutoff)? {
            let n = row.n;
            let want = format!("1/{n}");
            let want = if n == 1 { "1".to_string() } else { want };
            let exact_match = row.mu1 == want;
            recs.push(CheckRecord::exact(
                format!("annulus.mu1.{n}"),
                "annulus-first-eigenvalue",
                want,
                1.0 / n as f64,
                if exact_match { 1.0 / n as f64 } else { row.mu1_value },
                cfg.tol_exact,
            ));
            let floor = row
                .modes
                .iter()
                .filter(|md| md.m1 * md.m1 + md.m2 * md.m2 > 0)
                .map(|md| md.lambda.abs())
                .fold(f64::INFINITY, f64::min);
            recs.push(CheckRecord::at_least(format!("annulus.floor.{n}"), "annulus-spectral-floor", 1.0, floor));
            recs.push(CheckRecord::compare(format!("annulus.volume.{n}"), "annulus-volume", pi_exact(8, 1, 3), vol, row.volume, cfg.tol_float));
        }
        Ok(())
    })
}

/// The three constants against direct evaluation, and the comparison.
pub fn bounds_records(tol: f64) -> Vec<CheckRecord> {
    let b = bound_constants();
    let tol = tol.min(1e-12);
    let direct = [2.0 * (2.0 * PI * PI).cbrt(), (4.0 * PI / 3.0).cbrt(), (16.0 / PI).cbrt()];
    let mut out: Vec<CheckRecord> = [&b.euclidean_new, &b.euclidean_old, &b.sphere_conformal]
        .into_iter()
        .zip(direct)
        .map(|(c, d)| CheckRecord::compare(format!("bounds.{}", c.name), "euclidean-lower-bound", format!("{} = ({})^(1/3)", c.expression, c.cube), d, c.value, tol))
        .collect();
    out.push(CheckRecord::at_least("bounds.improvement", "bound-comparison", b.euclidean_old.value, b.euclidean_new.value));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let mut c = RunConfig::for_command(Command::OptimalityScan);
        c.manifold = Manifold::Rp3;
        c.t_grid = vec![-0.03, 0.0, 0.1 + 0.2];
        c.out = Some("out/report.json".into());
        c.format = Format::Csv;
        c.seed = i64::MAX as u64;
        c.tol_float = 1.0 / 3.0;
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
        assert!(RunConfig::from_toml("nonsense = 1").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::for_command(Command::OptimalityScan);
        assert!(c.validate().is_ok());
        c.t_grid = vec![0.01];
        assert!(c.validate().is_err());
        c = RunConfig::for_command(Command::VerifyAtlas);
        c.dmax = 9;
        assert!(c.validate().is_err());
        c.command = Command::Bounds;
        c.tol_float = -1.0;
        assert!(run(&c).is_err());
    }

    #[test]
    fn record_pass_rule() {
        let r = CheckRecord::compare("a", "hopf-helicity", "1", 2.0, 2.0 + 1e-12, 1e-11);
        assert!(r.pass && r.rel_err < 1e-11);
        assert!(!CheckRecord::compare("a", "hopf-helicity", "1", 0.0, 1e-9, 1e-10).pass);
        assert!(CheckRecord::at_most("a", "local-maximality", -0.01, -0.02).pass);
        let r = CheckRecord::at_most("a", "local-maximality", -0.01, -0.005);
        assert!(!r.pass && (r.abs_err - 0.005).abs() < 1e-15);
        assert!(!CheckRecord::at_least("a", "bound-comparison", 1.0, f64::NAN).pass);
        let r = CheckRecord::absolute("a", "conformal-round-value", "", 5.0, 5.0 + 5e-11, 1e-10);
        assert!(r.pass);
        assert!(!CheckRecord::absolute("a", "conformal-round-value", "", 5.0, 5.0 + 2e-10, 1e-10).pass);
    }

    #[test]
    fn bounds_report() {
        let rep = run(&RunConfig::for_command(Command::Bounds)).unwrap();
        assert!(rep.pass && rep.exit_code() == 0);
        assert_eq!(rep.records.len(), 4);
        let csv = rep.to_csv().unwrap();
        assert!(csv.starts_with("id,anchor,expected_exact,expected,computed,abs_err,rel_err,tol,pass,wall_time_ms\n"));
        assert_eq!(records_from_csv(&csv).unwrap(), rep.records);
        let back: Report = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn anchors_are_listed() {
        let mut recs = bounds_records(1e-10);
        recs.extend(identity_table(3).into_iter().map(CheckRecord::from));
        for r in recs {
            assert!(ANCHORS.contains(&r.anchor.as_str()), "{}", r.anchor);
        }
    }

    #[test]
    fn command_names() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
            let s = serde_json::to_string(&c).unwrap();
            assert_eq!(s, format!("\"{}\"", c.name()));
        }
        assert!("scan".parse::<Command>().is_err());
    }
}
