//! Closed-form integral identities for perturbations of the Hopf field,
//! each checked on seeded random draws. Polynomial integrals use the exact
//! moment formula in floating point, so discrepancies are at roundoff level
//! unless an identity is wrong.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{ratio, ExactScalar, SphereScalar};
use crate::frame::FrameField;

use super::perturbation::{orthonormal_basis, random_eigenfield, HopfPerturbation};
use super::sixth::{correction_field, correction_norm_coeff};
use super::helicity_pairing;

/// Result of one identity over its draws; the worst draw is reported.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub id: String,
    pub anchor: String,
    pub expected_exact: String,
    pub expected: f64,
    pub computed: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub draws: usize,
    pub pass: bool,
}

struct Acc {
    id: &'static str,
    anchor: &'static str,
    exact: String,
    tol: f64,
    worst: Option<(f64, f64, f64, f64)>,
    draws: usize,
}

impl Acc {
    fn new(id: &'static str, anchor: &'static str, exact: String, tol: f64) -> Self {
        Acc { id, anchor, exact, tol, worst: None, draws: 0 }
    }

    /// Records one draw; `scale` normalizes the error when the expected
    /// value can be near zero.
    fn push(&mut self, expected: f64, computed: f64, scale: f64) {
        self.draws += 1;
        let abs = (computed - expected).abs();
        let rel = abs / expected.abs().max(scale).max(f64::MIN_POSITIVE);
        if self.worst.is_none_or(|w| rel > w.3) {
            self.worst = Some((expected, computed, abs, rel));
        }
    }

    fn finish(self) -> IdentityRow {
        let (expected, computed, abs_err, rel_err) = self.worst.unwrap_or((0.0, 0.0, 0.0, 0.0));
        IdentityRow {
            id: self.id.into(),
            anchor: self.anchor.into(),
            expected_exact: self.exact,
            expected,
            computed,
            abs_err,
            rel_err,
            tol: self.tol,
            draws: self.draws,
            pass: rel_err <= self.tol && rel_err.is_finite(),
        }
    }
}

fn pi_string(p: i64, q: i64, k: i32) -> String {
    ExactScalar::pi_pow(ratio(p, q), k).to_report_string()
}

fn int(s: &SphereScalar<f64>) -> f64 {
    s.integrate_f64()
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Random perturbation with Z2 restricted to span{u5, u8}.
fn draw(rng: &mut ChaCha8Rng) -> HopfPerturbation {
    let mut w = HopfPerturbation::random(rng, 1.0, false);
    w.a[5] = 0.0;
    w.a[6] = 0.0;
    w
}

/// Moments of Z2 = a5 u^5 + a8 u^8 normalized by powers of |Z2|^2.
pub fn z2_constant_rows(seed: u64, draws: usize) -> Vec<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-10;
    let mut rows = [
        Acc::new("z2-helicity", "z2-helicity-third", pi_string(1, 3, 0), tol),
        Acc::new("z2-b1-square", "z2-b1-square", pi_string(2, 3, 0), tol),
        Acc::new("z2-quartic", "z2-quartic-moments", pi_string(2, 3, -2), tol),
        Acc::new("z2-mixed-quartic", "z2-quartic-moments", pi_string(14, 27, -2), tol),
        Acc::new("z2-b1-quartic", "z2-quartic-moments", pi_string(4, 9, -2), tol),
    ];
    let p2 = PI * PI;
    let want = [1.0 / 3.0, 2.0 / 3.0, 2.0 / (3.0 * p2), 14.0 / (27.0 * p2), 4.0 / (9.0 * p2)];
    for _ in 0..draws {
        let (a5, a8) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let z = HopfPerturbation::from_a5_a8(a5, a8).z2();
        let n = z.norm_sq_f64();
        let s = z.b1_component();
        let q = z.norm_sq_pointwise();
        let s2 = s * s;
        let got = [
            helicity_pairing(&z, &z).expect("degree within solver range") / n,
            int(&s2) / n,
            int(&(&q * &q)) / (n * n),
            int(&(&q * &s2)) / (n * n),
            int(&(&s2 * &s2)) / (n * n),
        ];
        for ((r, w), g) in rows.iter_mut().zip(want).zip(got) {
            r.push(w, g, 0.0);
        }
    }
    rows.into_iter().map(Acc::finish).collect()
}

/// |B1.W|^2 = |W|^2 / 3 on the eigenvalue -3 space.
pub fn minus3_b1_row(seed: u64, draws: usize) -> IdentityRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Acc::new("minus3-b1-square", "minus3-b1-square", pi_string(1, 3, 0), 1e-10);
    for _ in 0..draws {
        let w = random_eigenfield(&mut rng, -3, 1.0).expect("eigenvalue -3");
        let s = w.b1_component();
        acc.push(1.0 / 3.0, int(&(s * s)) / w.norm_sq_f64(), 0.0);
    }
    acc.finish()
}

/// Quadratic form f of the B1-component norm on the eigenvalue-5 space in
/// each coordinate group.
fn group_form() -> Matrix4<f64> {
    let (r2, r6) = (2f64.sqrt(), 6f64.sqrt());
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 8.0 / 15.0;
    m[(3, 3)] = 8.0 / 15.0;
    m[(1, 1)] = 7.0 / 15.0;
    m[(2, 2)] = 7.0 / 15.0;
    for (i, j, v) in [(0, 1, -r2 / 30.0), (0, 2, r6 / 30.0), (2, 3, -r2 / 30.0), (1, 3, -r6 / 30.0)] {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    m
}

/// 1-based coordinate groups on which the form decouples.
pub const FIVE_GROUPS: [[usize; 4]; 4] = [[9, 22, 19, 12], [10, 23, 21, 15], [11, 17, 18, 14], [13, 20, 24, 16]];

/// Gram matrix of B1-components over the orthonormal eigenvalue-5 basis.
pub fn five_b1_gram() -> DMatrix<f64> {
    let b = orthonormal_basis(5).expect("eigenvalue 5");
    let n = b.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = int(&(b[i].b1_component() * b[j].b1_component()));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Sharp constant of |B1.W|^2 <= k |W|^2 on the eigenvalue-5 space, the
/// grouping identity, and the kernel dimension.
pub fn five_constant_rows(seed: u64, draws: usize) -> Vec<IdentityRow> {
    let g = five_b1_gram();
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let kernel = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-12).count();
    let f = group_form();
    let ftop = SymmetricEigen::new(f).eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let mut sharp = Acc::new("five-b1-sharp-constant", "five-b1-sharp-constant", pi_string(3, 5, 0), 1e-10);
    sharp.push(0.6, top, 0.0);
    let mut fmax = Acc::new("five-group-form-max", "five-b1-sharp-constant", pi_string(3, 5, 0), 1e-12);
    fmax.push(0.6, ftop, 0.0);
    let mut ker = Acc::new("five-b1-kernel-dim", "five-b1-sharp-constant", "8".into(), 0.0);
    ker.push(8.0, kernel as f64, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grp = Acc::new("five-group-identity", "five-b1-sharp-constant", "0".into(), 1e-10);
    for _ in 0..draws {
        let c: Vec<f64> = (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cv = nalgebra::DVector::from_vec(c.clone());
        let direct = (cv.transpose() * &g * &cv)[(0, 0)];
        let grouped: f64 = FIVE_GROUPS
            .iter()
            .map(|gr| {
                let v = nalgebra::Vector4::from_fn(|i, _| c[gr[i] - 1]);
                (v.transpose() * f * v)[(0, 0)]
            })
            .sum();
        grp.push(grouped, direct, sq(&c));
    }
    vec![sharp.finish(), fmax.finish(), ker.finish(), grp.finish()]
}

/// Cubic and quartic pairings among W_{-1}, Z2 and W3 against their
/// coordinate formulas.
pub fn pairing_rows(seed: u64, draws: usize) -> Vec<IdentityRow> {
    let (r2, r3, r6, r7, r14, r21) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt(), 7f64.sqrt(), 14f64.sqrt(), 21f64.sqrt());
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut se10 = Acc::new("z2-z2-antihopf-cubic", "antihopf-z2-cubic", "coordinate formula".into(), tol);
    let mut se13 = Acc::new("b1-w3-norm", "b1-w3-norm", "coordinate formula".into(), tol);
    let mut se14 = Acc::new("antihopf-w3-b1-pairing", "antihopf-w3-pairing", "coordinate formula".into(), tol);
    let mut se15 = Acc::new("w3-z2-quadratic-b1", "w3-z2-cubic", "coordinate formula".into(), tol);
    let mut se16 = Acc::new("w3-z2-quadratic-b2", "w3-z2-cubic", "coordinate formula".into(), tol);
    let mut se17 = Acc::new("w3-z2-quadratic-b3", "w3-z2-cubic", "coordinate formula".into(), tol);
    let mut l4 = Acc::new("second-order-split", "second-order-split", "coordinate formula".into(), tol);
    for _ in 0..draws {
        let w = draw(&mut rng);
        let (a5, a8) = (w.a[4], w.a[7]);
        let b = |i: usize| w.b[i - 1];
        let be = |j: usize| w.beta[j - 1];
        let z = w.z2();
        let wm = w.w_minus1();
        let w3 = w.w3();
        let (na, nb, nbe) = (a5 * a5 + a8 * a8, sq(&w.b), sq(&w.beta));

        let lhs = int(&(&z.f[0] * &(&(&z.f[1] * &wm.f[1]) + &(&z.f[2] * &wm.f[2]))));
        let rhs = 2.0 * r2 / (3.0 * PI) * (be(1) * a5 * a8 / 3.0 + be(3) * (a8 * a8 - a5 * a5) / 6.0);
        se10.push(rhs, lhs, na * nbe.sqrt());

        let lhs = int(&(&w3.f[0] * &w3.f[0]));
        let rhs = b(7).powi(2) / 2.0
            + (b(13).powi(2) + b(14).powi(2) + b(15).powi(2)) / 2.0
            + 2.0 / 3.0 * b(9).powi(2)
            + (4.0 / 7.0 * b(8).powi(2) + 2.0 / (7.0 * r3) * b(8) * b(10) + 25.0 / 42.0 * b(10).powi(2))
            + (4.0 / 7.0 * b(11).powi(2) + 2.0 / (7.0 * r3) * b(11) * b(12) + 25.0 / 42.0 * b(12).powi(2));
        se13.push(rhs, lhs, nb);

        let lhs = int(&(&wm.f[0] * &w3.f[0]));
        let rhs = (2.0 / 21.0f64).sqrt() * b(8) * be(1) + 4.0 * be(1) * b(10) / (3.0 * r14) - r2 / 3.0 * be(2) * b(9)
            + (2.0 / 21.0f64).sqrt() * b(11) * be(3)
            + 4.0 * be(3) * b(12) / (3.0 * r14);
        se14.push(rhs, lhs, (nb * nbe).sqrt());

        let s = &z.f[0];
        let q = z.norm_sq_pointwise();
        let lhs = 0.5 * int(&(&w3.f[0] * &(&(s * s) - &q.scale(&2.0))));
        let d = a5 * a5 - a8 * a8;
        let rhs = -(1.0 / (3.0 * PI))
            * (2.0 * b(8) * a5 * a8 / r21 - b(10) * a5 * a8 / r7 - b(11) * d / r21
                + b(12) * d / (2.0 * r7)
                + b(15) * na / (2.0 * r3));
        se15.push(rhs, lhs, na * nb.sqrt());

        let lhs = int(&(&(s * &z.f[1]) * &w3.f[1]));
        let rhs = 2.0 / (3.0 * PI)
            * (-b(3) * a5 * a8 / (2.0 * r6) + b(4) * a5 * a8 / (2.0 * r6) - b(6) * d / (4.0 * r3)
                - b(8) * a5 * a8 / (2.0 * r21)
                - b(10) * a5 * a8 / (3.0 * r7)
                + b(11) * d / (4.0 * r21)
                + b(12) * d / (6.0 * r7)
                + b(15) * na / (4.0 * r3));
        se16.push(rhs, lhs, na * nb.sqrt());

        let lhs = int(&(&(s * &z.f[2]) * &w3.f[2]));
        let rhs = 2.0 / (3.0 * PI)
            * ((b(3) - b(4)) * a5 * a8 / (2.0 * r6) + b(6) * d / (4.0 * r3) + b(8) * a5 * a8 / (2.0 * r21)
                - 5.0 * b(10) * a5 * a8 / (6.0 * r7)
                - b(11) * d / (4.0 * r21)
                + 5.0 * b(12) * d / (12.0 * r7));
        se17.push(rhs, lhs, na * nb.sqrt());

        let we = &wm + &w3;
        let h = helicity_pairing(&we, &we).expect("degree within solver range");
        let b1we = &we.f[0];
        let lhs = 2.0 * we.norm_sq_f64() - 4.0 * h - int(&(b1we * b1we));
        let rhs = 11.0 / 3.0 * wm.norm_sq_f64() + w3.norm_sq_f64()
            - int(&(&w3.f[0] * &w3.f[0]))
            - 2.0 * int(&(&wm.f[0] * &w3.f[0]));
        l4.push(rhs, lhs, nb + nbe);
    }
    [se10, se13, se14, se15, se16, se17, l4].into_iter().map(Acc::finish).collect()
}

/// |C|^2 / |Z2|^6 = 151/(90 pi^4) and div C = 0.
pub fn correction_rows(seed: u64, draws: usize) -> Vec<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut norm = Acc::new("correction-norm", "correction-norm", pi_string(151, 90, -4), 1e-8);
    let mut div = Acc::new("correction-divergence", "correction-norm", "0".into(), 1e-10);
    for _ in 0..draws {
        let (a5, a8) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (c, n) = correction_field(a5, a8);
        let n2 = a5 * a5 + a8 * a8;
        norm.push(correction_norm_coeff(), n / n2.powi(3), 0.0);
        div.push(0.0, c.divergence().max_abs_coeff(), 1.0);
    }
    vec![norm.finish(), div.finish()]
}

/// Margin of the lower bound
/// 2|W|^2 - 4H(W) - |B1.W|^2 >= (|W_{-4}|^2 + |W_6|^2)/3 + 3/7 |W_7|^2
///                               + 9/20 |W_5|^2 + 5/3 |W_{-3}|^2
/// for W = sum of components in the eigenvalue -4, -3, 5, 6, 7 spaces.
pub fn higher_mode_margin(parts: &[(i64, FrameField<f64>)]) -> (f64, f64) {
    let mut total = FrameField::zero();
    let mut h = 0.0;
    let mut rhs = 0.0;
    for (mu, f) in parts {
        total = &total + f;
        let n = f.norm_sq_f64();
        h += n / *mu as f64;
        rhs += n * match mu {
            -4 | 6 => 1.0 / 3.0,
            7 => 3.0 / 7.0,
            5 => 9.0 / 20.0,
            -3 => 5.0 / 3.0,
            _ => 0.0,
        };
    }
    let s = &total.f[0];
    let lhs = 2.0 * total.norm_sq_f64() - 4.0 * h - int(&(s * s));
    (lhs, rhs)
}

pub fn higher_mode_row(seed: u64, draws: usize) -> IdentityRow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, f64, f64)> = None;
    for _ in 0..draws {
        let w = HopfPerturbation::random(&mut rng, 1.0, true);
        let parts: Vec<(i64, FrameField<f64>)> = w.extra.into_iter().collect();
        let (lhs, rhs) = higher_mode_margin(&parts);
        let margin = (lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE);
        if worst.is_none_or(|x| margin < x.2) {
            worst = Some((rhs, lhs, margin));
        }
    }
    let (rhs, lhs, margin) = worst.unwrap_or((0.0, 0.0, 0.0));
    IdentityRow {
        id: "higher-mode-lower-bound".into(),
        anchor: "higher-mode-lower-bound".into(),
        expected_exact: "lhs >= rhs".into(),
        expected: rhs,
        computed: lhs,
        abs_err: (lhs - rhs).min(0.0).abs(),
        rel_err: (-margin).max(0.0),
        tol: 1e-12,
        draws,
        pass: margin >= -1e-12,
    }
}

/// H(B1) = pi^2 in exact arithmetic.
pub fn hopf_helicity_row() -> IdentityRow {
    let h = crate::atlas::helicity(&FrameField::basis(0)).expect("B1 is an eigenfield");
    let want = ExactScalar::pi_pow(ratio(1, 1), 2);
    let (e, c) = (want.to_f64(), h.to_f64());
    IdentityRow {
        id: "hopf-helicity".into(),
        anchor: "hopf-helicity".into(),
        expected_exact: want.to_report_string(),
        expected: e,
        computed: c,
        abs_err: (c - e).abs(),
        rel_err: (c - e).abs() / e,
        tol: 0.0,
        draws: 1,
        pass: h == want,
    }
}

/// The full identity table.
pub fn identity_table(seed: u64) -> Vec<IdentityRow> {
    let mut rows = vec![hopf_helicity_row()];
    rows.extend(z2_constant_rows(seed, 20));
    rows.push(minus3_b1_row(seed.wrapping_add(1), 20));
    rows.extend(five_constant_rows(seed.wrapping_add(2), 20));
    rows.extend(pairing_rows(seed.wrapping_add(3), 50));
    rows.extend(correction_rows(seed.wrapping_add(4), 10));
    rows.push(higher_mode_row(seed.wrapping_add(5), 100));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_form_top_eigenvalue() {
        let e = SymmetricEigen::new(group_form());
        let top = e.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
        assert!((top - 0.6).abs() < 1e-14);
    }

    #[test]
    fn small_tables_pass() {
        for r in z2_constant_rows(1, 3).into_iter().chain(pairing_rows(2, 3)).chain([minus3_b1_row(3, 3)]) {
            assert!(r.pass, "{r:?}");
        }
    }
}
