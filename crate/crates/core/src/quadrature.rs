//! Product-rule quadrature on S^3 in Hopf coordinates
//! x = (cos h cos a, cos h sin a, sin h cos b, sin h sin b).
//!
//! With u = sin^2 h the volume element becomes du da db / 2, and a monomial
//! restricted to the sphere is (1-u)^m u^n times a trigonometric polynomial
//! in (a, b). Gauss-Legendre in u and uniform points in each angle therefore
//! integrate polynomials exactly up to a known degree.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Orders of the product rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial_order: usize,
    pub angular_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { radial_order: 24, angular_order: 48 }
    }
}

impl QuadratureSpec {
    pub fn new(radial_order: usize, angular_order: usize) -> Self {
        assert!(radial_order > 0 && angular_order > 0, "quadrature orders must be positive");
        QuadratureSpec { radial_order, angular_order }
    }

    /// Exact polynomial degree in u.
    pub fn radial_exactness(&self) -> usize {
        2 * self.radial_order - 1
    }

    /// Exact trigonometric degree per angle.
    pub fn angular_exactness(&self) -> usize {
        self.angular_order - 1
    }

    /// Largest total degree of a polynomial on R^4 integrated exactly.
    pub fn polynomial_exactness(&self) -> usize {
        // x^e has u-degree <= |e|/2 and angular degree <= |e|
        (2 * self.radial_exactness() + 1).min(self.angular_exactness())
    }
}

#[derive(Clone, Debug)]
pub struct HopfGrid {
    pub spec: QuadratureSpec,
    /// Node coordinates, radial-major then first angle then second angle.
    points: Vec<[f64; 4]>,
    weights: Vec<f64>,
}

/// Compensated running sum.
#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Deterministic compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

impl HopfGrid {
    pub fn new(spec: QuadratureSpec) -> Self {
        let (gx, gw) = gauss_legendre(spec.radial_order);
        let na = spec.angular_order;
        let dang = 2.0 * PI / na as f64;
        let trig: Vec<(f64, f64)> = (0..na).map(|k| ((k as f64 * dang).cos(), (k as f64 * dang).sin())).collect();
        let mut points = Vec::with_capacity(spec.radial_order * na * na);
        let mut weights = Vec::with_capacity(points.capacity());
        for (x, w) in gx.iter().zip(&gw) {
            let u = 0.5 * (x + 1.0);
            let (c, s) = ((1.0 - u).sqrt(), u.sqrt());
            let wt = 0.5 * (0.5 * w) * dang * dang;
            for &(ca, sa) in &trig {
                for &(cb, sb) in &trig {
                    points.push([c * ca, c * sa, s * cb, s * sb]);
                    weights.push(wt);
                }
            }
        }
        HopfGrid { spec, points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    fn row_len(&self) -> usize {
        self.spec.angular_order
    }

    /// Integral of `f` over S^3. Rows of nodes are summed in parallel, then
    /// combined in a fixed order, so the result does not depend on
    /// scheduling.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64; 4]) -> f64 + Sync,
    {
        let rows: Vec<f64> = self
            .points
            .par_chunks(self.row_len())
            .zip(self.weights.par_chunks(self.row_len()))
            .map(|(pts, ws)| {
                let mut acc = Neumaier::default();
                for (p, w) in pts.iter().zip(ws) {
                    acc.add(w * f(p));
                }
                acc.value()
            })
            .collect();
        compensated_sum(rows)
    }

    /// Fallible version of [`HopfGrid::integrate`]; the first error in node
    /// order is returned.
    pub fn try_integrate<F, E>(&self, f: F) -> Result<f64, E>
    where
        F: Fn(&[f64; 4]) -> Result<f64, E> + Sync,
        E: Send,
    {
        let rows: Result<Vec<f64>, E> = self
            .points
            .par_chunks(self.row_len())
            .zip(self.weights.par_chunks(self.row_len()))
            .map(|(pts, ws)| {
                let mut acc = Neumaier::default();
                for (p, w) in pts.iter().zip(ws) {
                    acc.add(w * f(p)?);
                }
                Ok(acc.value())
            })
            .collect();
        Ok(compensated_sum(rows?))
    }

    /// Integrates `n` functions at once; `f` writes the values at a node.
    pub fn integrate_many<F>(&self, n: usize, f: F) -> Vec<f64>
    where
        F: Fn(&[f64; 4], &mut [f64]) + Sync,
    {
        let r: Result<Vec<f64>, std::convert::Infallible> = self.try_integrate_many(n, |x, out| {
            f(x, out);
            Ok(())
        });
        match r {
            Ok(v) => v,
            Err(e) => match e {},
        }
    }

    /// Fallible version of [`HopfGrid::integrate_many`].
    pub fn try_integrate_many<F, E>(&self, n: usize, f: F) -> Result<Vec<f64>, E>
    where
        F: Fn(&[f64; 4], &mut [f64]) -> Result<(), E> + Sync,
        E: Send,
    {
        let rows: Result<Vec<Vec<f64>>, E> = self
            .points
            .par_chunks(self.row_len())
            .zip(self.weights.par_chunks(self.row_len()))
            .map(|(pts, ws)| {
                let mut acc = vec![Neumaier::default(); n];
                let mut buf = vec![0.0; n];
                for (p, w) in pts.iter().zip(ws) {
                    f(p, &mut buf)?;
                    for (a, v) in acc.iter_mut().zip(&buf) {
                        a.add(w * v);
                    }
                }
                Ok(acc.iter().map(Neumaier::value).collect())
            })
            .collect();
        let rows = rows?;
        Ok((0..n).map(|k| compensated_sum(rows.iter().map(|r| r[k]))).collect())
    }
}

/// Integral of a pointwise evaluator over the grid.
pub fn integrate_scalar<F>(f: F, grid: &HopfGrid) -> f64
where
    F: Fn(&[f64; 4]) -> f64 + Sync,
{
    grid.integrate(f)
}

/// One row of a convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub spec: QuadratureSpec,
    pub value: f64,
    /// |value - previous value|; `None` for the first row.
    pub difference: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// True when the last difference is below the tolerance.
    pub converged: bool,
}

/// Integrates `f` at increasing orders and reports successive differences.
/// The table is flagged as non-converged when the last difference exceeds
/// `tol` relative to the last value (absolute when the value is tiny).
pub fn convergence_probe<F>(f: F, orders: &[QuadratureSpec], tol: f64) -> ConvergenceTable
where
    F: Fn(&[f64; 4]) -> f64 + Sync,
{
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for spec in orders {
        let value = HopfGrid::new(*spec).integrate(&f);
        let difference = rows.last().map(|r| (value - r.value).abs());
        rows.push(ConvergenceRow { spec: *spec, value, difference });
    }
    let converged = match rows.last() {
        Some(ConvergenceRow { value, difference: Some(d), .. }) => *d <= tol * value.abs().max(1.0),
        _ => false,
    };
    ConvergenceTable { rows, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // x^12 integrates to 2/13
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m - 2.0 / 13.0).abs() < 1e-14);
        for n in 1..4 {
            let (x, w) = gauss_legendre(n);
            assert_eq!(x.len(), n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn total_weight_is_volume() {
        let g = HopfGrid::new(QuadratureSpec::new(6, 10));
        assert!((g.total_weight() - 2.0 * PI * PI).abs() < 1e-14 * 2.0 * PI * PI);
        assert_eq!(g.len(), 600);
        for p in g.points() {
            let n: f64 = p.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reported_exactness() {
        let s = QuadratureSpec::default();
        assert_eq!(s.radial_exactness(), 47);
        assert_eq!(s.angular_exactness(), 47);
        assert_eq!(s.polynomial_exactness(), 47);
    }
}
