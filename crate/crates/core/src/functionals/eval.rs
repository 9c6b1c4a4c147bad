//! Flattened polynomial fields for fast pointwise evaluation on grids.

use crate::exact::Coeff;
use crate::frame::FrameField;

const MAX_DEG: usize = 15;

/// Frame coefficients of a field as flat term lists.
#[derive(Clone, Debug)]
pub struct CompiledField {
    terms: [Vec<([u8; 4], f64)>; 3],
    degree: usize,
}

/// Powers x_v^k for k <= degree.
pub struct Powers([[f64; MAX_DEG + 1]; 4]);

impl Powers {
    pub fn new(x: &[f64; 4], degree: usize) -> Self {
        let mut p = [[1.0; MAX_DEG + 1]; 4];
        for v in 0..4 {
            for k in 1..=degree {
                p[v][k] = p[v][k - 1] * x[v];
            }
        }
        Powers(p)
    }

    #[inline]
    fn monomial(&self, e: &[u8; 4]) -> f64 {
        self.0[0][e[0] as usize] * self.0[1][e[1] as usize] * self.0[2][e[2] as usize] * self.0[3][e[3] as usize]
    }
}

impl CompiledField {
    pub fn new<T: Coeff>(f: &FrameField<T>) -> Self {
        let mut degree = 0;
        let terms = std::array::from_fn(|c| {
            let p = f.f[c].poly();
            p.terms()
                .filter_map(|(e, v)| {
                    let v = v.to_f64();
                    if v == 0.0 {
                        return None;
                    }
                    degree = degree.max(e.iter().sum::<u32>() as usize);
                    assert!(e.iter().all(|&k| (k as usize) <= MAX_DEG), "degree beyond evaluator table");
                    Some(([e[0] as u8, e[1] as u8, e[2] as u8, e[3] as u8], v))
                })
                .collect()
        });
        CompiledField { terms, degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval_with(&self, p: &Powers) -> [f64; 3] {
        std::array::from_fn(|c| self.terms[c].iter().map(|(e, v)| v * p.monomial(e)).sum())
    }

    pub fn eval(&self, x: &[f64; 4]) -> [f64; 3] {
        self.eval_with(&Powers::new(x, self.degree))
    }
}

/// A family of fields evaluated together at each node.
pub struct CompiledFamily {
    fields: Vec<CompiledField>,
    degree: usize,
}

impl CompiledFamily {
    pub fn new<T: Coeff>(fields: &[FrameField<T>]) -> Self {
        let fields: Vec<CompiledField> = fields.iter().map(CompiledField::new).collect();
        let degree = fields.iter().map(|f| f.degree).max().unwrap_or(0);
        CompiledFamily { fields, degree }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn eval(&self, x: &[f64; 4]) -> Vec<[f64; 3]> {
        let p = Powers::new(x, self.degree);
        self.fields.iter().map(|f| f.eval_with(&p)).collect()
    }
}

#[inline]
pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::explicit_basis;

    #[test]
    fn agrees_with_direct_evaluation() {
        let e = explicit_basis(5).unwrap();
        let x = [0.3, -0.5, 0.1, (1.0f64 - 0.35).sqrt()];
        for f in &e.fields {
            let c = CompiledField::new(f);
            let a = c.eval(&x);
            let b = f.eval_coeffs(&x);
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-13);
            }
        }
    }
}
