//! Exact curl eigensolver on frame fields with polynomial coefficients.
//!
//! Coefficients of degree <= D are represented by homogeneous polynomials of
//! degree D (even or odd part) and D-1 (the other part). Curl maps each block
//! (Hom_j)^3 to itself with an integer matrix, whose spectrum is known in
//! closed form. Spectral projections come from Lagrange interpolation in the
//! matrix over that spectrum, entirely in integer arithmetic.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{HopfError, Result};
use crate::exact::{monomials_of_degree, Exponent, Poly, Rational};
use crate::frame::FrameField;

const HOPF: [[(i64, usize); 4]; 3] = [
    [(-1, 1), (1, 0), (-1, 3), (1, 2)],
    [(-1, 2), (1, 3), (1, 0), (-1, 1)],
    [(-1, 3), (-1, 2), (1, 1), (1, 0)],
];

fn overflow() -> HopfError {
    HopfError::SpectrumIncomplete("integer overflow in projection numerators".into())
}

/// Candidate curl spectrum on (Hom_j)^3.
pub fn block_spectrum(j: u32) -> Vec<i64> {
    let j = j as i64;
    let mut out = Vec::new();
    let mut k = j;
    while k >= 0 {
        out.push(k + 2);
        if k + 2 <= j {
            out.push(-(k + 2));
        }
        k -= 2;
    }
    if j >= 1 {
        out.push(0);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Integer 4-moment numerators: the sphere integral of x^e for |e| = 2j is
/// `moment_numer(e) / (2^j (j+1)!)` times pi^2.
fn moment_numer(e: &Exponent) -> i128 {
    if e.iter().any(|a| a % 2 == 1) {
        return 0;
    }
    let mut m: i128 = 2;
    for &a in e {
        let mut k = a as i128 - 1;
        while k > 1 {
            m *= k;
            k -= 2;
        }
    }
    m
}

fn moment_denom(j: u32) -> BigInt {
    let mut d = BigInt::one() << (j as usize);
    for k in 2..=(j as i64 + 1) {
        d *= k;
    }
    d
}

/// One invariant block (Hom_j)^3.
pub struct CurlBlock {
    pub degree: u32,
    monos: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
    /// Columns of the curl matrix as (row, value) lists.
    columns: Vec<Vec<(usize, i64)>>,
    pub spectrum: Vec<i64>,
    /// Row-major numerators N_k with P_k = N_k / denominators[k].
    numerators: Vec<Vec<i128>>,
    denominators: Vec<i128>,
    proj_f64: Vec<Vec<f64>>,
    dims: Vec<usize>,
    gram: Vec<Vec<(usize, i128)>>,
}

impl CurlBlock {
    pub fn new(degree: u32) -> Result<Self> {
        let monos = monomials_of_degree(degree);
        let n = monos.len();
        let index: HashMap<Exponent, usize> = monos.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let dim = 3 * n;

        // derivative of x^e along B_i, as (monomial index, coefficient)
        let derive = |e: &Exponent, i: usize| -> Vec<(usize, i64)> {
            let mut out: Vec<(usize, i64)> = Vec::new();
            for (k, &(s, v)) in HOPF[i].iter().enumerate() {
                if e[k] == 0 {
                    continue;
                }
                let mut f = *e;
                f[k] -= 1;
                f[v] += 1;
                out.push((index[&f], s * e[k] as i64));
            }
            out
        };
        // (source component, target component, derivation, sign) from
        // curl F = 2F + (B2 f3 - B3 f2, B3 f1 - B1 f3, B1 f2 - B2 f1)
        const TERMS: [(usize, usize, usize, i64); 6] =
            [(2, 0, 1, 1), (1, 0, 2, -1), (0, 1, 2, 1), (2, 1, 0, -1), (1, 2, 0, 1), (0, 2, 1, -1)];
        let mut columns = Vec::with_capacity(dim);
        for c in 0..3 {
            for (a, e) in monos.iter().enumerate() {
                let mut col: HashMap<usize, i64> = HashMap::new();
                *col.entry(c * n + a).or_default() += 2;
                for &(src, tgt, der, sign) in &TERMS {
                    if src != c {
                        continue;
                    }
                    for (b, v) in derive(e, der) {
                        *col.entry(tgt * n + b).or_default() += sign * v;
                    }
                }
                let mut col: Vec<(usize, i64)> = col.into_iter().filter(|(_, v)| *v != 0).collect();
                col.sort_unstable();
                columns.push(col);
            }
        }

        let spectrum = block_spectrum(degree);
        let mut block = CurlBlock {
            degree,
            monos,
            index,
            columns,
            spectrum,
            numerators: Vec::new(),
            denominators: Vec::new(),
            proj_f64: Vec::new(),
            dims: Vec::new(),
            gram: Vec::new(),
        };
        block.build_projections()?;
        block.build_gram();
        Ok(block)
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// A * (M - lambda I) with M sparse by columns.
    fn times_shifted(&self, a: &[i128], lambda: i64) -> Result<Vec<i128>> {
        let n = self.dim();
        let mut out = vec![0i128; n * n];
        for i in 0..n {
            let row = &a[i * n..(i + 1) * n];
            for (j, col) in self.columns.iter().enumerate() {
                let mut s: i128 = row[j].checked_mul(-(lambda as i128)).ok_or_else(overflow)?;
                for &(k, v) in col {
                    s = s.checked_add(row[k].checked_mul(v as i128).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
                out[i * n + j] = s;
            }
        }
        Ok(out)
    }

    fn build_projections(&mut self) -> Result<()> {
        let n = self.dim();
        let mut identity = vec![0i128; n * n];
        for i in 0..n {
            identity[i * n + i] = 1;
        }
        let spec = self.spectrum.clone();
        for (k, &lk) in spec.iter().enumerate() {
            let mut num = identity.clone();
            let mut den: i128 = 1;
            for (l, &ll) in spec.iter().enumerate() {
                if l != k {
                    num = self.times_shifted(&num, ll)?;
                    den *= (lk - ll) as i128;
                }
            }
            if k == 0 {
                let full = self.times_shifted(&num, lk)?;
                if full.iter().any(|v| *v != 0) {
                    return Err(HopfError::SpectrumIncomplete(format!(
                        "minimal polynomial of the degree-{} block has roots outside {:?}",
                        self.degree, spec
                    )));
                }
            }
            let tr: i128 = (0..n).map(|i| num[i * n + i]).sum();
            if tr % den != 0 {
                return Err(HopfError::SpectrumIncomplete(format!("non-integral trace for eigenvalue {lk}")));
            }
            self.dims.push((tr / den) as usize);
            self.proj_f64.push(num.iter().map(|v| *v as f64 / den as f64).collect());
            self.numerators.push(num);
            self.denominators.push(den);
        }
        // sum of projections must be the identity
        let lcm = self.denominators.iter().fold(1i128, |a, b| a.lcm(b));
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for (num, den) in self.numerators.iter().zip(&self.denominators) {
                    s = s.checked_add(num[i * n + j].checked_mul(lcm / den).ok_or_else(overflow)?).ok_or_else(overflow)?;
                }
                let target = if i == j { lcm } else { 0 };
                if s != target {
                    return Err(HopfError::SpectrumIncomplete(format!(
                        "projections do not resolve the identity on the degree-{} block",
                        self.degree
                    )));
                }
            }
        }
        Ok(())
    }

    fn build_gram(&mut self) {
        let n = self.monos.len();
        self.gram = (0..n)
            .map(|a| {
                (0..n)
                    .filter_map(|b| {
                        let e = [
                            self.monos[a][0] + self.monos[b][0],
                            self.monos[a][1] + self.monos[b][1],
                            self.monos[a][2] + self.monos[b][2],
                            self.monos[a][3] + self.monos[b][3],
                        ];
                        let m = moment_numer(&e);
                        (m != 0).then_some((b, m))
                    })
                    .collect()
            })
            .collect();
    }

    fn slot(&self, lambda: i64) -> Option<usize> {
        self.spectrum.iter().position(|&l| l == lambda)
    }

    pub fn eigen_dim(&self, lambda: i64) -> usize {
        self.slot(lambda).map_or(0, |k| self.dims[k])
    }

    /// Integer-valued L2 pairing: pi^2 * result / moment_denom(degree).
    fn pair_int(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        let n = self.monos.len();
        let mut s = BigInt::zero();
        for c in 0..3 {
            for a in 0..n {
                let va = &v[c * n + a];
                if va.is_zero() {
                    continue;
                }
                let mut t = BigInt::zero();
                for &(b, m) in &self.gram[a] {
                    let wb = &w[c * n + b];
                    if !wb.is_zero() {
                        t += wb * m;
                    }
                }
                s += va * t;
            }
        }
        s
    }

    fn apply_exact(&self, k: usize, v: &[BigInt]) -> Vec<BigInt> {
        let n = self.dim();
        let num = &self.numerators[k];
        (0..n)
            .map(|i| {
                let mut s = BigInt::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = num[i * n + j];
                    if a != 0 && !vj.is_zero() {
                        s += vj * a;
                    }
                }
                s
            })
            .collect()
    }

    fn apply_f64(&self, k: usize, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let p = &self.proj_f64[k];
        (0..n).map(|i| p[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn to_polys<T: crate::exact::Coeff>(&self, v: &[T]) -> [Poly<T>; 3] {
        let n = self.monos.len();
        std::array::from_fn(|c| {
            let mut p = Poly::zero();
            for (a, e) in self.monos.iter().enumerate() {
                p.add_term(*e, v[c * n + a].clone());
            }
            p
        })
    }

    fn from_polys<T: crate::exact::Coeff>(&self, p: &[Poly<T>; 3]) -> Vec<T> {
        let n = self.monos.len();
        let mut v = vec![T::zero(); 3 * n];
        for (c, pc) in p.iter().enumerate() {
            for (e, coef) in pc.terms() {
                v[c * n + self.index[e]] = coef.clone();
            }
        }
        v
    }

    /// Independent columns of N_k, found by elimination modulo a prime.
    fn independent_columns(&self, k: usize) -> Vec<usize> {
        const P: i128 = (1 << 61) - 1;
        let n = self.dim();
        let target = self.dims[k];
        let num = &self.numerators[k];
        let mut basis: Vec<(usize, Vec<i128>)> = Vec::new(); // (pivot row, reduced column)
        let mut chosen = Vec::new();
        for j in 0..n {
            if chosen.len() == target {
                break;
            }
            let mut col: Vec<i128> = (0..n).map(|i| num[i * n + j].rem_euclid(P)).collect();
            for (piv, b) in &basis {
                let f = col[*piv];
                if f != 0 {
                    for i in 0..n {
                        col[i] = (col[i] - f * b[i] % P).rem_euclid(P);
                    }
                }
            }
            if let Some(piv) = col.iter().position(|v| *v != 0) {
                let inv = mod_pow(col[piv], P - 2, P);
                for v in col.iter_mut() {
                    *v = *v * inv % P;
                }
                basis.push((piv, col));
                chosen.push(j);
            }
        }
        chosen
    }
}

fn mod_pow(mut b: i128, mut e: i128, p: i128) -> i128 {
    let mut r = 1i128;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn primitive(v: Vec<Rational>) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    if g.is_zero() {
        return ints;
    }
    // fix the sign so the first nonzero entry is positive
    let sign = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter().map(|x| if sign { -(x / &g) } else { x / &g }).collect()
}

/// An exactly orthogonal basis of one eigenspace.
#[derive(Clone, Debug)]
pub struct SolvedEigenspace {
    pub eigenvalue: i64,
    pub fields: Vec<FrameField>,
    /// Squared L2 norms as multiples of pi^2.
    pub norms: Vec<Rational>,
}

/// Curl eigensolver for coefficient degree <= `degree_limit`.
pub struct EigenSolver {
    degree_limit: u32,
    blocks: Vec<CurlBlock>,
}

impl EigenSolver {
    pub fn new(degree_limit: u32) -> Result<Self> {
        if degree_limit == 0 {
            return Err(HopfError::Invalid("degree limit must be positive".into()));
        }
        let blocks = vec![CurlBlock::new(degree_limit)?, CurlBlock::new(degree_limit - 1)?];
        Ok(EigenSolver { degree_limit, blocks })
    }

    pub fn degree_limit(&self) -> u32 {
        self.degree_limit
    }

    pub fn blocks(&self) -> &[CurlBlock] {
        &self.blocks
    }

    /// All eigenvalues present, in decreasing order.
    pub fn spectrum(&self) -> Vec<i64> {
        let mut s: Vec<i64> = self.blocks.iter().flat_map(|b| b.spectrum.iter().copied()).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s.dedup();
        s
    }

    pub fn dimension(&self, lambda: i64) -> usize {
        self.blocks.iter().map(|b| b.eigen_dim(lambda)).sum()
    }

    fn split<T: crate::exact::Coeff>(&self, f: &FrameField<T>) -> Result<[Vec<T>; 2]> {
        if let Some(d) = f.degree() {
            if d > self.degree_limit {
                return Err(HopfError::DegreeOverflow { degree: d, limit: self.degree_limit });
            }
        }
        let mut out: [[Poly<T>; 3]; 2] = Default::default();
        for (c, s) in f.f.iter().enumerate() {
            for (odd, part) in [(false, s.even_part()), (true, s.odd_part())] {
                if part.is_zero() {
                    continue;
                }
                let slot = if (self.degree_limit % 2 == 1) == odd { 0 } else { 1 };
                out[slot][c] = part.homogenize(self.blocks[slot].degree).expect("degree within limit");
            }
        }
        Ok([self.blocks[0].from_polys(&out[0]), self.blocks[1].from_polys(&out[1])])
    }

    fn assemble<T: crate::exact::Coeff>(&self, parts: [Vec<T>; 2]) -> FrameField<T> {
        let [a, b] = parts;
        let pa = self.blocks[0].to_polys(&a);
        let pb = self.blocks[1].to_polys(&b);
        FrameField::from_polys(std::array::from_fn(|c| &pa[c] + &pb[c]))
    }

    /// Exact L2-orthogonal projection onto the eigenvalue-`lambda` space.
    pub fn project(&self, f: &FrameField, lambda: i64) -> Result<FrameField> {
        let parts = self.split(f)?;
        let out: Vec<Vec<Rational>> = self
            .blocks
            .iter()
            .zip(parts)
            .map(|(b, v)| match b.slot(lambda) {
                None => vec![Rational::zero(); b.dim()],
                Some(k) => {
                    let l = v.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
                    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
                    let den = Rational::from_integer(l * b.denominators[k]);
                    b.apply_exact(k, &ints).into_iter().map(|x| Rational::from_integer(x) / &den).collect()
                }
            })
            .collect();
        let [a, b]: [Vec<Rational>; 2] = out.try_into().expect("two blocks");
        Ok(self.assemble([a, b]))
    }

    /// Floating-point projection with the same spectral projectors.
    pub fn project_f64(&self, f: &FrameField<f64>, lambda: i64) -> Result<FrameField<f64>> {
        let parts = self.split(f)?;
        let out: Vec<Vec<f64>> = self
            .blocks
            .iter()
            .zip(parts)
            .map(|(b, v)| match b.slot(lambda) {
                None => vec![0.0; b.dim()],
                Some(k) => b.apply_f64(k, &v),
            })
            .collect();
        let [a, b]: [Vec<f64>; 2] = out.try_into().expect("two blocks");
        Ok(self.assemble([a, b]))
    }

    /// An exactly orthogonal basis of the eigenspace, each field scaled to
    /// coprime integer coefficients in its homogeneous representation.
    pub fn eigenbasis(&self, lambda: i64) -> SolvedEigenspace {
        let mut fields = Vec::new();
        let mut norms = Vec::new();
        for (slot, b) in self.blocks.iter().enumerate() {
            let Some(k) = b.slot(lambda) else { continue };
            let n = b.dim();
            let den = moment_denom(b.degree);
            let mut ortho: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
            for j in b.independent_columns(k) {
                let col: Vec<BigInt> = (0..n).map(|i| BigInt::from(b.numerators[k][i * n + j])).collect();
                let mut w: Vec<Rational> = col.iter().map(|x| Rational::from_integer(x.clone())).collect();
                for (u, uu) in &ortho {
                    let coef = Rational::new(b.pair_int(&col, u), uu.clone());
                    for (wi, ui) in w.iter_mut().zip(u) {
                        if !ui.is_zero() {
                            *wi -= &coef * Rational::from_integer(ui.clone());
                        }
                    }
                }
                let wi = primitive(w);
                let nn = b.pair_int(&wi, &wi);
                ortho.push((wi, nn));
            }
            for (v, nn) in ortho {
                let rv: Vec<Rational> = v.into_iter().map(Rational::from_integer).collect();
                let mut parts = [vec![Rational::zero(); self.blocks[0].dim()], vec![Rational::zero(); self.blocks[1].dim()]];
                parts[slot] = rv;
                fields.push(self.assemble(parts));
                norms.push(Rational::new(nn, den.clone()));
            }
        }
        SolvedEigenspace { eigenvalue: lambda, fields, norms }
    }

    /// P_lambda applied to a field built from integer coefficients: a
    /// deterministic way to draw eigenfields from a seed vector.
    pub fn eigenfield_from_coeffs(&self, lambda: i64, coeffs: &[i64]) -> FrameField {
        let parts: Vec<Vec<Rational>> = self
            .blocks
            .iter()
            .map(|b| match b.slot(lambda) {
                None => vec![Rational::zero(); b.dim()],
                Some(k) => {
                    let n = b.dim();
                    let v: Vec<BigInt> = (0..n).map(|i| BigInt::from(coeffs.get(i).copied().unwrap_or(0))).collect();
                    let den = Rational::from_integer(BigInt::from(b.denominators[k]));
                    b.apply_exact(k, &v).into_iter().map(|x| Rational::from_integer(x) / &den).collect()
                }
            })
            .collect();
        let [a, b]: [Vec<Rational>; 2] = parts.try_into().expect("two blocks");
        self.assemble([a, b])
    }

    /// Length of the coefficient vector used by `eigenfield_from_coeffs`.
    pub fn coeff_len(&self) -> usize {
        self.blocks.iter().map(|b| b.dim()).max().unwrap_or(0)
    }
}

/// Exact membership test: is `f` in the span of `basis` (orthogonal)?
pub fn in_orthogonal_span(f: &FrameField, basis: &[FrameField]) -> bool {
    let mut r = f.clone();
    for b in basis {
        let c = f.inner_coeff(b) / b.norm_sq_coeff();
        r = &r - &b.scale(&c);
    }
    r.is_zero()
}
