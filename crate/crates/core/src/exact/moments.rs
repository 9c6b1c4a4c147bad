use std::sync::OnceLock;

use num_traits::Zero;

use super::coeff::{int, Rational};

const MAX_HALF: usize = 64;

struct Tables {
    // (2b)! / (4^b b!) = (2b-1)!! / 2^b
    half_gamma: Vec<Rational>,
    // 1 / (n+1)!
    inv_fact: Vec<Rational>,
    half_gamma_f: Vec<f64>,
    inv_fact_f: Vec<f64>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut half_gamma = vec![int(1)];
        let mut inv_fact = vec![int(1)];
        for b in 1..=4 * MAX_HALF {
            if b <= MAX_HALF {
                let prev = half_gamma[b - 1].clone();
                half_gamma.push(prev * Rational::new((2 * b as i64 - 1).into(), 2.into()));
            }
            let prev = inv_fact[b - 1].clone();
            inv_fact.push(prev / int(b as i64 + 1));
        }
        let half_gamma_f = half_gamma.iter().map(super::coeff::rational_to_f64).collect();
        let inv_fact_f = inv_fact.iter().map(super::coeff::rational_to_f64).collect();
        Tables { half_gamma, inv_fact, half_gamma_f, inv_fact_f }
    })
}

fn halves(e: &[u32; 4]) -> Option<([usize; 4], usize)> {
    if e.iter().any(|a| a % 2 == 1) {
        return None;
    }
    let b = [e[0] as usize / 2, e[1] as usize / 2, e[2] as usize / 2, e[3] as usize / 2];
    assert!(b.iter().all(|&v| v <= MAX_HALF), "monomial degree beyond moment table");
    Some((b, b.iter().sum()))
}

/// Coefficient of pi^2 in the integral of x^e over the unit 3-sphere, or
/// `None` when the integral vanishes by symmetry.
///
/// Uses 2 * prod Gamma((a_i+1)/2) / Gamma(|a|/2 + 2).
pub fn sphere_moment(e: &[u32; 4]) -> Option<Rational> {
    let (b, n) = halves(e)?;
    let t = tables();
    let mut m = int(2) * &t.inv_fact[n];
    for bi in b {
        if bi > 0 {
            m *= &t.half_gamma[bi];
        }
    }
    debug_assert!(!m.is_zero());
    Some(m)
}

/// Floating version of [`sphere_moment`], returning 0 for vanishing moments.
pub fn sphere_moment_f64(e: &[u32; 4]) -> f64 {
    match halves(e) {
        None => 0.0,
        Some((b, n)) => {
            let t = tables();
            2.0 * t.inv_fact_f[n] * b.iter().map(|&bi| t.half_gamma_f[bi]).product::<f64>()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::coeff::ratio;

    #[test]
    fn low_order_moments() {
        assert_eq!(sphere_moment(&[0, 0, 0, 0]), Some(int(2)));
        assert_eq!(sphere_moment(&[1, 0, 0, 0]), None);
        assert_eq!(sphere_moment(&[2, 0, 0, 0]), Some(ratio(1, 2)));
        assert_eq!(sphere_moment(&[2, 2, 0, 0]), Some(ratio(1, 12)));
        assert_eq!(sphere_moment(&[4, 0, 0, 0]), Some(ratio(1, 4)));
    }

    #[test]
    fn recursion_in_each_variable() {
        // m(a + 2e_i) = m(a) (a_i + 1) / (|a| + 4)
        let base = [2u32, 4, 0, 6];
        let m = sphere_moment(&base).unwrap();
        for i in 0..4 {
            let mut up = base;
            up[i] += 2;
            let expect = m.clone() * ratio(base[i] as i64 + 1, base.iter().sum::<u32>() as i64 + 4);
            assert_eq!(sphere_moment(&up).unwrap(), expect);
        }
    }

    #[test]
    fn float_matches_exact() {
        let e = [6, 2, 4, 0];
        let exact = crate::exact::coeff::rational_to_f64(&sphere_moment(&e).unwrap());
        assert!((exact - sphere_moment_f64(&e)).abs() < 1e-16);
    }
}
