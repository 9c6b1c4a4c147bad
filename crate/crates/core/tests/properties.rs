use hopfcurl_core::annulus;
use hopfcurl_core::exact::{int, monomials_of_degree, ratio};
use hopfcurl_core::quadrature::{HopfGrid, QuadratureSpec};
use hopfcurl_core::report::{CheckRecord, Format, RunConfig};
use hopfcurl_core::torus::{abc_field, first_variation, TorusField, TorusScalar};
use hopfcurl_core::{ExactScalar, FrameField, Poly, Rational, SphereScalar};
use num_complex::Complex64;
use proptest::prelude::*;

fn scalar(max_degree: u32) -> impl Strategy<Value = SphereScalar> {
    let monomials: Vec<_> = (0..=max_degree).flat_map(monomials_of_degree).collect();
    let n = monomials.len();
    prop::collection::vec((0..n, -4i64..=4), 1..6).prop_map(move |terms| {
        let mut p = Poly::zero();
        for (i, c) in terms {
            p.add_term(monomials[i], int(c));
        }
        SphereScalar::canonicalize(&p)
    })
}

fn field(max_degree: u32) -> impl Strategy<Value = FrameField> {
    (scalar(max_degree), scalar(max_degree), scalar(max_degree)).prop_map(|(a, b, c)| FrameField::new(a, b, c))
}

fn exact_scalar() -> impl Strategy<Value = ExactScalar> {
    prop::collection::vec((-4i32..=4, -20i64..=20, 1i64..=9), 0..4)
        .prop_map(|terms| terms.into_iter().map(|(k, p, q)| ExactScalar::pi_pow(ratio(p, q), k)).sum())
}

fn unit_point() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from origin", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-2)
        .prop_map(|x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.map(|v| v / r)
        })
}

fn torus_field() -> impl Strategy<Value = TorusField> {
    prop::collection::vec((prop::array::uniform3(-2i32..=2), prop::array::uniform3(-1.0f64..1.0)), 1..5).prop_map(|modes| {
        let mut f = TorusField::default();
        for (k, a) in modes {
            let neg = k.map(|v| -v);
            f.add_mode(k, a.map(|v| Complex64::new(v, 0.0)));
            f.add_mode(neg, a.map(|v| Complex64::new(v, 0.0)));
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curl_is_divergence_free(f in field(3)) {
        prop_assert!(f.curl().divergence().is_zero());
    }

    #[test]
    fn gradients_are_curl_free(s in scalar(4)) {
        prop_assert!(FrameField::grad(&s).curl().is_zero());
    }

    #[test]
    fn curl_is_symmetric(f in field(3), g in field(3)) {
        prop_assert_eq!(f.curl().inner_coeff(&g), f.inner_coeff(&g.curl()));
    }

    #[test]
    fn curl_is_linear(f in field(3), g in field(3), p in -5i64..=5, q in 1i64..=5) {
        let c = ratio(p, q);
        let lhs = (&f.scale(&c) + &g).curl();
        let rhs = &f.curl().scale(&c) + &g.curl();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn divergence_integrates_to_zero(f in field(3)) {
        prop_assert!(f.divergence().integrate().is_zero());
    }

    #[test]
    fn integration_by_parts(s in scalar(3), f in field(3)) {
        let lhs = (&s * &f.divergence()).integrate();
        let rhs = FrameField::grad(&s).pointwise_dot(&f).integrate();
        prop_assert!((lhs + rhs).is_zero());
    }

    #[test]
    fn laplacian_is_symmetric(s in scalar(4), t in scalar(4)) {
        let lhs = (&s * &t.laplace_beltrami()).integrate();
        let rhs = (&s.laplace_beltrami() * &t).integrate();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn integral_is_linear(s in scalar(4), t in scalar(4)) {
        prop_assert_eq!((&s + &t).integrate(), s.integrate() + t.integrate());
    }

    #[test]
    fn odd_part_integrates_to_zero(s in scalar(5)) {
        prop_assert!((&s - &s.antipodal()).integrate().is_zero());
    }

    #[test]
    fn canonical_form_is_stable(s in scalar(5)) {
        prop_assert_eq!(SphereScalar::canonicalize(&s.poly()), s);
    }

    #[test]
    fn product_evaluates_pointwise(s in scalar(3), t in scalar(3), x in unit_point()) {
        let (a, b) = (s.eval(&x), t.eval(&x));
        let ab = (&s * &t).eval(&x);
        prop_assert!((ab - a * b).abs() <= 1e-12 * (1.0 + (a * b).abs()));
    }

    #[test]
    fn grid_is_exact_on_polynomials(s in scalar(3), t in scalar(3)) {
        let grid = HopfGrid::new(QuadratureSpec::new(6, 12));
        let p = (&s * &t).to_f64();
        let exact = (&s * &t).integrate().to_f64();
        let numeric = grid.integrate(|x| p.eval(x));
        prop_assert!((numeric - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn exact_scalar_ring(a in exact_scalar(), b in exact_scalar(), c in exact_scalar()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn exact_scalar_division(a in exact_scalar(), k in -3i32..=3, p in 1i64..=9) {
        let b = ExactScalar::pi_pow(int(p), k);
        prop_assert_eq!((&a * &b).checked_div(&b), Some(a.clone()));
        let x = (&a * &b).to_f64();
        prop_assert!((x - a.to_f64() * b.to_f64()).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn pass_rule(expected in -1e3f64..1e3, computed in -1e3f64..1e3, tol in 0.0f64..1.0) {
        let r = CheckRecord::compare("p", "x", "", expected, computed, tol);
        prop_assert_eq!(r.pass, r.rel_err <= tol);
        prop_assert!(r.abs_err >= 0.0);
        let r = CheckRecord::at_most("p", "x", expected, computed);
        prop_assert_eq!(r.pass, computed <= expected);
        let r = CheckRecord::at_least("p", "x", expected, computed);
        prop_assert_eq!(r.pass, computed >= expected);
        let r = CheckRecord::absolute("p", "x", "", expected, computed, tol);
        prop_assert_eq!(r.pass, (computed - expected).abs() <= tol * (1.0 + 1e-12));
    }

    #[test]
    fn config_round_trips(
        seed in 0u64..=i64::MAX as u64,
        tol in 0.0f64..1.0,
        dmax in 1u32..=5,
        samples in 1usize..1000,
        csv in any::<bool>(),
        timing in any::<bool>(),
    ) {
        let c = RunConfig {
            seed,
            tol_float: tol,
            dmax,
            samples,
            format: if csv { Format::Csv } else { Format::Json },
            timing,
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c.clone());
        prop_assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
    }

    #[test]
    fn torus_curl_is_divergence_free(f in torus_field()) {
        let c = f.curl();
        prop_assert!(c.is_divergence_free());
        prop_assert!(c.curl().curl().approx_eq(&c.neg_laplacian(), 1e-9));
    }

    #[test]
    fn abc_fields_are_beltrami(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let f = abc_field(a, b, c);
        prop_assert!(f.curl().approx_eq(&f, 1e-12));
    }

    #[test]
    fn first_variation_is_linear(s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let u = abc_field(1.0, 1.0, 1.0);
        let p = TorusScalar::cos([1, 1, 0], 1.0);
        let q = TorusScalar::sin([0, 1, 1], 1.0).add(&TorusScalar::cos([2, 0, 0], 0.5));
        let lhs = first_variation(&u, &p.scale(s).add(&q.scale(t))).unwrap();
        let rhs = s * first_variation(&u, &p).unwrap() + t * first_variation(&u, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn annulus_first_eigenvalue(n in 1u32..=12) {
        prop_assert_eq!(annulus::mu1(n).unwrap(), Rational::new(1.into(), n.into()));
    }
}
