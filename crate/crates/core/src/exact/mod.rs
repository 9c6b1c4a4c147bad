//! Exact arithmetic: rationals, polynomials on R^4, Laurent polynomials in
//! pi, and polynomial functions on the unit 3-sphere.

pub mod coeff;
pub mod moments;
mod parse;
pub mod poly;
pub mod scalar;
pub mod sphere;

pub use coeff::{f64_to_rational, int, ratio, rational_to_f64, Coeff, Rational};
pub use moments::{sphere_moment, sphere_moment_f64};
pub use poly::{monomials_of_degree, Exponent, Poly};
pub use scalar::ExactScalar;
pub use sphere::{integrate_monomial, integrate_poly, SphereScalar};
