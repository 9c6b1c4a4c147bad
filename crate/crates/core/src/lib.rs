pub mod error;
pub mod exact;
pub mod frame;

pub use error::{HopfError, Result};
pub use exact::{ExactScalar, Poly, Rational, SphereScalar};
pub use frame::{hopf_frame, FrameField, Parity};
pub mod atlas;
pub mod functionals;
pub mod quadrature;
pub mod conformal;
pub mod torus;
pub mod annulus;
pub mod report;
