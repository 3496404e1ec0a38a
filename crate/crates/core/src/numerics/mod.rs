//! Polynomials, Gaussian quadrature, divided differences and numerical
//! Laplace inversion.

mod divdiff;
mod poly;
mod quad;
mod talbot;

pub(crate) use divdiff::find_coincident;
pub use divdiff::{divided_difference, COINCIDENT_REL};
pub use poly::{poly_det, PolyRat, POLY_DET_MAX};
pub use quad::{composite_legendre, gauss_laguerre, gauss_legendre, QuadKind, QuadRule, MAX_QUAD_ORDER};
pub use talbot::{talbot_invert, talbot_invert_delayed};
