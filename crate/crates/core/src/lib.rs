//! Eigenvalue statistics of complex non-central Wishart matrices whose mean
//! has rank one.

pub mod charpoly;
pub mod demmel;
pub mod eigdist;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod mc;
pub mod mineig;
pub mod numerics;
pub mod params;
pub mod signed;
pub mod specfun;

pub use error::{Error, Result};
pub use params::{Curve, EvalConfig, ModelParams};
pub use signed::SignedLog;
