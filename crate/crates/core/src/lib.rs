//! Numerical verification of Hoelder estimates for bounded harmonic functions
//! on strict epigraphs of Lipschitz functions.
//!
//! The crate measures the vertical Hoelder constant `C` of a harmonic field,
//! derives the constants `C1`, `C2`, `C3` of the weighted-gradient and global
//! Hoelder bounds, and checks those bounds by sampling. It also provides the
//! weighted curve integrals behind the Lip-alpha extension property of
//! epigraphs.

pub mod constants;
pub mod error;
pub mod extension;
pub mod field;
pub mod geometry;
pub mod harmonic;
pub mod hoelder;
pub mod quad;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use geometry::{EpigraphDomain, LipschitzGraph, Point};
pub use harmonic::HarmonicField;
