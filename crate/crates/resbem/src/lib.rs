//! Scattering resonances of the 2D transmission problem with small
//! anisotropic inclusions, computed with boundary integral equations.

pub mod asymptotics;
pub mod dtn;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod nep;
pub mod polarization;
pub mod potentials;
pub mod specfun;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
