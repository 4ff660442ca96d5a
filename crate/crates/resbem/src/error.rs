use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("grid size {0} is invalid (must be even and at least {1})")]
    InvalidGridSize(usize, usize),
    #[error("curve is not regular: min |p'(t)| = {min_speed:e}")]
    NonRegularCurve { min_speed: f64 },
    #[error("curve self-intersects between segments {0} and {1}")]
    SelfIntersecting(usize, usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("inclusions {0} and {1} overlap (gap {2:e} below margin)")]
    Overlap(usize, usize, f64),
    #[error("inclusion {index} too close to the outer boundary: dist = {distance:e}")]
    BoundaryTooClose { index: usize, distance: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("special function domain error at z = {0}")]
    DomainError(Complex64),
    #[error("coincident source and target points")]
    CoincidentPoints,
    #[error("near-singular system: sigma_min = {sigma_min:e}")]
    NearSingularSystem { sigma_min: f64 },
    #[error("contour passes through a pole near z = {z} (condition {cond:e})")]
    ContourThroughPole { z: Complex64, cond: f64 },
    #[error("Newton refinement did not converge from {start}")]
    NoConvergence { start: Complex64 },
    #[error("found {found} resonances near {center}, expected {expected}")]
    CountMismatch { center: Complex64, found: usize, expected: usize },
    #[error("contrast is degenerate: |gamma_bg - trace| = {0:e}")]
    DegenerateContrast(f64),
    #[error("ill-conditioned system: condition {0:e}")]
    IllConditioned(f64),
    #[error("Gram matrix is singular: condition {0:e}")]
    SingularGram(f64),
    #[error("evaluation point too close to boundary: dist = {distance:e}, need > {min:e}")]
    TooCloseToBoundary { distance: f64, min: f64 },
    #[error("ascent {0} is not supported by this prediction")]
    AscentMismatch(usize),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
