//! Scattering amplitudes of sound-soft obstacles and numerical experiments on
//! their density in `L²(S²)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: spherical Bessel/Hankel functions, Legendre polynomials,
//!   spherical harmonics and Bessel zeros.
//! * [`sphgrid`]: quadrature on the unit sphere and harmonic transforms.
//! * [`mie`]: closed-form scattering by a sound-soft ball.
//! * [`farfield`]: boundary-data-to-amplitude map and Herglotz wave functions.
//! * [`bem`]: first-kind single-layer solver for smooth star-shaped surfaces.
//! * [`synthesis`]: least-squares synthesis of target patterns from amplitudes.

pub mod bem;
pub mod error;
pub mod farfield;
pub mod mie;
pub mod specfun;
pub mod sphgrid;
pub mod synthesis;

pub use error::{Error, Result};
pub use num_complex::Complex64;
