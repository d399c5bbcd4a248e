//! Stationary random fields driven by linear SPDE symbol functions.
//!
//! A pseudo-differential operator acting on stationary generalized random
//! fields is declared through its *symbol function* `g`: a continuous,
//! polynomially bounded, Hermitian-symmetric complex function on frequency
//! space. The equation `L_g U = X` (in the second-order sense) has a
//! stationary solution exactly when the source spectral measure divided by
//! `|g|^2` is still a slow-growing measure, and the solution spectral
//! density is `source / |g|^2`. Everything in this crate is built on that
//! division step:
//!
//! * [`symbol`] — symbol functions, their algebra and checkable metadata;
//! * [`model`] — the registry of named models (Matérn and relatives, Stein,
//!   evolution equations, advection-diffusion, Langevin, heat, wave) and
//!   their solution spectral densities;
//! * [`analysis`] — existence/uniqueness verdicts, homogeneous solutions on
//!   symbol zero sets and spatial-trace reductions of evolution models;
//! * [`covariance`] — closed-form covariances, numerical radial (Hankel)
//!   transforms, evolution-model mixtures and white-noise convolution;
//! * [`simulate`] — spectral Gaussian simulation on regular grids, empirical
//!   covariance estimation and grid comparison;
//! * [`spdg`] — the binary grid interchange format.
//!
//! # Fourier convention
//!
//! The unitary transform `F(φ)(ξ) = (2π)^{-d/2} ∫ e^{-i ξ·x} φ(x) dx` is used
//! throughout. Covariances are Fourier transforms of spectral measures under
//! this convention; every `(2π)` factor in the crate follows from it, and the
//! White Noise spectral density is the constant `(2π)^{-d/2}`.

pub mod analysis;
pub mod covariance;
pub mod error;
pub mod fftutil;
pub mod model;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod spdg;
pub mod special;
pub mod symbol;

mod density;

pub use density::{Atom, ConeComponent, RadialSymmetry, SpectralDensity};
pub use error::{Error, Result};
pub use symbol::{FreqPoint, InverseBound, Symbol, Witness, ZeroSet};
