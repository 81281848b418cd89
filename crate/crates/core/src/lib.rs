//! Bernstein-type derivative bounds for rational functions with prescribed
//! poles on analytic Jordan curves and arcs.
//!
//! The crate is organised bottom-up:
//!
//! * [`curves`]: trigonometric-polynomial Jordan curves, normals, sampled
//!   validity checks and the Joukowski-type open-up of arcs.
//! * [`conformal`]: normalized Riemann maps of the interior and exterior
//!   (Theodorsen iteration plus closed forms for circles and ellipses).
//! * [`ratfun`]: rational functions in partial-fraction form, Blaschke
//!   products, sup norms and principal-part extraction.
//! * [`potential`]: Green's functions, boundary normal derivatives and the
//!   derivative bound itself.
//! * [`extremal`]: the asymptotically extremal sequences obtained by
//!   transplanting Blaschke products.
//! * [`cli`]: JSON run-specs and deterministic CSV reports.

pub mod cli;
pub mod conformal;
pub mod curves;
pub mod error;
pub mod extremal;
pub mod mobius;
pub mod potential;
pub mod ratfun;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use mobius::{ExtPoint, Mobius};

/// `i`, the imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
