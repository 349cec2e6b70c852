//! Construction, verification and application of rank-2 (biscaled) wavelet
//! systems for the commuting dilation pair `A = diag(α, 1)`, `B = diag(1, β)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`trigpoly`] – exact bivariate trigonometric polynomials (filters).
//! * [`lattice`] – dilation pairs, digit sets, cosets and frequency grids.
//! * [`filters`] – translation/coset filter matrices, unitarity checks,
//!   unitary completion and the dyadic filter identities.
//! * [`latin`] – constant-coset biscaled Haar families, including the
//!   triadic Latin-square wavelets.
//! * [`transform`] – fast biscaled analysis/synthesis on 2-D arrays.
//! * [`meyer`] – frequency-domain rank-2 Meyer scaling functions and the
//!   associated nonseparable wavelet.
//! * [`separability`] – executable checks for the compact-support
//!   separability results.
//! * [`io`] – CSV, PGM and JSON helpers shared by the CLI.

pub mod error;
pub mod filters;
pub mod io;
pub mod latin;
pub mod lattice;
pub mod linalg;
pub mod meyer;
mod par;
pub mod separability;
pub mod transform;
pub mod trigpoly;

pub use error::{Error, Result};
pub use num_complex::Complex64;
