//! Zeta-parameter integral transform for products of Slater (Yukawa) orbitals.
//!
//! A product of `M` factors `e^{-η_i R_i}/R_i` is rewritten as an `(M-1)`-fold
//! integral over auxiliary parameters `ζ_i` of a single Macdonald function
//! `K_{M/2}` whose argument is the product of two square-rooted quadratic forms.
//! The crate provides the kernels, the multi-orbital transition amplitudes they
//! reduce to, a registry of Macdonald-function integral identities generated by
//! that reduction, and the quadrature machinery used to certify all of it.
//!
//! The crate is `no_std` (with `alloc`); floating point goes through [`libm`] so
//! results are bit-identical across targets.
//!
//! Modules:
//! - [`specfun`]: `K_ν` at integer and half-integer order, the Tricomi `U` and
//!   Meijer `G^{2,0}_{0,2}` reductions, Hermite polynomials, `J_0`.
//! - [`quadrature`]: adaptive Gauss–Kronrod and double-exponential 1-D rules,
//!   nested 2-D/3-D integration, and a seeded Monte-Carlo oracle.
//! - [`transforms`]: every transform kernel plus its reconstruction check.
//! - [`amplitudes`]: two-, three- and four-orbital amplitudes by several routes.
//! - [`identities`]: closed forms and the verification registry.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod amplitudes;
mod error;
pub mod identities;
pub mod quadrature;
pub mod specfun;
pub mod transforms;

pub use error::{Error, Result};
pub use quadrature::{EvalResult, Mapping, Method, QuadraturePlan};
