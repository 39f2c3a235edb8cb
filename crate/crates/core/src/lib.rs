//! Numerical laboratory for fractional Orlicz-Sobolev analysis.
//!
//! The crate is organized around the objects of the theory:
//!
//! - [`nfunc`]: N-functions `M(t) = ∫₀^|t| m`, their conjugates, growth
//!   indices, structural condition checks and the Sobolev conjugate `M*`.
//! - [`grid`]: functions sampled on uniform box grids with midpoint
//!   quadrature; plain and weighted modulars, Luxemburg and Orlicz norms.
//! - [`sobolev`]: Gagliardo-type modulars and seminorms, the equivalent
//!   norms on the fractional Orlicz-Sobolev space, Lipschitz composition
//!   and empirical embedding constants.
//! - [`operator`]: the fractional M-Laplacian, pointwise and in weak form.
//! - [`ladder`]: discrete sine bases generating the nested subspaces used
//!   by the variational machinery.
//! - [`variational`]: the model Schrödinger energy, its gradient,
//!   inequality probes, fountain-type diagnostics and a deflated
//!   multi-solution search.
//!
//! All routines are pure functions of immutable inputs and are safe to call
//! concurrently. Internal parallel reductions use fixed-order chunking so
//! results are reproducible run to run.

pub mod error;
pub mod grid;
pub mod ladder;
pub mod nfunc;
pub mod numeric;
pub mod operator;
pub mod sobolev;
pub mod variational;

pub use error::{Error, Result};
