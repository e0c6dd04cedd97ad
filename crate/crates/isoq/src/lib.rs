//! Exact computational engine for the quantum isomeric supercategory, its
//! affine version, and the associated Hecke–Clifford style superalgebras.
//!
//! The crate is organized in layers:
//!
//! - [`scalars`]: exact coefficient arithmetic in ℤ[z] and ℤ[q,q⁻¹];
//! - [`superlin`]: parity-aware sparse linear algebra over those scalars;
//! - [`qrep`]: the explicit representation layer (Θ-matrices, antipode,
//!   structure maps, central elements);
//! - [`diagrams`]: the string-diagram term language, basis diagrams, and
//!   symmetries;
//! - [`rewrite`]: normalization of diagram terms to linear combinations of
//!   basis diagrams;
//! - [`algebras`]: presented superalgebras, their diagram images, and
//!   Jucys–Murphy elements;
//! - [`functor`]: evaluation of diagram terms to matrices and the
//!   verification suites built on it;
//! - [`report`]: machine-readable pass/fail reports.

pub mod algebras;
pub mod diagrams;
pub mod functor;
pub mod qrep;
pub mod report;
pub mod rewrite;
pub mod scalars;
pub mod superlin;
