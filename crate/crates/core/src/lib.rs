//! Numerical laboratory for Dirac operators on a truncated configuration space
//! of SU(2) connections over the flat three-torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: sparse complex matrices, Kronecker products, Lanczos and
//!   Krylov exponential solvers, finite differences.
//! * [`lattice`]: su(2)-valued forms on a periodic cubic lattice, mode bases,
//!   the Chern-Simons polynomial, field strength and the covariant-derivative
//!   spectral term.
//! * [`spinor`]: spin-bundle trivialization, embedding of gauge modes into
//!   spinor-valued one-forms, single-particle charge conjugation.
//! * [`fock`]: the fermionic Fock space with ext/int, Clifford operators and the
//!   Fock-space real structure.
//! * [`boson`]: truncated oscillator space over mode coordinates and the
//!   Chern-Simons unitary.
//! * [`dirac`]: the doubled Dirac operator, real structure checks, rotation,
//!   square decomposition, Yang-Mills sectors, field operators and kernels.
//! * [`experiment`]: configuration, verification suites, reports and tables.

pub mod boson;
pub mod dirac;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod lattice;
pub mod numerics;
pub mod polynomial;
pub mod spinor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Global default seed for every stochastic start vector and random draw.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;
