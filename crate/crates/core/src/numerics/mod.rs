//! Numerical substrate: sparse complex matrices, Kronecker assembly, Hermitian
//! eigensolvers and Krylov exponentials.

pub mod dense;
pub mod expm;
pub mod fd;
pub mod lanczos;
pub mod sparse;

pub use dense::{dense_eigh, dense_expm_hermitian, DenseEigen};
pub use expm::{expm_action, ExpmOptions};
pub use fd::finite_difference_gradient;
pub use lanczos::{lanczos_hermitian, EigenResult, LanczosOptions};
pub use sparse::{CsrMatrix, Symmetry, DEFAULT_KRON_CAP};

use crate::C64;

/// Dimension above which dense exponentials and eigensolves are refused.
pub const DENSE_THRESHOLD: usize = 2000;

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a, b⟩ antilinear in the first argument.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
