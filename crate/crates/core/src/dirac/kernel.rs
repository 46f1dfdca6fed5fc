use nalgebra::DVector;
use serde::Serialize;

use super::{big_d, DiracSetup};
use crate::boson::{derivative_op, BosonBasis};
use crate::numerics::{dense_eigh, lanczos_hermitian, norm, LanczosOptions, Symmetry};
use crate::{Result, C64};

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub tol: f64,
    /// Lowest eigenvalues of 𝒟*𝒟, ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub kernel_count: usize,
    /// dim ∩ᵢ ker ∂̂ᵢ.
    pub boson_kernel_dim: usize,
    /// 2·(boson kernel)·2ᴹ over both blocks.
    pub predicted_lower_bound: usize,
    /// max ‖𝒟(w⊗Φ)‖ over boson kernel vectors w and Fock basis vectors Φ.
    pub mechanism_defect: f64,
    /// ‖𝒟Ψ‖ for Ψ = (η, η)⊗|0⟩.
    pub vacuum_defect: f64,
    pub converged: bool,
}

// Orthonormal basis of ∩ᵢ ker ∂̂ᵢ as tensor products of single-mode kernels.
fn boson_kernel(boson: &BosonBasis) -> Result<Vec<Vec<C64>>> {
    let single = BosonBasis::with_guard(1, boson.cutoff(), boson.guard())?;
    let d = derivative_op(&single, 0)?;
    let eig = dense_eigh(&d.adjoint().mul(&d).to_dense())?;
    let per_mode: Vec<DVector<C64>> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() < 1e-12)
        .map(|(c, _)| eig.vectors.column(c).into_owned())
        .collect();
    let mut out = vec![vec![C64::new(1.0, 0.0)]];
    for _ in 0..boson.modes() {
        let mut next = Vec::new();
        for w in &out {
            for p in &per_mode {
                // little-endian: the new mode is the most significant digit
                next.push(p.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect());
            }
        }
        out = next;
    }
    if per_mode.is_empty() && boson.modes() > 0 {
        out.clear();
    }
    Ok(out)
}

/// Lowest eigenpairs of 𝒟*𝒟 and the degeneracy from ∩ker ∂̂ᵢ ⊗ (any Fock vector).
pub fn kernel_and_degeneracy(setup: &DiracSetup, tol: f64, opts: &LanczosOptions) -> Result<KernelReport> {
    let d = big_d(setup)?.to_csr();
    let dd = d.adjoint().mul(&d).with_symmetry(Symmetry::Hermitian, 1e-12)?;
    let kernel = boson_kernel(&setup.boson)?;
    let fdim = setup.fock.dim();
    let predicted = 2 * kernel.len() * fdim;
    let count = (predicted.max(2 << setup.m()) + 2).min(dd.dim());
    let eig = lanczos_hermitian(&dd, count, opts)?;
    let kernel_count = eig.values.iter().filter(|&&v| v < tol).count();

    let half = setup.block_dim();
    let embed = |w: &[C64], f: usize, upper: bool, lower: bool| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 2 * half];
        for (b, &z) in w.iter().enumerate() {
            if upper {
                v[b * fdim + f] += z;
            }
            if lower {
                v[half + b * fdim + f] += z;
            }
        }
        v
    };
    let mut mechanism_defect: f64 = 0.0;
    for w in &kernel {
        for f in 0..fdim {
            mechanism_defect = mechanism_defect.max(norm(&d.matvec(&embed(w, f, true, false))));
            mechanism_defect = mechanism_defect.max(norm(&d.matvec(&embed(w, f, false, true))));
        }
    }
    let vacuum_defect = kernel.first().map_or(0.0, |w| norm(&d.matvec(&embed(w, 0, true, true))));
    Ok(KernelReport {
        tol,
        eigenvalues: eig.values,
        residuals: eig.residuals,
        kernel_count,
        boson_kernel_dim: kernel.len(),
        predicted_lower_bound: predicted,
        mechanism_defect,
        vacuum_defect,
        converged: eig.status == crate::numerics::lanczos::EigenStatus::Converged,
    })
}

/// Boson kernel dimension, exposed for reporting.
pub fn boson_kernel_dim(boson: &BosonBasis) -> Result<usize> {
    Ok(boson_kernel(boson)?.len())
}
