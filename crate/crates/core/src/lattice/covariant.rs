use nalgebra::DMatrix;
use rayon::prelude::*;

use super::chern_simons::connection;
use super::cochain::{InnerProduct, LieCochain};
use super::modes::ModeBasis;
use crate::{Error, Result, C64};

/// ⋆d_A ξ for a one-form ξ: (⋆d_A ξ)_μ = ε_μνρ (∂_ν ξ_ρ + [A_ν, ξ_ρ]).
pub fn star_covariant_derivative(basis: &ModeBasis, a: &LieCochain, xi: &LieCochain) -> Result<LieCochain> {
    if xi.degree() != 1 || a.degree() != 1 {
        return Err(Error::domain("covariant curl acts on one-forms"));
    }
    let lat = basis.lattice();
    let two = xi.coboundary(lat)?.add(&a.wedge(xi, lat)?)?.add(&xi.wedge(a, lat)?)?;
    // 2-form components are ordered (01, 02, 12)
    LieCochain::from_fn(lat, 1, |v, mu| match mu {
        0 => *two.get(v, 2),
        1 => -*two.get(v, 1),
        _ => *two.get(v, 0),
    })
}

/// Mᵢⱼ = ⟨ξᵢ, ⋆d_A ξⱼ⟩ in the trace (L²) pairing, projected onto the mode span.
///
/// The entries are real and M is symmetric; it is returned as a complex
/// matrix for use with the Hermitian eigensolvers.
pub fn covariant_derivative_matrix(basis: &ModeBasis, x: &[f64]) -> Result<DMatrix<C64>> {
    let lat = basis.lattice();
    let a = connection(basis, x)?;
    let images: Vec<LieCochain> =
        basis.modes().par_iter().map(|m| star_covariant_derivative(basis, &a, m)).collect::<Result<_>>()?;
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = basis.mode(i).inner_product(&images[j], lat, InnerProduct::L2)?;
        }
    }
    Ok(m)
}

/// Tr M: the signed eigenvalue sum of the truncated covariant curl.
pub fn spectral_invariant(basis: &ModeBasis, x: &[f64]) -> Result<f64> {
    let lat = basis.lattice();
    let a = connection(basis, x)?;
    basis
        .modes()
        .par_iter()
        .map(|m| {
            let img = star_covariant_derivative(basis, &a, m)?;
            Ok(m.inner_product(&img, lat, InnerProduct::L2)?.re)
        })
        .collect::<Result<Vec<f64>>>()
        .map(|d| d.iter().sum())
}
