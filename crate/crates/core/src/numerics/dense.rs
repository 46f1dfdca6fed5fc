use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

/// Eigendecomposition of a dense Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct DenseEigen {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

pub fn dense_eigh(h: &DMatrix<C64>) -> Result<DenseEigen> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::domain("eigh of a non-square matrix"));
    }
    if n > super::DENSE_THRESHOLD {
        return Err(Error::ResourceCap { what: "dense eigensolve dimension", value: n, cap: super::DENSE_THRESHOLD });
    }
    // Symmetrize to suppress round-off asymmetry before the solver reads the lower triangle.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(DenseEigen { values, vectors })
}

/// Real symmetric variant returning real eigenvectors.
pub fn dense_eigh_real(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let sym = (h + h.transpose()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// exp(i·s·H) for Hermitian H through its eigendecomposition.
pub fn dense_expm_hermitian(h: &DMatrix<C64>, s: f64) -> Result<DMatrix<C64>> {
    let eig = dense_eigh(h)?;
    let phases = DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&l| C64::new(0.0, s * l).exp()),
    );
    let scaled = DMatrix::from_fn(eig.vectors.nrows(), eig.vectors.ncols(), |r, c| eig.vectors[(r, c)] * phases[c]);
    Ok(scaled * eig.vectors.adjoint())
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
