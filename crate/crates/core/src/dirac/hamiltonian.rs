use nalgebra::DMatrix;
use serde::Serialize;

use super::rotation::Rotated;
use super::{CompositeOperator, DiracSetup};
use crate::boson::{derivative_op, polynomial_multiplication_op, position_op, BosonBasis};
use crate::lattice::{spectral_invariant, ModeBasis};
use crate::numerics::{dense, dense_eigh, lanczos_hermitian, CsrMatrix, LanczosOptions, Symmetry};
use crate::polynomial::CubicPolynomial;
use crate::{Error, Result, C64};

struct Parts {
    common: CsrMatrix,
    cross: CsrMatrix,
}

// common = Σ(−∂̂ᵢ² + 4k²vᵢ²), cross = Σ 2ik{vᵢ, ∂̂ᵢ}, v = ½∇CS.
fn parts(boson: &BosonBasis, poly: &CubicPolynomial, k: f64) -> Result<Parts> {
    crate::error::check_len(boson.modes(), poly.nvars())?;
    let dim = boson.dim();
    let mut common = CsrMatrix::zeros(dim, dim);
    let mut cross = CsrMatrix::zeros(dim, dim);
    for i in 0..boson.modes() {
        let d = derivative_op(boson, i)?;
        let v = polynomial_multiplication_op(boson, &poly.partial(i)?.scale(0.5))?;
        common = common.sub(&d.mul(&d)).add(&v.mul(&v).scale_real(4.0 * k * k));
        cross = cross.add(&v.anticommutator(&d).scale(C64::new(0.0, 2.0 * k)));
    }
    Ok(Parts { common, cross })
}

/// H± = Σᵢ(−∂̂ᵢ² + 4k²vᵢ(x̂)² ± 2ik{vᵢ(x̂), ∂̂ᵢ}) ⊗ 𝟙_F, flagged Hermitian.
pub fn hamiltonian_ym(setup: &DiracSetup, poly: &CubicPolynomial, k: f64, plus: bool) -> Result<CompositeOperator> {
    let h = boson_hamiltonian(&setup.boson, poly, k, plus)?;
    Ok(CompositeOperator {
        boson_dim: setup.boson.dim(),
        fermion_dim: setup.fock.dim(),
        terms: vec![(h, CsrMatrix::identity(setup.fock.dim()))],
    })
}

fn boson_hamiltonian(boson: &BosonBasis, poly: &CubicPolynomial, k: f64, plus: bool) -> Result<CsrMatrix> {
    let p = parts(boson, poly, k)?;
    let h = if plus { p.common.add(&p.cross) } else { p.common.sub(&p.cross) };
    h.with_symmetry(Symmetry::Hermitian, 1e-12)
}

#[derive(Clone, Debug, Serialize)]
pub struct YmReport {
    pub k: f64,
    /// max |H⁺ + H⁻ − 2·common|.
    pub sum_defect: f64,
    pub hermitian_plus: f64,
    pub hermitian_minus: f64,
    /// max |(D±_U)² − ½H± ⊗ 𝟙| on the low subspace, both blocks; needs a rotation.
    pub square_defect: Option<f64>,
}

/// Sector identities for H± at level k.
pub fn ym_check(setup: &DiracSetup, poly: &CubicPolynomial, k: f64, rotated: Option<(&Rotated, usize)>) -> Result<YmReport> {
    let p = parts(&setup.boson, poly, k)?;
    let hp = p.common.add(&p.cross);
    let hm = p.common.sub(&p.cross);
    let sum_defect = hp.add(&hm).sub(&p.common.scale_real(2.0)).max_abs();
    let square_defect = match rotated {
        Some((r, margin)) => {
            let low = setup.boson.low_indices(margin);
            let id_f = DMatrix::<C64>::identity(setup.fock.dim(), setup.fock.dim());
            let mut worst: f64 = 0.0;
            for (h, bs, cs) in [(&hp, &r.plus, &setup.cbar_plus), (&hm, &r.minus, &setup.cbar_minus)] {
                let sq = super::rotation::square_low_pub(bs, cs, &low);
                let half = h.submatrix(&low, &low).kronecker(&id_f) * C64::new(0.5, 0.0);
                worst = worst.max(dense::max_abs(&(sq - half)));
            }
            Some(worst)
        }
        None => None,
    };
    Ok(YmReport {
        k,
        sum_defect,
        hermitian_plus: hp.hermitian_defect(),
        hermitian_minus: hm.hermitian_defect(),
        square_defect,
    })
}

/// Lowest free-case eigenvalues from Lanczos next to the oscillator oracle.
#[derive(Clone, Debug, Serialize)]
pub struct FreeSpectrum {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sums of single-mode eigenvalues of −∂̂², ascending.
    pub oracle: Vec<f64>,
}

impl FreeSpectrum {
    pub fn max_deviation(&self) -> f64 {
        self.values.iter().zip(&self.oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Free case: the lowest `count` eigenvalues of H± from Lanczos against sums of
/// single-mode eigenvalues of −∂̂².
pub fn free_spectrum(boson: &BosonBasis, count: usize, opts: &LanczosOptions) -> Result<FreeSpectrum> {
    let h = boson_hamiltonian(boson, &CubicPolynomial::zeros(boson.modes()), 1.0, true)?;
    let single = BosonBasis::with_guard(1, boson.cutoff(), boson.guard())?;
    let d = derivative_op(&single, 0)?;
    let per_mode = dense_eigh(&d.mul(&d).scale_real(-1.0).to_dense())?.values;
    let mut sums = vec![0.0];
    for _ in 0..boson.modes() {
        sums = sums.iter().flat_map(|s| per_mode.iter().map(move |e| s + e)).collect();
    }
    sums.sort_by(f64::total_cmp);
    sums.truncate(count);
    let eig = lanczos_hermitian(&h, count, opts)?;
    if eig.values.len() < count {
        return Err(Error::Numerical(format!("Lanczos found {} of {count} eigenvalues", eig.values.len())));
    }
    Ok(FreeSpectrum { values: eig.values, residuals: eig.residuals, oracle: sums })
}

/// The multiplication operator c₀𝟙 + Σcᵢx̂ᵢ of the affine spectral invariant.
#[derive(Clone, Debug)]
pub struct SpectralTerm {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub operator: CsrMatrix,
}

pub fn spectral_term_operator(basis: &ModeBasis, boson: &BosonBasis) -> Result<SpectralTerm> {
    let n = basis.len();
    crate::error::check_len(n, boson.modes())?;
    let constant = spectral_invariant(basis, &vec![0.0; n])?;
    let mut linear = Vec::with_capacity(n);
    let mut op = CsrMatrix::identity(boson.dim()).scale_real(constant);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let c = spectral_invariant(basis, &e)? - constant;
        op = op.add(&position_op(boson, i)?.scale_real(c));
        linear.push(c);
    }
    Ok(SpectralTerm { constant, linear, operator: op.with_symmetry(Symmetry::Hermitian, 1e-12)? })
}
