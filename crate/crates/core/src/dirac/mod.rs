//! The doubled Dirac operator on (boson ⊗ fermion) ⊕ (boson ⊗ fermion) and
//! the identities built on it.
//!
//! Composite index order is boson-major: state (b, f) sits at b·2ᴹ + f.

mod fields;
mod hamiltonian;
mod kernel;
mod rotation;

pub use fields::{
    electric_field, field_commutator_check, gauge_field, kernel_concentration, kernel_value, FieldPoint, FieldReport,
};
pub use hamiltonian::{free_spectrum, FreeSpectrum, hamiltonian_ym, spectral_term_operator, ym_check, SpectralTerm, YmReport};
pub use kernel::{boson_kernel_dim, kernel_and_degeneracy, KernelReport};
pub use rotation::{
    rotate, small_k_ratio, square_difference, square_and_decompose, BlockFit, DecompositionReport, Rotated, XiFrame, TERMS,
};

use serde::Serialize;

use crate::boson::{derivative_op, BosonBasis};
use crate::fock::{clifford_cbar, fock_charge_conjugation, grading, unit, AntilinearOperator, FockBasis};
use crate::lattice::ModeBasis;
use crate::numerics::{CsrMatrix, DEFAULT_KRON_CAP};
use crate::spinor::{embed_basis, extend_basis, mode_conjugation, ConjugationModel, ModeConjugation, ReferenceFrame};
use crate::{Error, Result, C64};

/// Σₜ Bₜ ⊗ Fₜ on boson ⊗ fermion.
#[derive(Clone, Debug)]
pub struct CompositeOperator {
    pub boson_dim: usize,
    pub fermion_dim: usize,
    pub terms: Vec<(CsrMatrix, CsrMatrix)>,
}

impl CompositeOperator {
    pub fn dim(&self) -> usize {
        self.boson_dim * self.fermion_dim
    }

    pub fn to_csr(&self) -> Result<CsrMatrix> {
        let mut acc = CsrMatrix::zeros(self.dim(), self.dim());
        for (b, f) in &self.terms {
            let t = CsrMatrix::kron_capped(b, f, DEFAULT_KRON_CAP)?;
            acc = acc.add(&t);
        }
        Ok(acc)
    }
}

/// Everything the Dirac constructions share: spaces, Clifford generators and conjugations.
#[derive(Clone, Debug)]
pub struct DiracSetup {
    pub boson: BosonBasis,
    pub fock: FockBasis,
    pub conjugation: ModeConjugation,
    pub fock_conjugation: AntilinearOperator,
    /// ∂̂ᵢ, i < N.
    pub derivatives: Vec<CsrMatrix>,
    /// c̄(ψᵢ), i < N.
    pub cbar_plus: Vec<CsrMatrix>,
    /// c̄(C₁ψᵢ), i < N.
    pub cbar_minus: Vec<CsrMatrix>,
}

impl DiracSetup {
    /// `conjugation` acts on the M fermionic modes; ψᵢ for i < N are the gauge modes.
    pub fn new(boson: BosonBasis, m: usize, conjugation: ModeConjugation) -> Result<Self> {
        let n = boson.modes();
        if m < n {
            return Err(Error::domain(format!("fermion modes M = {m} below boson modes N = {n}")));
        }
        crate::error::check_len(m, conjugation.matrix.nrows())?;
        let fock = FockBasis::new(m)?;
        let c1 = AntilinearOperator::new(CsrMatrix::from_dense(&conjugation.matrix));
        let fock_conjugation = fock_charge_conjugation(&fock, &c1)?;
        let derivatives = (0..n).map(|i| derivative_op(&boson, i)).collect::<Result<Vec<_>>>()?;
        let cbar_plus = (0..n).map(|i| Ok(clifford_cbar(&fock, &unit(m, i))?.matrix)).collect::<Result<Vec<_>>>()?;
        let cbar_minus = (0..n)
            .map(|i| Ok(clifford_cbar(&fock, &c1.apply(&unit(m, i)))?.matrix))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiracSetup { boson, fock, conjugation, fock_conjugation, derivatives, cbar_plus, cbar_minus })
    }

    /// Embeds the gauge modes with `frame`, completes to M spinor modes and
    /// reads off the single-particle conjugation on their span.
    pub fn from_geometry(basis: &ModeBasis, frame: &ReferenceFrame, m: usize, boson: BosonBasis) -> Result<Self> {
        if boson.modes() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: boson.modes() });
        }
        if m < basis.len() {
            return Err(Error::domain(format!("fermion modes M = {m} below boson modes N = {}", basis.len())));
        }
        let lat = basis.lattice();
        let ip = basis.inner_product_kind();
        let embedded = embed_basis(basis, frame)?;
        let psi = extend_basis(&embedded, m, lat, ip)?;
        let conj = mode_conjugation(&psi, lat, ip, 1e-10)?;
        Self::new(boson, m, conj)
    }

    /// c̄(eₗ) for any of the M fermionic modes.
    pub fn cbar_mode(&self, l: usize) -> Result<CsrMatrix> {
        Ok(clifford_cbar(&self.fock, &unit(self.m(), l))?.matrix)
    }

    pub fn n(&self) -> usize {
        self.boson.modes()
    }

    pub fn m(&self) -> usize {
        self.fock.modes()
    }

    pub fn conjugation_model(&self) -> ConjugationModel {
        self.conjugation.model
    }

    pub fn block_dim(&self) -> usize {
        self.boson.dim() * self.fock.dim()
    }

    /// Fermionic particle number of composite index `idx` (either block).
    pub fn particle_number(&self, idx: usize) -> usize {
        ((idx % self.block_dim()) % self.fock.dim()).count_ones() as usize
    }
}

/// D⁺ = Σᵢ ∂̂ᵢ ⊗ c̄(ψᵢ).
pub fn dirac_plus(setup: &DiracSetup) -> CompositeOperator {
    composite(setup, &setup.cbar_plus)
}

/// D⁻ = Σᵢ ∂̂ᵢ ⊗ c̄(C₁ψᵢ).
pub fn dirac_minus(setup: &DiracSetup) -> CompositeOperator {
    composite(setup, &setup.cbar_minus)
}

fn composite(setup: &DiracSetup, cbars: &[CsrMatrix]) -> CompositeOperator {
    CompositeOperator {
        boson_dim: setup.boson.dim(),
        fermion_dim: setup.fock.dim(),
        terms: setup.derivatives.iter().cloned().zip(cbars.iter().cloned()).collect(),
    }
}

/// 2×2 block operator over ℋ₁ ⊕ ℋ₂; antilinear ones act as (linear part) ∘ conj.
#[derive(Clone, Debug)]
pub struct DoubledOperator {
    pub half: usize,
    pub blocks: [[Option<CsrMatrix>; 2]; 2],
    pub antilinear: bool,
}

impl DoubledOperator {
    pub fn diagonal(a: CsrMatrix, b: CsrMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
        }
        Ok(DoubledOperator { half: a.dim(), blocks: [[Some(a), None], [None, Some(b)]], antilinear: false })
    }

    /// The (linear part of the) full 2·half matrix.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut trip = Vec::new();
        for (bi, row) in self.blocks.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    trip.extend(m.iter().map(|(r, c, v)| (bi * self.half + r, bj * self.half + c, v)));
                }
            }
        }
        CsrMatrix::from_triplets(2 * self.half, 2 * self.half, trip)
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.blocks[0][1].is_none() && self.blocks[1][0].is_none()
    }
}

/// 𝒟 = diag(D⁺, D⁻).
pub fn big_d(setup: &DiracSetup) -> Result<DoubledOperator> {
    DoubledOperator::diagonal(dirac_plus(setup).to_csr()?, dirac_minus(setup).to_csr()?)
}

/// 𝒥 = [[0, C], [C, 0]] with C = conj ⊗ C_Fock.
pub fn big_j(setup: &DiracSetup) -> Result<DoubledOperator> {
    let c = CsrMatrix::kron_capped(&CsrMatrix::identity(setup.boson.dim()), &setup.fock_conjugation.linear, DEFAULT_KRON_CAP)?;
    Ok(DoubledOperator { half: c.dim(), blocks: [[None, Some(c.clone())], [Some(c), None]], antilinear: true })
}

/// γ = diag(−1, 1).
pub fn gamma(setup: &DiracSetup) -> DoubledOperator {
    let id = CsrMatrix::identity(setup.block_dim());
    DoubledOperator { half: id.dim(), blocks: [[Some(id.scale_real(-1.0)), None], [None, Some(id)]], antilinear: false }
}

fn doubled_grading(setup: &DiracSetup) -> CsrMatrix {
    let g = CsrMatrix::kron(&CsrMatrix::identity(setup.boson.dim()), &grading(&setup.fock).matrix);
    DoubledOperator::diagonal(g.clone(), g).expect("equal blocks").to_csr()
}

/// Residuals of one sign placement, per fermionic particle-number sector.
#[derive(Clone, Debug, Serialize)]
pub struct SectorResiduals {
    pub ordering: &'static str,
    pub per_sector: Vec<f64>,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealStructureReport {
    pub orderings: Vec<SectorResiduals>,
    /// Ordering whose residuals are all below the tolerance, if exactly one is.
    pub consistent_ordering: Option<&'static str>,
    pub max_residual: f64,
    /// Same check with γ replaced by 𝟙.
    pub negative_control: f64,
    pub j_squared_defect: f64,
    pub gamma_j_anticommutator: f64,
    pub conjugation_model: ConjugationModel,
}

fn sector_max(r: &CsrMatrix, setup: &DiracSetup) -> Vec<f64> {
    let mut out = vec![0.0f64; setup.m() + 1];
    for (_, c, v) in r.iter() {
        let n = setup.particle_number(c);
        out[n] = out[n].max(v.norm());
    }
    out
}

/// 𝒥𝒟𝒥 against (−1)^deg γ𝒟, with deg read from the input or the output sector.
pub fn check_real_structure(setup: &DiracSetup, tol: f64) -> Result<RealStructureReport> {
    let d = big_d(setup)?.to_csr();
    let j = big_j(setup)?.to_csr();
    let g = gamma(setup).to_csr();
    let grade = doubled_grading(setup);
    // 𝒥 X 𝒥 = J·conj(X)·conj(J) as a linear map
    let jdj = j.mul(&d.conj()).mul(&j.conj());
    let gd = g.mul(&d);
    let input = jdj.sub(&gd.mul(&grade));
    let output = jdj.sub(&grade.mul(&gd));
    let orderings: Vec<SectorResiduals> = [("input", input), ("output", output)]
        .into_iter()
        .map(|(name, r)| {
            let per_sector = sector_max(&r, setup);
            let max = per_sector.iter().copied().fold(0.0, f64::max);
            SectorResiduals { ordering: name, per_sector, max }
        })
        .collect();
    let passing: Vec<&SectorResiduals> = orderings.iter().filter(|o| o.max < tol).collect();
    let consistent_ordering = if passing.len() == 1 { Some(passing[0].ordering) } else { None };
    let max_residual = orderings.iter().map(|o| o.max).fold(f64::INFINITY, f64::min);
    let control_in = jdj.sub(&d.mul(&grade)).max_abs();
    let control_out = jdj.sub(&grade.mul(&d)).max_abs();
    let j2 = j.mul(&j.conj());
    let j_squared_defect = j2.sub(&grade).max_abs();
    let gamma_j_anticommutator = g.mul(&j).add(&j.mul(&g)).max_abs();
    Ok(RealStructureReport {
        orderings,
        consistent_ordering,
        max_residual,
        negative_control: control_in.min(control_out),
        j_squared_defect,
        gamma_j_anticommutator,
        conjugation_model: setup.conjugation.model,
    })
}

/// Unit vector of the composite space with boson state `b` and Fock state `f`.
pub fn product_state(setup: &DiracSetup, b: usize, f: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); setup.block_dim()];
    v[b * setup.fock.dim() + f] = C64::new(1.0, 0.0);
    v
}
