use serde::Serialize;

use crate::boson::{derivative_op, position_op, BosonBasis};
use crate::lattice::{InnerProduct, Lattice, ModeBasis, SeedFamily};
use crate::numerics::CsrMatrix;
use crate::{Error, Result, C64};

/// Evaluation point m = (vertex, direction, Lie component).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldPoint {
    pub vertex: usize,
    pub mu: usize,
    pub a: usize,
}

impl FieldPoint {
    fn check(&self, lat: &Lattice) -> Result<()> {
        if self.vertex >= lat.num_vertices() {
            return Err(Error::OutOfRange { index: self.vertex, bound: lat.num_vertices() });
        }
        if self.mu >= 3 || self.a >= 3 {
            return Err(Error::domain(format!("field point direction {} / component {} out of range", self.mu, self.a)));
        }
        Ok(())
    }
}

fn profile(basis: &ModeBasis, m: FieldPoint) -> Result<Vec<f64>> {
    m.check(basis.lattice())?;
    Ok((0..basis.len()).map(|i| basis.coefficient(i, m.vertex, m.mu, m.a)).collect())
}

/// K(m₁, m₂) = Σᵢ ξᵢ(m₁) ξᵢ(m₂).
pub fn kernel_value(basis: &ModeBasis, m1: FieldPoint, m2: FieldPoint) -> Result<f64> {
    let (p1, p2) = (profile(basis, m1)?, profile(basis, m2)?);
    Ok(p1.iter().zip(&p2).map(|(a, b)| a * b).sum())
}

/// Ê_A(m) = Σⱼ ξⱼ(m) ∂̂ⱼ.
pub fn electric_field(basis: &ModeBasis, boson: &BosonBasis, m: FieldPoint) -> Result<CsrMatrix> {
    weighted_sum(boson, &profile(basis, m)?, derivative_op)
}

/// Â(m) = Σᵢ ξᵢ(m) x̂ᵢ.
pub fn gauge_field(basis: &ModeBasis, boson: &BosonBasis, m: FieldPoint) -> Result<CsrMatrix> {
    weighted_sum(boson, &profile(basis, m)?, position_op)
}

fn weighted_sum(
    boson: &BosonBasis,
    w: &[f64],
    op: fn(&BosonBasis, usize) -> Result<CsrMatrix>,
) -> Result<CsrMatrix> {
    crate::error::check_len(boson.modes(), w.len())?;
    let mut acc = CsrMatrix::zeros(boson.dim(), boson.dim());
    for (i, &c) in w.iter().enumerate() {
        acc = acc.add(&op(boson, i)?.scale_real(c));
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldReport {
    pub m1: FieldPoint,
    pub m2: FieldPoint,
    pub kernel: f64,
    /// max |([Ê_A(m₁), Â(m₂)] − K)v| over low basis vectors v.
    pub residual: f64,
    pub low_dim: usize,
}

/// [Ê_A(m₁), Â(m₂)] against K(m₁, m₂)·𝟙 on occupations ≤ cutoff − 1.
pub fn field_commutator_check(basis: &ModeBasis, boson: &BosonBasis, m1: FieldPoint, m2: FieldPoint) -> Result<FieldReport> {
    let kernel = kernel_value(basis, m1, m2)?;
    let comm = electric_field(basis, boson, m1)?.commutator(&gauge_field(basis, boson, m2)?);
    let low = boson.low_indices(1);
    let all: Vec<usize> = (0..boson.dim()).collect();
    let block = comm.submatrix(&all, &low);
    let mut residual: f64 = 0.0;
    for (c, &col) in low.iter().enumerate() {
        for r in 0..boson.dim() {
            let target = if r == col { C64::new(kernel, 0.0) } else { C64::new(0.0, 0.0) };
            residual = residual.max((block[(r, c)] - target).norm());
        }
    }
    Ok(FieldReport { m1, m2, kernel, residual, low_dim: low.len() })
}

/// Off-point mass ratio 1/(h³K(m,m)) − 1 of the single-component family
/// (τ_a dx^μ at m) for each mode count in `counts`.
pub fn kernel_concentration(lat: &Lattice, m: FieldPoint, counts: &[usize]) -> Result<Vec<f64>> {
    m.check(lat)?;
    let family = SeedFamily::SingleComponent { a: m.a, mu: m.mu };
    counts
        .iter()
        .map(|&n| {
            let basis = ModeBasis::build(lat, n, InnerProduct::L2, family)?;
            let k = kernel_value(&basis, m, m)?;
            Ok(1.0 / (lat.cell_volume() * k) - 1.0)
        })
        .collect()
}
