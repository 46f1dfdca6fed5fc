//! Fermionic Fock space ⋀*(ℂᴹ) with Jordan–Wigner signs, Clifford operators
//! and the multiplicative charge conjugation.

use std::collections::BTreeMap;

use crate::numerics::CsrMatrix;
use crate::{Error, Result, C64};

/// Largest mode count accepted for Fock constructions.
pub const MAX_FOCK_MODES: usize = 20;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Occupation bitmasks 0..2ᴹ in integer order; bit i set means mode i is occupied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockBasis {
    m: usize,
}

impl FockBasis {
    pub fn new(m: usize) -> Result<Self> {
        if m > MAX_FOCK_MODES {
            return Err(Error::ResourceCap { what: "fermion modes", value: m, cap: MAX_FOCK_MODES });
        }
        Ok(FockBasis { m })
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    pub fn particle_number(state: usize) -> usize {
        state.count_ones() as usize
    }

    /// (−1)^{#occupied slots below i}.
    pub fn jw_sign(state: usize, i: usize) -> f64 {
        if (state & ((1 << i) - 1)).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn states_with(&self, n: usize) -> Vec<usize> {
        (0..self.dim()).filter(|s| Self::particle_number(*s) == n).collect()
    }

    pub fn basis_vector(&self, state: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[state] = C64::new(1.0, 0.0);
        v
    }
}

/// How an operator changes the particle number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shift {
    Lower,
    Conserve,
    Raise,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct FermionOperator {
    pub matrix: CsrMatrix,
    pub shift: Shift,
}

impl FermionOperator {
    /// Checks that every nonzero entry moves particle number as declared.
    pub fn shift_consistent(&self) -> bool {
        self.matrix.iter().all(|(r, c, _)| {
            let d = FockBasis::particle_number(r) as i64 - FockBasis::particle_number(c) as i64;
            match self.shift {
                Shift::Lower => d == -1,
                Shift::Conserve => d == 0,
                Shift::Raise => d == 1,
                Shift::Mixed => d.abs() == 1,
            }
        })
    }
}

/// ext(ψ) = Σ ψᵢ aᵢ†.
pub fn ext(basis: &FockBasis, psi: &[C64]) -> Result<FermionOperator> {
    crate::error::check_len(basis.modes(), psi.len())?;
    let mut trip = Vec::new();
    for s in 0..basis.dim() {
        for (i, &p) in psi.iter().enumerate() {
            if p != C64::new(0.0, 0.0) && s & (1 << i) == 0 {
                trip.push((s | (1 << i), s, p * FockBasis::jw_sign(s, i)));
            }
        }
    }
    Ok(FermionOperator { matrix: CsrMatrix::from_triplets(basis.dim(), basis.dim(), trip), shift: Shift::Raise })
}

/// int(ψ) = ext(ψ)*.
pub fn int(basis: &FockBasis, psi: &[C64]) -> Result<FermionOperator> {
    Ok(FermionOperator { matrix: ext(basis, psi)?.matrix.adjoint(), shift: Shift::Lower })
}

/// c(ψ) = (ext + int)/√2, so that {c(ψᵢ), c(ψⱼ)} = δᵢⱼ.
pub fn clifford_c(basis: &FockBasis, psi: &[C64]) -> Result<FermionOperator> {
    let e = ext(basis, psi)?.matrix;
    let s = C64::new(SQRT_HALF, 0.0);
    let m = CsrMatrix::lin_comb(s, &e, s, &e.adjoint());
    Ok(FermionOperator { matrix: m, shift: Shift::Mixed })
}

/// c̄(ψ) = (ext − int)/√2, so that {c̄(ψᵢ), c̄(ψⱼ)} = −δᵢⱼ.
pub fn clifford_cbar(basis: &FockBasis, psi: &[C64]) -> Result<FermionOperator> {
    let e = ext(basis, psi)?.matrix;
    let s = C64::new(SQRT_HALF, 0.0);
    let m = CsrMatrix::lin_comb(s, &e, -s, &e.adjoint());
    Ok(FermionOperator { matrix: m, shift: Shift::Mixed })
}

/// Coefficient vector of the i-th basis mode.
pub fn unit(m: usize, i: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); m];
    v[i] = C64::new(1.0, 0.0);
    v
}

/// (−1)^{popcount}.
pub fn grading(basis: &FockBasis) -> FermionOperator {
    let d: Vec<C64> = (0..basis.dim())
        .map(|s| C64::new(if FockBasis::particle_number(s) % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    FermionOperator { matrix: CsrMatrix::diagonal(&d), shift: Shift::Conserve }
}

pub fn number_operator(basis: &FockBasis) -> FermionOperator {
    let d: Vec<C64> = (0..basis.dim()).map(|s| C64::new(FockBasis::particle_number(s) as f64, 0.0)).collect();
    FermionOperator { matrix: CsrMatrix::diagonal(&d), shift: Shift::Conserve }
}

/// v ↦ L·conj(v) in the fixed basis.
#[derive(Clone, Debug)]
pub struct AntilinearOperator {
    pub linear: CsrMatrix,
}

impl AntilinearOperator {
    pub fn new(linear: CsrMatrix) -> Self {
        AntilinearOperator { linear }
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let c: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        self.linear.matvec(&c)
    }

    /// self ∘ other = L₁·conj(L₂), a linear map.
    pub fn compose(&self, other: &AntilinearOperator) -> CsrMatrix {
        self.linear.mul(&other.linear.conj())
    }

    /// self ∘ M, antilinear with linear part L·conj(M).
    pub fn then_linear_right(&self, m: &CsrMatrix) -> AntilinearOperator {
        AntilinearOperator { linear: self.linear.mul(&m.conj()) }
    }

    /// M ∘ self, antilinear with linear part M·L.
    pub fn then_linear_left(&self, m: &CsrMatrix) -> AntilinearOperator {
        AntilinearOperator { linear: m.mul(&self.linear) }
    }

    pub fn square(&self) -> CsrMatrix {
        self.compose(self)
    }

    /// Conjugation A·M·A of a linear operator, itself linear.
    pub fn conjugate_linear(&self, m: &CsrMatrix) -> CsrMatrix {
        self.then_linear_right(m).compose(self)
    }
}

/// Lifts C₁ (antilinear on mode space, C₁² = −1) to the Fock space by
/// C(ψ_{i₁}∧…∧ψ_{iₙ}) = C₁ψ_{i₁}∧…∧C₁ψ_{iₙ}.
pub fn fock_charge_conjugation(basis: &FockBasis, c1: &AntilinearOperator) -> Result<AntilinearOperator> {
    let m = basis.modes();
    if c1.dim() != m || c1.linear.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: c1.dim() });
    }
    let sq = c1.square();
    let defect = sq.add(&CsrMatrix::identity(m)).max_abs();
    if defect > 1e-10 {
        return Err(Error::domain(format!("mode conjugation squares to −1 only up to {defect:.3e}")));
    }
    let cols: Vec<Vec<C64>> = (0..m)
        .map(|i| (0..m).map(|r| c1.linear.get(r, i)).collect())
        .collect();
    // column of state S = ext(C₁ψ_{min S}) applied to the column of S without its lowest bit
    let mut columns: Vec<BTreeMap<usize, C64>> = Vec::with_capacity(basis.dim());
    columns.push(BTreeMap::from([(0usize, C64::new(1.0, 0.0))]));
    for s in 1..basis.dim() {
        let low = s.trailing_zeros() as usize;
        let prev = &columns[s & (s - 1)];
        let mut out: BTreeMap<usize, C64> = BTreeMap::new();
        for (&t, &val) in prev {
            for (i, &coef) in cols[low].iter().enumerate() {
                if coef != C64::new(0.0, 0.0) && t & (1 << i) == 0 {
                    *out.entry(t | (1 << i)).or_insert(C64::new(0.0, 0.0)) += val * coef * FockBasis::jw_sign(t, i);
                }
            }
        }
        out.retain(|_, z| z.norm() > 1e-15);
        columns.push(out);
    }
    let trip = columns.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(&r, &z)| (r, c, z)));
    Ok(AntilinearOperator { linear: CsrMatrix::from_triplets(basis.dim(), basis.dim(), trip) })
}

/// Largest mismatch, over basis vectors v with particle number n, of
/// C c̄(ψ) C v against (−1)^{deg} c̄(C₁ψ) v, with deg read from v ("input")
/// and from c̄(C₁ψ)v ("output"). Returns (input_defect, output_defect).
pub fn conjugation_sign_defects(
    basis: &FockBasis,
    c: &AntilinearOperator,
    c1: &AntilinearOperator,
    psi: &[C64],
) -> Result<(f64, f64)> {
    let lhs = c.conjugate_linear(&clifford_cbar(basis, psi)?.matrix);
    let rhs = clifford_cbar(basis, &c1.apply(psi))?.matrix;
    let g = grading(basis).matrix;
    let input = lhs.sub(&rhs.mul(&g)).max_abs();
    let output = lhs.sub(&g.mul(&rhs)).max_abs();
    Ok((input, output))
}

/// Max residual of each canonical relation over all pairs of unit modes, plus
/// {ext(u), int(w)} = ⟨w, u⟩ for the given pair of general vectors.
pub fn car_residuals(basis: &FockBasis, u: &[C64], w: &[C64]) -> Result<Vec<(&'static str, f64)>> {
    let m = basis.modes();
    let id = CsrMatrix::identity(basis.dim());
    let ops = |i: usize| -> Result<[CsrMatrix; 4]> {
        let e = unit(m, i);
        Ok([ext(basis, &e)?.matrix, int(basis, &e)?.matrix, clifford_c(basis, &e)?.matrix, clifford_cbar(basis, &e)?.matrix])
    };
    let all: Vec<[CsrMatrix; 4]> = (0..m).map(ops).collect::<Result<_>>()?;
    let mut r = [0.0f64; 7];
    for (i, a) in all.iter().enumerate() {
        r[6] = r[6]
            .max(a[1].max_abs_diff(&a[0].adjoint()))
            .max(a[2].hermitian_defect())
            .max(a[3].anti_hermitian_defect());
        for (j, b) in all.iter().enumerate() {
            let d = if i == j { 1.0 } else { 0.0 };
            r[0] = r[0].max(a[0].anticommutator(&b[0]).max_abs());
            r[1] = r[1].max(a[1].anticommutator(&b[1]).max_abs());
            r[2] = r[2].max(a[0].anticommutator(&b[1]).max_abs_diff(&id.scale_real(d)));
            r[3] = r[3].max(a[2].anticommutator(&b[2]).max_abs_diff(&id.scale_real(d)));
            r[4] = r[4].max(a[3].anticommutator(&b[3]).max_abs_diff(&id.scale_real(-d)));
            r[5] = r[5].max(a[2].anticommutator(&b[3]).max_abs());
        }
    }
    let ip: C64 = u.iter().zip(w).map(|(a, c)| c.conj() * a).sum();
    let general = ext(basis, u)?.matrix.anticommutator(&int(basis, w)?.matrix).max_abs_diff(&id.scale(ip));
    Ok(vec![
        ("{ext,ext} = 0", r[0]),
        ("{int,int} = 0", r[1]),
        ("{ext_i,int_j} = delta_ij", r[2]),
        ("{ext(u),int(w)} = <w,u>", general),
        ("{c_i,c_j} = delta_ij", r[3]),
        ("{cbar_i,cbar_j} = -delta_ij", r[4]),
        ("{c_i,cbar_j} = 0", r[5]),
        ("int = ext*, c = c*, cbar = -cbar*", r[6]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::ModeConjugation;
    use rand::{Rng, SeedableRng};

    fn random_vec(m: usize, seed: u64) -> Vec<C64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn symplectic(m: usize) -> AntilinearOperator {
        AntilinearOperator::new(CsrMatrix::from_dense(&ModeConjugation::symplectic(m).unwrap().matrix))
    }

    #[test]
    fn ext_on_vacuum_and_int_on_vacuum() {
        let b = FockBasis::new(3).unwrap();
        let vac = b.basis_vector(0);
        let one = ext(&b, &unit(3, 0)).unwrap().matrix.matvec(&vac);
        assert_eq!(one, b.basis_vector(1));
        let gone = int(&b, &random_vec(3, 1)).unwrap().matrix.matvec(&vac);
        assert!(gone.iter().all(|z| z.norm() == 0.0));
        assert!(ext(&b, &unit(3, 2)).unwrap().shift_consistent());
    }

    #[test]
    fn canonical_anticommutators() {
        let m = 6;
        let b = FockBasis::new(m).unwrap();
        let id = CsrMatrix::identity(b.dim());
        for i in 0..m {
            for j in 0..m {
                let (ei, ej) = (ext(&b, &unit(m, i)).unwrap().matrix, ext(&b, &unit(m, j)).unwrap().matrix);
                let (ii, ij) = (ei.adjoint(), ej.adjoint());
                assert_eq!(ei.anticommutator(&ej).max_abs(), 0.0);
                assert_eq!(ii.anticommutator(&ij).max_abs(), 0.0);
                let d = if i == j { 1.0 } else { 0.0 };
                assert_eq!(ei.anticommutator(&ij).max_abs_diff(&id.scale_real(d)), 0.0);
            }
        }
    }

    #[test]
    fn general_vectors_follow_inner_product() {
        let m = 4;
        let b = FockBasis::new(m).unwrap();
        let (u, w) = (random_vec(m, 2), random_vec(m, 3));
        let ac = ext(&b, &u).unwrap().matrix.anticommutator(&int(&b, &w).unwrap().matrix);
        let ip: C64 = u.iter().zip(&w).map(|(a, c)| c.conj() * a).sum();
        assert!(ac.max_abs_diff(&CsrMatrix::identity(b.dim()).scale(ip)) < 1e-14);
    }

    #[test]
    fn clifford_relations() {
        let m = 4;
        let b = FockBasis::new(m).unwrap();
        let id = CsrMatrix::identity(b.dim());
        for i in 0..m {
            let ci = clifford_c(&b, &unit(m, i)).unwrap().matrix;
            let bi = clifford_cbar(&b, &unit(m, i)).unwrap().matrix;
            assert!(ci.hermitian_defect() < 1e-15);
            assert!(bi.anti_hermitian_defect() < 1e-15);
            assert!(bi.mul(&bi).max_abs_diff(&id.scale_real(-0.5)) < 1e-15);
            for j in 0..m {
                let cj = clifford_c(&b, &unit(m, j)).unwrap().matrix;
                let bj = clifford_cbar(&b, &unit(m, j)).unwrap().matrix;
                let d = if i == j { 1.0 } else { 0.0 };
                assert!(ci.anticommutator(&cj).max_abs_diff(&id.scale_real(d)) < 1e-15);
                assert!(bi.anticommutator(&bj).max_abs_diff(&id.scale_real(-d)) < 1e-15);
                assert!(ci.anticommutator(&bj).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grading_and_number() {
        let b = FockBasis::new(3).unwrap();
        let g = grading(&b).matrix;
        assert_eq!(g.get(0, 0), C64::new(1.0, 0.0));
        assert_eq!(g.get(0b111, 0b111), C64::new(-1.0, 0.0));
        assert_eq!(number_operator(&b).matrix.get(0b101, 0b101), C64::new(2.0, 0.0));
        let psi = random_vec(3, 4);
        assert!(g.anticommutator(&clifford_c(&b, &psi).unwrap().matrix).max_abs() < 1e-15);
        assert!(g.anticommutator(&clifford_cbar(&b, &psi).unwrap().matrix).max_abs() < 1e-15);
    }

    #[test]
    fn fock_conjugation_squares_to_grading() {
        let m = 4;
        let b = FockBasis::new(m).unwrap();
        let c = fock_charge_conjugation(&b, &symplectic(m)).unwrap();
        assert!(c.square().max_abs_diff(&grading(&b).matrix) < 1e-14);
        assert_eq!(c.apply(&b.basis_vector(0)), b.basis_vector(0));
        let two = b.basis_vector(0b0011);
        let back = c.apply(&c.apply(&two));
        assert!(back.iter().zip(&two).all(|(x, y)| (x - y).norm() < 1e-15));
    }

    #[test]
    fn conjugation_is_antiunitary() {
        let m = 6;
        let b = FockBasis::new(m).unwrap();
        let c = fock_charge_conjugation(&b, &symplectic(m)).unwrap();
        let (u, w) = (random_vec(b.dim(), 8), random_vec(b.dim(), 9));
        let ip = |a: &[C64], d: &[C64]| crate::numerics::dot(a, d);
        assert!((ip(&u, &w) - ip(&c.apply(&u), &c.apply(&w)).conj()).norm() < 1e-12);
    }

    #[test]
    fn rejects_conjugation_squaring_to_plus_one() {
        let b = FockBasis::new(2).unwrap();
        let bad = AntilinearOperator::new(CsrMatrix::identity(2));
        assert!(fock_charge_conjugation(&b, &bad).is_err());
    }

    #[test]
    fn sign_sits_on_the_input_sector() {
        for m in [2, 4, 6] {
            let b = FockBasis::new(m).unwrap();
            let c1 = symplectic(m);
            let c = fock_charge_conjugation(&b, &c1).unwrap();
            let (input, output) = conjugation_sign_defects(&b, &c, &c1, &random_vec(m, 5)).unwrap();
            assert!(input < 1e-14, "{input}");
            assert!(output > 0.1);
        }
    }

    #[test]
    fn car_residuals_vanish() {
        let b = FockBasis::new(4).unwrap();
        let r = car_residuals(&b, &random_vec(4, 1), &random_vec(4, 2)).unwrap();
        assert_eq!(r.len(), 8);
        assert!(r.iter().all(|(_, v)| *v < 1e-14), "{r:?}");
    }
}
