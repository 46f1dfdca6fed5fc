//! Truncated oscillator space over the mode coordinates x ∈ ℝᴺ.
//!
//! Each mode carries the levels 0..=cutoff+guard. Identities are asserted on
//! the low-occupation subspace; the guard levels only push truncation
//! artifacts further away from it.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::numerics::{dense::dense_eigh_real, expm_action, CsrMatrix, ExpmOptions, Symmetry, DENSE_THRESHOLD};
use crate::polynomial::CubicPolynomial;
use crate::{Error, Result, C64};

/// Largest total boson dimension accepted anywhere.
pub const MAX_BOSON_DIM: usize = 1 << 20;

/// k = m / 4π.
pub fn k_from_integer(m: i64) -> f64 {
    m as f64 / (4.0 * std::f64::consts::PI)
}

/// Mixed-radix little-endian basis: index = Σᵢ nᵢ·dⁱ with d = cutoff + guard + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BosonBasis {
    modes: usize,
    cutoff: usize,
    guard: usize,
}

impl BosonBasis {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_guard(modes, cutoff, 0)
    }

    pub fn with_guard(modes: usize, cutoff: usize, guard: usize) -> Result<Self> {
        let d = cutoff + guard + 1;
        let dim = (d as u128).checked_pow(modes as u32).unwrap_or(u128::MAX);
        if dim > MAX_BOSON_DIM as u128 {
            return Err(Error::ResourceCap {
                what: "boson dimension",
                value: dim.min(usize::MAX as u128) as usize,
                cap: MAX_BOSON_DIM,
            });
        }
        Ok(BosonBasis { modes, cutoff, guard })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn levels(&self) -> usize {
        self.cutoff + self.guard + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.modes as u32)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        let d = self.levels();
        let mut rest = index;
        (0..self.modes)
            .map(|_| {
                let o = rest % d;
                rest /= d;
                o
            })
            .collect()
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().rev().fold(0, |acc, &o| acc * self.levels() + o)
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    /// Indices whose every occupation is ≤ cutoff − margin.
    pub fn low_indices(&self, margin: usize) -> Vec<usize> {
        let Some(top) = self.cutoff.checked_sub(margin) else {
            return Vec::new();
        };
        (0..self.dim()).filter(|&s| self.occupations(s).iter().all(|&o| o <= top)).collect()
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.modes {
            return Err(Error::OutOfRange { index: i, bound: self.modes });
        }
        Ok(())
    }

    // Σ over states of the single-mode ladder a (lower = true) or a† on mode i.
    fn ladder(&self, i: usize, coef_lower: f64, coef_raise: f64) -> CsrMatrix {
        let d = self.levels();
        let stride = d.pow(i as u32);
        let mut trip = Vec::new();
        for s in 0..self.dim() {
            let o = (s / stride) % d;
            if o > 0 && coef_lower != 0.0 {
                trip.push((s - stride, s, C64::new(coef_lower * (o as f64).sqrt(), 0.0)));
            }
            if o + 1 < d && coef_raise != 0.0 {
                trip.push((s + stride, s, C64::new(coef_raise * ((o + 1) as f64).sqrt(), 0.0)));
            }
        }
        CsrMatrix::from_triplets(self.dim(), self.dim(), trip)
    }
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// x̂ᵢ = (aᵢ + aᵢ†)/√2.
pub fn position_op(basis: &BosonBasis, i: usize) -> Result<CsrMatrix> {
    basis.check_mode(i)?;
    basis.ladder(i, SQRT_HALF, SQRT_HALF).with_symmetry(Symmetry::Hermitian, 1e-12)
}

/// ∂̂ᵢ = (aᵢ − aᵢ†)/√2.
pub fn derivative_op(basis: &BosonBasis, i: usize) -> Result<CsrMatrix> {
    basis.check_mode(i)?;
    basis.ladder(i, SQRT_HALF, -SQRT_HALF).with_symmetry(Symmetry::AntiHermitian, 1e-12)
}

/// p(x̂) with the commuting x̂ᵢ substituted.
pub fn polynomial_multiplication_op(basis: &BosonBasis, poly: &CubicPolynomial) -> Result<CsrMatrix> {
    crate::error::check_len(basis.modes(), poly.nvars())?;
    let xs: Vec<CsrMatrix> = (0..basis.modes()).map(|i| position_op(basis, i)).collect::<Result<_>>()?;
    let mut acc = CsrMatrix::zeros(basis.dim(), basis.dim());
    for m in poly.monomials() {
        let mut term = CsrMatrix::identity(basis.dim());
        for &v in &m.vars {
            term = term.mul(&xs[v]);
        }
        acc = CsrMatrix::lin_comb(C64::new(1.0, 0.0), &acc, C64::new(m.coefficient, 0.0), &term);
    }
    acc.with_symmetry(Symmetry::Hermitian, 1e-12)
}

/// How U = exp(ik·CS(x̂)) is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryRoute {
    /// Dense up to the threshold, Krylov above it.
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Clone, Debug)]
enum Realization {
    Dense(DMatrix<C64>),
    Krylov { generator: CsrMatrix, opts: ExpmOptions },
}

/// U = exp(i·k·CS(x̂)).
#[derive(Clone, Debug)]
pub struct CsUnitary {
    k: f64,
    dim: usize,
    inner: Realization,
}

pub fn cs_unitary(basis: &BosonBasis, k: f64, poly: &CubicPolynomial, route: UnitaryRoute) -> Result<CsUnitary> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::domain("Chern-Simons level k must be nonzero and finite"));
    }
    let generator = polynomial_multiplication_op(basis, poly)?;
    let dim = basis.dim();
    let dense = match route {
        UnitaryRoute::Auto => dim <= DENSE_THRESHOLD,
        UnitaryRoute::Dense => {
            if dim > DENSE_THRESHOLD {
                return Err(Error::ResourceCap { what: "dense unitary dimension", value: dim, cap: DENSE_THRESHOLD });
            }
            true
        }
        UnitaryRoute::Krylov => false,
    };
    let inner = if dense {
        // CS(x̂) is real symmetric in the oscillator basis
        let real = DMatrix::from_fn(dim, dim, |r, c| generator.get(r, c).re);
        let (vals, vecs) = dense_eigh_real(&real);
        let vt = vecs.transpose();
        let cos = DMatrix::from_fn(dim, dim, |r, c| vecs[(r, c)] * (k * vals[c]).cos()) * &vt;
        let sin = DMatrix::from_fn(dim, dim, |r, c| vecs[(r, c)] * (k * vals[c]).sin()) * &vt;
        Realization::Dense(cos.zip_map(&sin, C64::new))
    } else {
        Realization::Krylov { generator, opts: ExpmOptions::default() }
    };
    Ok(CsUnitary { k, dim, inner })
}

impl CsUnitary {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.inner, Realization::Dense(_))
    }

    pub fn dense(&self) -> Option<&DMatrix<C64>> {
        match &self.inner {
            Realization::Dense(u) => Some(u),
            Realization::Krylov { .. } => None,
        }
    }

    fn act(&self, v: &[C64], sign: f64) -> Result<Vec<C64>> {
        crate::error::check_len(self.dim, v.len())?;
        match &self.inner {
            Realization::Dense(u) => {
                let x = nalgebra::DVector::from_column_slice(v);
                let y = if sign > 0.0 { u * x } else { u.adjoint() * x };
                Ok(y.iter().copied().collect())
            }
            Realization::Krylov { generator, opts } => {
                expm_action(|w| generator.matvec(w), sign * self.k, v, opts)
            }
        }
    }

    /// U·v
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.act(v, 1.0)
    }

    /// U*·v = exp(−ik·CS(x̂))·v
    pub fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.act(v, -1.0)
    }

    /// Columns U·B·U*·e_c for the requested columns, computed in parallel.
    /// Set `inverse` to get U*·B·U instead.
    pub fn conjugate_columns(&self, b: &CsrMatrix, cols: &[usize], inverse: bool) -> Result<Vec<Vec<C64>>> {
        cols.par_iter()
            .map(|&c| {
                let mut e = vec![C64::new(0.0, 0.0); self.dim];
                e[c] = C64::new(1.0, 0.0);
                let w = if inverse { self.apply(&e)? } else { self.apply_adjoint(&e)? };
                let bw = b.matvec(&w);
                if inverse {
                    self.apply_adjoint(&bw)
                } else {
                    self.apply(&bw)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dense::max_abs;
    use rand::{Rng, SeedableRng};

    fn random_cubic(n: usize, seed: u64, scale: f64) -> CubicPolynomial {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                terms.push((scale * rng.gen_range(-1.0..1.0), vec![i, j]));
                for k in j..n {
                    terms.push((scale * rng.gen_range(-1.0..1.0), vec![i, j, k]));
                }
            }
        }
        CubicPolynomial::from_terms(n, &terms).unwrap()
    }

    #[test]
    fn ordering_and_dimension() {
        let b = BosonBasis::new(3, 2).unwrap();
        assert_eq!(b.dim(), 27);
        assert_eq!(b.occupations(1), vec![1, 0, 0]);
        assert_eq!(b.index(&[2, 1, 0]), 5);
        assert_eq!(b.low_indices(1).len(), 8);
        assert!(BosonBasis::new(30, 10).is_err());
    }

    #[test]
    fn canonical_commutator_on_low_subspace() {
        let b = BosonBasis::new(2, 6).unwrap();
        let (d0, x0, x1) = (derivative_op(&b, 0).unwrap(), position_op(&b, 0).unwrap(), position_op(&b, 1).unwrap());
        assert_eq!(d0.commutator(&x1).max_abs(), 0.0);
        // states with mode-0 occupation ≤ cutoff − 1
        let low: Vec<usize> = (0..b.dim()).filter(|&s| b.occupations(s)[0] < 6).collect();
        let c = d0.commutator(&x0).submatrix(&low, &low);
        assert!(max_abs(&(c - DMatrix::identity(low.len(), low.len()))) < 1e-13);
        assert_eq!(x0.hermitian_defect(), 0.0);
        assert_eq!(d0.anti_hermitian_defect(), 0.0);
        assert!(position_op(&b, 2).is_err());
    }

    #[test]
    fn polynomial_operator_examples() {
        let b = BosonBasis::new(2, 4).unwrap();
        assert_eq!(polynomial_multiplication_op(&b, &CubicPolynomial::zeros(2)).unwrap().max_abs(), 0.0);
        let sq = CubicPolynomial::from_terms(2, &[(1.0, vec![0, 0])]).unwrap();
        let x0 = position_op(&b, 0).unwrap();
        assert_eq!(polynomial_multiplication_op(&b, &sq).unwrap().max_abs_diff(&x0.mul(&x0)), 0.0);
        let q = CubicPolynomial::from_terms(2, &[(1.0, vec![0, 0]), (1.0, vec![1, 1])]).unwrap();
        let op = polynomial_multiplication_op(&b, &q).unwrap();
        assert!((op.get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unitary_basic_properties() {
        let b = BosonBasis::new(2, 6).unwrap();
        let zero = cs_unitary(&b, 0.3, &CubicPolynomial::zeros(2), UnitaryRoute::Dense).unwrap();
        assert!(max_abs(&(zero.dense().unwrap() - DMatrix::identity(b.dim(), b.dim()))) < 1e-14);
        let p = random_cubic(2, 1, 0.5);
        let u = cs_unitary(&b, k_from_integer(1), &p, UnitaryRoute::Dense).unwrap();
        let ud = u.dense().unwrap();
        assert!(max_abs(&(ud.adjoint() * ud - DMatrix::identity(b.dim(), b.dim()))) < 1e-10);
        let x = position_op(&b, 1).unwrap().to_dense();
        assert!(max_abs(&(ud * &x * ud.adjoint() - &x)) < 1e-10);
        assert!(cs_unitary(&b, 0.0, &p, UnitaryRoute::Auto).is_err());
    }

    #[test]
    fn krylov_route_matches_dense() {
        let b = BosonBasis::new(2, 5).unwrap();
        let p = random_cubic(2, 2, 0.3);
        let k = k_from_integer(2);
        let dense = cs_unitary(&b, k, &p, UnitaryRoute::Dense).unwrap();
        let kry = cs_unitary(&b, k, &p, UnitaryRoute::Krylov).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let v: Vec<C64> = (0..b.dim()).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let (a, c) = (dense.apply(&v).unwrap(), kry.apply(&v).unwrap());
        assert!(crate::numerics::max_abs_diff(&a, &c) < 1e-9);
        let back = kry.apply_adjoint(&c).unwrap();
        assert!(crate::numerics::max_abs_diff(&back, &v) < 1e-9);
    }

    #[test]
    fn dense_route_refuses_large_dimension() {
        let b = BosonBasis::new(4, 6).unwrap();
        let r = cs_unitary(&b, 0.1, &CubicPolynomial::zeros(4), UnitaryRoute::Dense);
        assert!(matches!(r, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn conjugated_derivative_with_guard_band() {
        let cutoff = 8;
        let b = BosonBasis::with_guard(2, cutoff, 16).unwrap();
        let p = random_cubic(2, 4, 0.3);
        let k = k_from_integer(1);
        let u = cs_unitary(&b, k, &p, UnitaryRoute::Auto).unwrap();
        let low = b.low_indices(3);
        let pdim = polynomial_multiplication_op(&b, &p.partial(0).unwrap()).unwrap();
        let d0 = derivative_op(&b, 0).unwrap();
        let expect = CsrMatrix::lin_comb(C64::new(1.0, 0.0), &d0, C64::new(0.0, -k), &pdim);
        let cols = u.conjugate_columns(&d0, &low, false).unwrap();
        let mut err: f64 = 0.0;
        for (col, &c) in cols.iter().zip(&low) {
            for &r in &low {
                err = err.max((col[r] - expect.get(r, c)).norm());
            }
        }
        assert!(err < 1e-8, "{err}");
    }
}
