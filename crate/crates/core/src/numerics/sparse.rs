use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;

/// Default cap on the dimension produced by [`CsrMatrix::kron`].
pub const DEFAULT_KRON_CAP: usize = 1 << 24;

/// Entries with modulus below this are dropped on assembly.
pub const PRUNE_TOL: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Hermitian,
    AntiHermitian,
}

/// Complex sparse matrix in compressed-row layout. Column indices are sorted
/// and unique within every row.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    symmetry: Symmetry,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            symmetry: Symmetry::General,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Self::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Builds from (row, col, value) triplets; duplicates are summed and tiny
    /// entries pruned.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            *rows[r].entry(c).or_insert(C64::new(0.0, 0.0)) += v;
        }
        Self::from_row_maps(nrows, ncols, rows)
    }

    fn from_row_maps(nrows: usize, ncols: usize, rows: Vec<BTreeMap<usize, C64>>) -> Self {
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v.norm() > PRUNE_TOL {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { nrows, ncols, row_ptr, cols, vals, symmetry: Symmetry::General }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let (nr, nc) = m.shape();
        let mut row_ptr = Vec::with_capacity(nr + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..nr {
            for j in 0..nc {
                let v = m[(i, j)];
                if v.norm() > PRUNE_TOL {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { nrows: nr, ncols: nc, row_ptr, cols, vals, symmetry: Symmetry::General }
    }

    pub fn from_real_dense(m: &DMatrix<f64>) -> Self {
        Self::from_dense(&m.map(|x| C64::new(x, 0.0)))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(self.nrows, self.ncols, C64::new(0.0, 0.0));
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Flags the matrix after verifying the property to `tol` (max-abs).
    pub fn with_symmetry(mut self, symmetry: Symmetry, tol: f64) -> Result<Self> {
        let defect = match symmetry {
            Symmetry::General => 0.0,
            Symmetry::Hermitian => self.hermitian_defect(),
            Symmetry::AntiHermitian => self.anti_hermitian_defect(),
        };
        if defect > tol {
            return Err(Error::Numerical(format!(
                "{symmetry:?} flag rejected: defect {defect:e} > {tol:e}"
            )));
        }
        self.symmetry = symmetry;
        Ok(self)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(k) => self.vals[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// y = A x. Rows are computed independently, so the result does not
    /// depend on the thread count.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matvec length");
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        let row = |i: usize| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            acc
        };
        if self.nnz() > 1 << 14 {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        } else {
            y.iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out.symmetry = Symmetry::General;
        out.pruned()
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// a·A + b·B.
    pub fn lin_comb(a: C64, lhs: &Self, b: C64, rhs: &Self) -> Self {
        assert_eq!((lhs.nrows, lhs.ncols), (rhs.nrows, rhs.ncols), "lin_comb shape");
        let mut row_ptr = Vec::with_capacity(lhs.nrows + 1);
        let mut cols = Vec::with_capacity(lhs.nnz() + rhs.nnz());
        let mut vals = Vec::with_capacity(lhs.nnz() + rhs.nnz());
        row_ptr.push(0);
        for i in 0..lhs.nrows {
            let (mut p, pe) = (lhs.row_ptr[i], lhs.row_ptr[i + 1]);
            let (mut q, qe) = (rhs.row_ptr[i], rhs.row_ptr[i + 1]);
            while p < pe || q < qe {
                let (c, v) = if q >= qe || (p < pe && lhs.cols[p] < rhs.cols[q]) {
                    p += 1;
                    (lhs.cols[p - 1], a * lhs.vals[p - 1])
                } else if p >= pe || rhs.cols[q] < lhs.cols[p] {
                    q += 1;
                    (rhs.cols[q - 1], b * rhs.vals[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (lhs.cols[p - 1], a * lhs.vals[p - 1] + b * rhs.vals[q - 1])
                };
                if v.norm() > PRUNE_TOL {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { nrows: lhs.nrows, ncols: lhs.ncols, row_ptr, cols, vals, symmetry: Symmetry::General }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::lin_comb(C64::new(1.0, 0.0), self, C64::new(1.0, 0.0), rhs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::lin_comb(C64::new(1.0, 0.0), self, C64::new(-1.0, 0.0), rhs)
    }

    /// Sparse product A·B with a dense accumulator per row.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "mul shape");
        let rows: Vec<(Vec<usize>, Vec<C64>)> = (0..self.nrows)
            .into_par_iter()
            .map(|i| {
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for (k, a) in self.row(i) {
                    for (j, b) in rhs.row(k) {
                        *acc.entry(j).or_insert(C64::new(0.0, 0.0)) += a * b;
                    }
                }
                acc.into_iter().filter(|(_, v)| v.norm() > PRUNE_TOL).unzip()
            })
            .collect();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (c, v) in rows {
            cols.extend(c);
            vals.extend(v);
            row_ptr.push(cols.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: rhs.ncols, row_ptr, cols, vals, symmetry: Symmetry::General }
    }

    pub fn adjoint(&self) -> Self {
        let t = self.iter().map(|(i, j, v)| (j, i, v.conj()));
        let mut out = Self::from_triplets(self.ncols, self.nrows, t);
        out.symmetry = self.symmetry;
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    /// {A, B} = AB + BA.
    pub fn anticommutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).add(&rhs.mul(self))
    }

    /// Kronecker product with index fusion (i₁, i₂) ↦ i₁·dim(b) + i₂, i.e. the
    /// left factor is the slow (major) index.
    pub fn kron(a: &Self, b: &Self) -> Self {
        Self::kron_capped(a, b, DEFAULT_KRON_CAP).expect("kron exceeds default cap")
    }

    pub fn kron_capped(a: &Self, b: &Self, cap: usize) -> Result<Self> {
        let nr = a.nrows.checked_mul(b.nrows).unwrap_or(usize::MAX);
        let nc = a.ncols.checked_mul(b.ncols).unwrap_or(usize::MAX);
        if nr.max(nc) > cap {
            return Err(Error::ResourceCap { what: "kron dimension", value: nr.max(nc), cap });
        }
        let mut row_ptr = Vec::with_capacity(nr + 1);
        let mut cols = Vec::with_capacity(a.nnz() * b.nnz());
        let mut vals = Vec::with_capacity(a.nnz() * b.nnz());
        row_ptr.push(0);
        for i1 in 0..a.nrows {
            for i2 in 0..b.nrows {
                for (j1, va) in a.row(i1) {
                    for (j2, vb) in b.row(i2) {
                        let v = va * vb;
                        if v.norm() > PRUNE_TOL {
                            cols.push(j1 * b.ncols + j2);
                            vals.push(v);
                        }
                    }
                }
                row_ptr.push(cols.len());
            }
        }
        Ok(CsrMatrix { nrows: nr, ncols: nc, row_ptr, cols, vals, symmetry: Symmetry::General })
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// ‖A − A*‖_max.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// ‖A + A*‖_max.
    pub fn anti_hermitian_defect(&self) -> f64 {
        self.add(&self.adjoint()).max_abs()
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).sum()
    }

    /// Dense block A[rows, cols].
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<C64> {
        let mut pos = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            pos[c] = k;
        }
        let mut m = DMatrix::from_element(rows.len(), cols.len(), C64::new(0.0, 0.0));
        for (r, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    m[(r, pos[j])] = v;
                }
            }
        }
        m
    }

    /// Copy with entries below `tol` dropped.
    pub fn pruned_to(&self, tol: f64) -> Self {
        let t = self.iter().filter(|(_, _, v)| v.norm() > tol);
        let mut out = Self::from_triplets(self.nrows, self.ncols, t);
        out.symmetry = self.symmetry;
        out
    }

    fn pruned(self) -> Self {
        if self.vals.iter().all(|v| v.norm() > PRUNE_TOL) {
            self
        } else {
            self.pruned_to(PRUNE_TOL)
        }
    }

    /// True when every row has sorted unique column indices.
    pub fn is_well_formed(&self) -> bool {
        (0..self.nrows).all(|i| {
            let c = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
            c.windows(2).all(|w| w[0] < w[1]) && c.iter().all(|&j| j < self.ncols)
        }) && self.vals.iter().all(|v| v.norm() > PRUNE_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, density: f64, rng: &mut ChaCha8Rng) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if rng.gen::<f64>() < density {
                    t.push((i, j, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    fn dense_kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        let (ar, ac) = a.shape();
        let (br, bc) = b.shape();
        DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = CsrMatrix::kron(&CsrMatrix::identity(2), &CsrMatrix::identity(3));
        assert_eq!(k.dim(), 6);
        assert_eq!(k.max_abs_diff(&CsrMatrix::identity(6)), 0.0);
    }

    #[test]
    fn kron_matvec_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(4, 0.6, &mut rng);
        let b = random(4, 0.6, &mut rng);
        let k = CsrMatrix::kron(&a, &b);
        let dk = dense_kron(&a.to_dense(), &b.to_dense());
        let x: Vec<C64> = (0..16).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let y = k.matvec(&x);
        let yd = &dk * nalgebra::DVector::from_vec(x.clone());
        let diff = y.iter().zip(yd.iter()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a, b, c, d) = (
            random(3, 0.5, &mut rng),
            random(4, 0.5, &mut rng),
            random(3, 0.5, &mut rng),
            random(4, 0.5, &mut rng),
        );
        let lhs = CsrMatrix::kron(&a, &b).mul(&CsrMatrix::kron(&c, &d));
        let rhs = CsrMatrix::kron(&a.mul(&c), &b.mul(&d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn kron_cap_is_enforced() {
        let big = CsrMatrix::identity(1 << 13);
        assert!(matches!(
            CsrMatrix::kron_capped(&big, &big, DEFAULT_KRON_CAP),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn assembly_keeps_rows_sorted_and_pruned() {
        let m = CsrMatrix::from_triplets(
            2,
            3,
            vec![
                (0, 2, C64::new(1.0, 0.0)),
                (0, 0, C64::new(2.0, 0.0)),
                (0, 2, C64::new(-1.0, 0.0)),
                (1, 1, C64::new(1e-17, 0.0)),
            ],
        );
        assert!(m.is_well_formed());
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), C64::new(2.0, 0.0));
    }

    #[test]
    fn hermitian_flag_verified() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random(5, 0.5, &mut rng);
        let h = a.add(&a.adjoint());
        assert!(h.clone().with_symmetry(Symmetry::Hermitian, 1e-12).is_ok());
        assert!(a.with_symmetry(Symmetry::Hermitian, 1e-12).is_err());
    }

    #[test]
    fn matvec_is_thread_count_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random(300, 0.3, &mut rng);
        let x: Vec<C64> = (0..300).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let y1 = a.matvec(&x);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let y2 = pool.install(|| a.matvec(&x));
        assert_eq!(y1, y2);
    }
}
