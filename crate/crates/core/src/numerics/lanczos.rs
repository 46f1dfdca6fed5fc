//! Hermitian Lanczos with full reorthogonalization.
//!
//! Eigenpairs are extracted one at a time: each restart runs a fresh Krylov
//! sequence from a seeded start vector kept orthogonal to the already locked
//! eigenvectors, and locks the lowest Ritz pair once its explicit residual is
//! below tolerance. Locking makes repeated eigenvalues (which a single Krylov
//! sequence cannot resolve) come out with their full multiplicity.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::dense_eigh_real;
use super::sparse::{CsrMatrix, Symmetry};
use super::{dot, norm};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Residual tolerance ‖Av − λv‖ for accepting a pair.
    pub tol: f64,
    /// Krylov steps allowed per restart (capped by the free dimension).
    pub max_krylov: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-9, max_krylov: 400, seed: crate::DEFAULT_SEED }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EigenStatus {
    Converged,
    NotConverged { found: usize, requested: usize },
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    /// Krylov steps spent on each pair.
    pub iterations: Vec<usize>,
    pub status: EigenStatus,
    pub seed: u64,
}

impl EigenResult {
    /// ‖V*V − 𝟙‖_max over the returned vectors.
    pub fn orthogonality_defect(&self) -> f64 {
        let k = self.vectors.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&self.vectors[i], &self.vectors[j]) - target).norm());
            }
        }
        worst
    }
}

/// Lowest `count` eigenpairs of a Hermitian-flagged sparse matrix.
pub fn lanczos_hermitian(op: &CsrMatrix, count: usize, opts: &LanczosOptions) -> Result<EigenResult> {
    if op.symmetry() != Symmetry::Hermitian {
        return Err(Error::domain("lanczos_hermitian requires a Hermitian-flagged operator"));
    }
    lanczos_with(op.dim(), |x| op.matvec(x), count, opts)
}

/// Same as [`lanczos_hermitian`] for an operator given by its action.
pub fn lanczos_with<F>(dim: usize, apply: F, count: usize, opts: &LanczosOptions) -> Result<EigenResult>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    if count >= dim {
        return Err(Error::domain(format!("requested {count} eigenpairs of a {dim}-dimensional operator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut iterations = Vec::new();

    while locked.len() < count {
        let free = dim - locked.len();
        let steps = opts.max_krylov.min(free);
        let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        orthogonalize(&mut v, &locked);
        orthogonalize(&mut v, &locked);
        let nv = norm(&v);
        if nv < 1e-12 {
            return Err(Error::Numerical("start vector collapsed against locked vectors".into()));
        }
        v.iter_mut().for_each(|z| *z /= nv);

        let mut basis: Vec<Vec<C64>> = vec![v];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut accepted = None;

        for j in 0..steps {
            let mut w = apply(&basis[j]);
            let a = dot(&basis[j], &w).re;
            for (k, z) in w.iter_mut().enumerate() {
                *z -= basis[j][k] * a;
                if j > 0 {
                    *z -= basis[j - 1][k] * beta[j - 1];
                }
            }
            // Full reorthogonalization, twice.
            for _ in 0..2 {
                orthogonalize(&mut w, &locked);
                orthogonalize(&mut w, &basis);
            }
            alpha.push(a);
            let b = norm(&w);
            let m = alpha.len();
            let exhausted = b < 1e-12 || m == steps;
            if exhausted || m < 40 || m % 4 == 0 {
                let t = DMatrix::from_fn(m, m, |r, c| {
                    if r == c {
                        alpha[r]
                    } else if r + 1 == c {
                        beta[r]
                    } else if c + 1 == r {
                        beta[c]
                    } else {
                        0.0
                    }
                });
                let (theta, s) = dense_eigh_real(&t);
                let estimate = (b * s[(m - 1, 0)]).abs();
                if estimate < 0.5 * opts.tol || exhausted {
                    let mut y = vec![C64::new(0.0, 0.0); dim];
                    for (k, bk) in basis.iter().enumerate() {
                        let c = s[(k, 0)];
                        y.iter_mut().zip(bk).for_each(|(yi, bi)| *yi += bi * c);
                    }
                    orthogonalize(&mut y, &locked);
                    let ny = norm(&y);
                    y.iter_mut().for_each(|z| *z /= ny);
                    let ay = apply(&y);
                    let lam = dot(&y, &ay).re;
                    let res = norm(&ay.iter().zip(&y).map(|(p, q)| p - q * lam).collect::<Vec<_>>());
                    if res < opts.tol {
                        accepted = Some((lam, y, res, m));
                        break;
                    }
                    let _ = theta;
                }
                if exhausted {
                    break;
                }
            }
            beta.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        }

        match accepted {
            Some((lam, y, res, m)) => {
                values.push(lam);
                locked.push(y);
                residuals.push(res);
                iterations.push(m);
            }
            None => {
                return Ok(finish(values, locked, residuals, iterations, EigenStatus::NotConverged { found: 0, requested: count }, count, opts.seed));
            }
        }
    }
    Ok(finish(values, locked, residuals, iterations, EigenStatus::Converged, count, opts.seed))
}

fn finish(
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    residuals: Vec<f64>,
    iterations: Vec<usize>,
    status: EigenStatus,
    count: usize,
    seed: u64,
) -> EigenResult {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let status = match status {
        EigenStatus::NotConverged { .. } => EigenStatus::NotConverged { found: values.len(), requested: count },
        s => s,
    };
    EigenResult {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
        residuals: order.iter().map(|&i| residuals[i]).collect(),
        iterations: order.iter().map(|&i| iterations[i]).collect(),
        status,
        seed,
    }
}

fn orthogonalize(v: &mut [C64], against: &[Vec<C64>]) {
    for q in against {
        let c = dot(q, v);
        v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= qi * c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dense::dense_eigh;

    #[test]
    fn diagonal_lowest_three() {
        let d: Vec<C64> = (0..50).map(|i| C64::new(i as f64, 0.0)).collect();
        let op = CsrMatrix::diagonal(&d).with_symmetry(Symmetry::Hermitian, 0.0).unwrap();
        let r = lanczos_hermitian(&op, 3, &LanczosOptions::default()).unwrap();
        assert_eq!(r.status, EigenStatus::Converged);
        for (k, v) in r.values.iter().enumerate() {
            assert!((v - k as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn random_hermitian_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200;
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = (&a + a.adjoint()).scale(0.5);
        let op = CsrMatrix::from_dense(&h).with_symmetry(Symmetry::Hermitian, 1e-12).unwrap();
        let r = lanczos_hermitian(&op, 5, &LanczosOptions::default()).unwrap();
        let exact = dense_eigh(&h).unwrap();
        for k in 0..5 {
            assert!((r.values[k] - exact.values[k]).abs() < 1e-9, "{k}: {} vs {}", r.values[k], exact.values[k]);
        }
        assert!(r.orthogonality_defect() < 1e-8);
    }

    #[test]
    fn repeated_eigenvalue_multiplicity_is_resolved() {
        let mut d: Vec<C64> = vec![C64::new(0.0, 0.0); 4];
        d.extend((1..30).map(|i| C64::new(i as f64, 0.0)));
        let op = CsrMatrix::diagonal(&d).with_symmetry(Symmetry::Hermitian, 0.0).unwrap();
        let r = lanczos_hermitian(&op, 5, &LanczosOptions::default()).unwrap();
        assert_eq!(&r.values.iter().map(|v| v.round() as i64).collect::<Vec<_>>(), &[0, 0, 0, 0, 1]);
    }

    #[test]
    fn unflagged_operator_rejected() {
        let op = CsrMatrix::identity(10);
        assert!(lanczos_hermitian(&op, 2, &LanczosOptions::default()).is_err());
    }
}
