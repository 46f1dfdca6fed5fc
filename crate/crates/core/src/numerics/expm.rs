//! Krylov (Lanczos) approximation of exp(i·s·H)·v for Hermitian H.

use nalgebra::DMatrix;

use super::dense::dense_eigh_real;
use super::{dot, norm};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct ExpmOptions {
    pub tol: f64,
    pub max_krylov: usize,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        ExpmOptions { tol: 1e-13, max_krylov: 300 }
    }
}

/// exp(i·s·H)·v with H given by its action. An invariant Krylov subspace
/// (happy breakdown) terminates early with the exact projected result.
pub fn expm_action<F>(apply: F, s: f64, v: &[C64], opts: &ExpmOptions) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = v.len();
    let nv = norm(v);
    if nv == 0.0 || s == 0.0 {
        return Ok(v.to_vec());
    }
    let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|z| z / nv).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = opts.max_krylov.min(n);
    for j in 0..steps {
        let mut w = apply(&basis[j]);
        let a = dot(&basis[j], &w).re;
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= qi * c);
            }
        }
        alpha.push(a);
        let b = norm(&w);
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c || c + 1 == r {
                beta[r.min(c)]
            } else {
                0.0
            }
        });
        let (theta, q) = dense_eigh_real(&t);
        // coefficients of exp(i s T) e1
        let coeff: Vec<C64> = (0..m)
            .map(|r| (0..m).map(|k| q[(r, k)] * q[(0, k)] * C64::new(0.0, s * theta[k]).exp()).sum())
            .collect();
        let estimate = b * coeff[m - 1].norm();
        if estimate < opts.tol || b < 1e-13 || m == n {
            let mut y = vec![C64::new(0.0, 0.0); n];
            for (k, bk) in basis.iter().enumerate() {
                let c = coeff[k] * nv;
                y.iter_mut().zip(bk).for_each(|(yi, bi)| *yi += bi * c);
            }
            return Ok(y);
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    Err(Error::Numerical(format!("Krylov exponential did not converge in {steps} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dense::{dense_expm_hermitian, max_abs};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (DMatrix<C64>, Vec<C64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = (&a + a.adjoint()).scale(0.5);
        let v = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        (h, v)
    }

    fn apply(h: &DMatrix<C64>) -> impl Fn(&[C64]) -> Vec<C64> + '_ {
        move |x| (h * DVector::from_column_slice(x)).iter().copied().collect()
    }

    #[test]
    fn zero_scale_is_identity() {
        let (h, v) = setup(20);
        assert_eq!(expm_action(apply(&h), 0.0, &v, &ExpmOptions::default()).unwrap(), v);
    }

    #[test]
    fn norm_preserved_and_matches_dense() {
        let (h, v) = setup(50);
        let y = expm_action(apply(&h), 0.8, &v, &ExpmOptions::default()).unwrap();
        assert!((norm(&y) - norm(&v)).abs() < 1e-10);
        let u = dense_expm_hermitian(&h, 0.8).unwrap();
        let yd = &u * DVector::from_vec(v.clone());
        let diff = DMatrix::from_fn(50, 1, |r, _| y[r] - yd[r]);
        assert!(max_abs(&diff) < 1e-9);
    }
}
