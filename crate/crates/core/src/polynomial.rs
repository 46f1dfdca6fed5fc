//! Real polynomials of degree at most three in N variables, with fully
//! symmetric coefficient storage.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// c + Σ lᵢxᵢ + Σ Qᵢⱼxᵢxⱼ + Σ Cᵢⱼₖxᵢxⱼxₖ with Q and C symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicPolynomial {
    n: usize,
    pub constant: f64,
    pub linear: Vec<f64>,
    pub quadratic: DMatrix<f64>,
    /// Flattened N×N×N, index (i·N + j)·N + k.
    pub cubic: Vec<f64>,
}

/// One monomial with sorted variable indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub vars: Vec<usize>,
}

impl CubicPolynomial {
    pub fn zeros(n: usize) -> Self {
        CubicPolynomial {
            n,
            constant: 0.0,
            linear: vec![0.0; n],
            quadratic: DMatrix::zeros(n, n),
            cubic: vec![0.0; n * n * n],
        }
    }

    /// Sum of monomials; each term is (coefficient, variable indices with repetition).
    pub fn from_terms(n: usize, terms: &[(f64, Vec<usize>)]) -> Result<Self> {
        let mut p = Self::zeros(n);
        for (c, vars) in terms {
            if let Some(&bad) = vars.iter().find(|&&v| v >= n) {
                return Err(Error::OutOfRange { index: bad, bound: n });
            }
            match vars.as_slice() {
                [] => p.constant += c,
                [i] => p.linear[*i] += c,
                [i, j] => {
                    p.quadratic[(*i, *j)] += c / 2.0;
                    p.quadratic[(*j, *i)] += c / 2.0;
                }
                [i, j, k] => {
                    for (a, b, d) in permutations3(*i, *j, *k) {
                        p.cubic[(a * n + b) * n + d] += c / 6.0;
                    }
                }
                _ => return Err(Error::domain(format!("monomial of degree {} exceeds 3", vars.len()))),
            }
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cubic[(i * self.n + j) * self.n + k]
    }

    pub fn degree(&self) -> usize {
        if self.cubic.iter().any(|&c| c != 0.0) {
            3
        } else if self.quadratic.iter().any(|&c| c != 0.0) {
            2
        } else if self.linear.iter().any(|&c| c != 0.0) {
            1
        } else {
            0
        }
    }

    /// Largest deviation of Q from Qᵀ and of C from its index permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut d = (&self.quadratic - self.quadratic.transpose()).abs().max();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for (a, b, e) in permutations3(i, j, k) {
                        d = d.max((self.c(i, j, k) - self.c(a, b, e)).abs());
                    }
                }
            }
        }
        d
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        crate::error::check_len(self.n, x.len())?;
        let n = self.n;
        let mut s = self.constant;
        for i in 0..n {
            s += self.linear[i] * x[i];
            for j in 0..n {
                let xij = x[i] * x[j];
                s += self.quadratic[(i, j)] * xij;
                if xij != 0.0 {
                    let row = &self.cubic[(i * n + j) * n..(i * n + j + 1) * n];
                    s += xij * row.iter().zip(x).map(|(c, xk)| c * xk).sum::<f64>();
                }
            }
        }
        Ok(s)
    }

    /// ∂/∂xᵢ as a polynomial of degree ≤ 2.
    pub fn partial(&self, i: usize) -> Result<CubicPolynomial> {
        if i >= self.n {
            return Err(Error::OutOfRange { index: i, bound: self.n });
        }
        let n = self.n;
        let mut p = Self::zeros(n);
        p.constant = self.linear[i];
        for j in 0..n {
            p.linear[j] = 2.0 * self.quadratic[(i, j)];
            for k in 0..n {
                p.quadratic[(j, k)] = 3.0 * self.c(i, j, k);
            }
        }
        Ok(p)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_len(self.n, x.len())?;
        let n = self.n;
        let mut g = vec![0.0; n];
        for (i, gi) in g.iter_mut().enumerate() {
            let mut s = self.linear[i];
            for j in 0..n {
                s += 2.0 * self.quadratic[(i, j)] * x[j];
                if x[j] != 0.0 {
                    let row = &self.cubic[(i * n + j) * n..(i * n + j + 1) * n];
                    s += 3.0 * x[j] * row.iter().zip(x).map(|(c, xk)| c * xk).sum::<f64>();
                }
            }
            *gi = s;
        }
        Ok(g)
    }

    /// Σᵢ ∂²/∂xᵢ² as a polynomial of degree ≤ 1.
    pub fn laplacian(&self) -> CubicPolynomial {
        let n = self.n;
        let mut p = Self::zeros(n);
        p.constant = 2.0 * self.quadratic.trace();
        for k in 0..n {
            p.linear[k] = 6.0 * (0..n).map(|i| self.c(i, i, k)).sum::<f64>();
        }
        p
    }

    pub fn scale(&self, s: f64) -> CubicPolynomial {
        CubicPolynomial {
            n: self.n,
            constant: self.constant * s,
            linear: self.linear.iter().map(|v| v * s).collect(),
            quadratic: &self.quadratic * s,
            cubic: self.cubic.iter().map(|v| v * s).collect(),
        }
    }

    /// Nonzero monomials with sorted indices, each multiplicity folded into the coefficient.
    pub fn monomials(&self) -> Vec<Monomial> {
        let n = self.n;
        let mut out = Vec::new();
        let mut push = |c: f64, vars: Vec<usize>| {
            if c != 0.0 {
                out.push(Monomial { coefficient: c, vars });
            }
        };
        push(self.constant, vec![]);
        for i in 0..n {
            push(self.linear[i], vec![i]);
        }
        for i in 0..n {
            for j in i..n {
                let m = if i == j { 1.0 } else { 2.0 };
                push(m * self.quadratic[(i, j)], vec![i, j]);
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let m = permutations3(i, j, k).iter().collect::<std::collections::BTreeSet<_>>().len() as f64;
                    push(m * self.c(i, j, k), vec![i, j, k]);
                }
            }
        }
        out
    }
}

pub(crate) fn permutations3(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
}
