use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CompositeOperator, DiracSetup, DoubledOperator};
use crate::boson::{cs_unitary, polynomial_multiplication_op, position_op, UnitaryRoute};
use crate::numerics::{dense, CsrMatrix};
use crate::polynomial::CubicPolynomial;
use crate::{Result, C64};

/// Boson factors of 𝒟^U: B⁺ᵢ = U∂̂ᵢU* and B⁻ᵢ = U*∂̂ᵢU.
#[derive(Clone, Debug)]
pub struct Rotated {
    pub k: f64,
    pub plus: Vec<DMatrix<C64>>,
    pub minus: Vec<DMatrix<C64>>,
    /// max |U∂̂U* − (∂̂ − [∂̂, U]U*)| over modes and both blocks.
    pub route_agreement: f64,
}

impl Rotated {
    pub fn block(&self, setup: &DiracSetup, plus: bool) -> CompositeOperator {
        let (bs, cs) = if plus { (&self.plus, &setup.cbar_plus) } else { (&self.minus, &setup.cbar_minus) };
        CompositeOperator {
            boson_dim: setup.boson.dim(),
            fermion_dim: setup.fock.dim(),
            terms: bs.iter().map(CsrMatrix::from_dense).zip(cs.iter().cloned()).collect(),
        }
    }

    pub fn to_doubled(&self, setup: &DiracSetup) -> Result<DoubledOperator> {
        DoubledOperator::diagonal(self.block(setup, true).to_csr()?, self.block(setup, false).to_csr()?)
    }
}

// Complex matrix as real and imaginary parts, so products run on the real GEMM.
#[derive(Clone)]
struct Split {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl Split {
    fn from_complex(m: &DMatrix<C64>) -> Self {
        Split { re: m.map(|z| z.re), im: m.map(|z| z.im) }
    }

    fn real(m: DMatrix<f64>) -> Self {
        let im = DMatrix::zeros(m.nrows(), m.ncols());
        Split { re: m, im }
    }

    fn mul(&self, o: &Split) -> Split {
        Split { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    fn sub(&self, o: &Split) -> Split {
        Split { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn adjoint(&self) -> Split {
        Split { re: self.re.transpose(), im: -self.im.transpose() }
    }

    fn to_complex(&self) -> DMatrix<C64> {
        self.re.zip_map(&self.im, C64::new)
    }
}

/// 𝒟^U = U𝒟U* with U = diag(e^{ik·CS(x̂)}, e^{−ik·CS(x̂)}). Needs the dense route.
pub fn rotate(setup: &DiracSetup, k: f64, poly: &CubicPolynomial) -> Result<Rotated> {
    let u = cs_unitary(&setup.boson, k, poly, UnitaryRoute::Dense)?;
    let u = Split::from_complex(u.dense().expect("dense route"));
    let ua = u.adjoint();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut agreement: f64 = 0.0;
    for d in &setup.derivatives {
        // ∂̂ is real in the oscillator basis
        let d = Split::real(d.to_dense().map(|z| z.re));
        for (w, wa, out) in [(&u, &ua, &mut plus), (&ua, &u, &mut minus)] {
            let wd = w.mul(&d);
            let direct = wd.mul(wa);
            let comm = d.mul(w).sub(&wd);
            let via = d.sub(&comm.mul(wa));
            let diff = direct.sub(&via);
            agreement = agreement.max(diff.re.abs().max().max(diff.im.abs().max()));
            out.push(direct.to_complex());
        }
    }
    Ok(Rotated { k, plus, minus, route_agreement: agreement })
}

/// Names of the dictionary terms, in fit order.
pub const TERMS: [&str; 4] = ["sum_d2", "v_dot_d", "v_squared", "cs_laplacian"];

/// Coefficients of one diagonal block, as [re, im] pairs.
#[derive(Clone, Debug, Serialize)]
pub struct BlockFit {
    pub sign: i8,
    pub coefficients: Vec<[f64; 2]>,
    pub expected: Vec<[f64; 2]>,
    pub residual: f64,
    pub coefficient_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub k: f64,
    pub low_dim: usize,
    pub terms: Vec<&'static str>,
    pub route_agreement: f64,
    pub plus: BlockFit,
    pub minus: BlockFit,
    /// −(coefficient of Σ∂̂²): the c̄² normalization.
    pub fermionic_normalization: f64,
    pub opposite_cross_terms: bool,
    pub opposite_spectral_terms: bool,
    /// Fit residual of the x-dependent frame square, when requested.
    pub xi_residual: Option<f64>,
}

/// Linearly x-dependent frame: c̄ᵢ → c̄ᵢ + ε Σⱼ x̂ⱼ Σₗ (Aⱼ)ₗᵢ c̄ₗ with seeded random Aⱼ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct XiFrame {
    pub epsilon: f64,
    pub seed: u64,
}

// Σ_{s,t} (X_s X_t)[low, low] ⊗ F_s F_t.
fn square_low(terms: &[(DMatrix<C64>, DMatrix<C64>)], low: &[usize]) -> DMatrix<C64> {
    let l = low.len();
    let f = terms.first().map_or(1, |t| t.1.nrows());
    let rows: Vec<DMatrix<C64>> = terms.iter().map(|(x, _)| x.select_rows(low)).collect();
    let cols: Vec<DMatrix<C64>> = terms.iter().map(|(x, _)| x.select_columns(low)).collect();
    let mut out = DMatrix::zeros(l * f, l * f);
    for (s, (_, fs)) in terms.iter().enumerate() {
        for (t, (_, ft)) in terms.iter().enumerate() {
            let b = &rows[s] * &cols[t];
            out += b.kronecker(&(fs * ft));
        }
    }
    out
}

pub(super) fn square_low_pub(bs: &[DMatrix<C64>], cs: &[CsrMatrix], low: &[usize]) -> DMatrix<C64> {
    square_low(&dense_terms(bs, cs), low)
}

fn dictionary(setup: &DiracSetup, poly: &CubicPolynomial, low: &[usize]) -> Result<Vec<DMatrix<C64>>> {
    let boson = &setup.boson;
    let dim = boson.dim();
    let id_f = DMatrix::<C64>::identity(setup.fock.dim(), setup.fock.dim());
    let mut d2 = CsrMatrix::zeros(dim, dim);
    let mut vd = CsrMatrix::zeros(dim, dim);
    let mut v2 = CsrMatrix::zeros(dim, dim);
    for (i, d) in setup.derivatives.iter().enumerate() {
        let v = polynomial_multiplication_op(boson, &poly.partial(i)?.scale(0.5))?;
        d2 = d2.add(&d.mul(d));
        vd = vd.add(&v.mul(d));
        v2 = v2.add(&v.mul(&v));
    }
    let lap = polynomial_multiplication_op(boson, &poly.laplacian())?;
    Ok([d2, vd, v2, lap].iter().map(|m| m.submatrix(low, low).kronecker(&id_f)).collect())
}

// Least squares over the dictionary; returns (coefficients, max-abs residual).
fn fit(target: &DMatrix<C64>, dict: &[DMatrix<C64>]) -> (Vec<C64>, f64) {
    let rows = target.len();
    let a = DMatrix::from_fn(rows, dict.len(), |r, c| dict[c][r]);
    let b = DMatrix::from_column_slice(rows, 1, target.as_slice());
    let coef = a.clone().svd(true, true).solve(&b, 1e-14).expect("svd with both factors");
    let resid = b - a * &coef;
    (coef.iter().copied().collect(), dense::max_abs(&resid))
}

fn block_fit(sign: i8, s: &DMatrix<C64>, dict: &[DMatrix<C64>], k: f64) -> BlockFit {
    let (coef, residual) = fit(s, dict);
    let sg = sign as f64;
    let expected = [
        C64::new(-0.5, 0.0),
        C64::new(0.0, 2.0 * k * sg),
        C64::new(2.0 * k * k, 0.0),
        C64::new(0.0, 0.5 * k * sg),
    ];
    let coefficient_error = coef.iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    BlockFit {
        sign,
        coefficients: coef.iter().map(|z| [z.re, z.im]).collect(),
        expected: expected.iter().map(|z| [z.re, z.im]).collect(),
        residual,
        coefficient_error,
    }
}

fn dense_terms(bs: &[DMatrix<C64>], cs: &[CsrMatrix]) -> Vec<(DMatrix<C64>, DMatrix<C64>)> {
    bs.iter().cloned().zip(cs.iter().map(CsrMatrix::to_dense)).collect()
}

/// Diagonal blocks of (𝒟^U)² on the low subspace (occupations ≤ cutoff − margin), fitted
/// over {Σ∂̂ᵢ², Σvᵢ∂̂ᵢ, Σvᵢ², ΔCS} ⊗ 𝟙 with v = ½∇CS.
pub fn square_and_decompose(
    setup: &DiracSetup,
    rotated: &Rotated,
    poly: &CubicPolynomial,
    margin: usize,
    xi: Option<XiFrame>,
) -> Result<DecompositionReport> {
    let low = setup.boson.low_indices(margin);
    let dict = dictionary(setup, poly, &low)?;
    let k = rotated.k;
    let sp = square_low(&dense_terms(&rotated.plus, &setup.cbar_plus), &low);
    let sm = square_low(&dense_terms(&rotated.minus, &setup.cbar_minus), &low);
    let plus = block_fit(1, &sp, &dict, k);
    let minus = block_fit(-1, &sm, &dict, k);
    let opposite = |t: usize| plus.coefficients[t][1] * minus.coefficients[t][1] < 0.0;
    let xi_residual = match xi {
        Some(frame) => Some(xi_square_residual(setup, rotated, &low, &dict, frame)?),
        None => None,
    };
    Ok(DecompositionReport {
        k,
        low_dim: low.len(),
        terms: TERMS.to_vec(),
        route_agreement: rotated.route_agreement,
        fermionic_normalization: -plus.coefficients[0][0],
        opposite_cross_terms: opposite(1),
        opposite_spectral_terms: opposite(3),
        plus,
        minus,
        xi_residual,
    })
}

fn xi_square_residual(
    setup: &DiracSetup,
    rotated: &Rotated,
    low: &[usize],
    dict: &[DMatrix<C64>],
    frame: XiFrame,
) -> Result<f64> {
    let n = setup.n();
    let m = setup.m();
    let mut rng = ChaCha8Rng::seed_from_u64(frame.seed);
    let mut terms = dense_terms(&rotated.plus, &setup.cbar_plus);
    for j in 0..n {
        let x = position_op(&setup.boson, j)?;
        let a: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..n {
            let mut f = DMatrix::<C64>::zeros(setup.fock.dim(), setup.fock.dim());
            for l in 0..m {
                f += setup.cbar_mode(l)?.to_dense() * C64::new(frame.epsilon * a[l * n + i], 0.0);
            }
            terms.push((x.mul(&CsrMatrix::from_dense(&rotated.plus[i])).to_dense(), f));
        }
    }
    let s = square_low(&terms, low);
    Ok(fit(&s, dict).1)
}

/// max |(𝒟^U)² − 𝒟²| on the low subspace, both blocks.
pub fn square_difference(setup: &DiracSetup, rotated: &Rotated, margin: usize) -> f64 {
    let low = setup.boson.low_indices(margin);
    let bare: Vec<DMatrix<C64>> = setup.derivatives.iter().map(CsrMatrix::to_dense).collect();
    let mut worst: f64 = 0.0;
    for (bs, cs) in [(&rotated.plus, &setup.cbar_plus), (&rotated.minus, &setup.cbar_minus)] {
        let d = square_low(&dense_terms(bs, cs), &low) - square_low(&dense_terms(&bare, cs), &low);
        worst = worst.max(dense::max_abs(&d));
    }
    worst
}

/// ‖(𝒟^U)² − 𝒟²‖ on the low subspace of the + block, at k₁ over k₂.
pub fn small_k_ratio(setup: &DiracSetup, poly: &CubicPolynomial, k1: f64, k2: f64, margin: usize) -> Result<f64> {
    let low = setup.boson.low_indices(margin);
    let bare: Vec<DMatrix<C64>> = setup.derivatives.iter().map(CsrMatrix::to_dense).collect();
    let s0 = square_low(&dense_terms(&bare, &setup.cbar_plus), &low);
    let diff = |k: f64| -> Result<f64> {
        let r = rotate(setup, k, poly)?;
        Ok(dense::max_abs(&(square_low(&dense_terms(&r.plus, &setup.cbar_plus), &low) - &s0)))
    };
    Ok(diff(k1)? / diff(k2)?)
}
