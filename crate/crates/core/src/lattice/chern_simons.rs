use rayon::prelude::*;

use super::cochain::LieCochain;
use super::lie::Mat2;
use super::modes::ModeBasis;
use crate::polynomial::CubicPolynomial;
use crate::{Error, Result};

/// A = Σᵢ xᵢ ξᵢ.
pub fn connection(basis: &ModeBasis, x: &[f64]) -> Result<LieCochain> {
    basis.combine(x)
}

/// CS(A) = ∫Tr(A∧dA + ⅔ A∧A∧A), evaluated by cochain arithmetic.
pub fn cs_direct(basis: &ModeBasis, x: &[f64]) -> Result<f64> {
    let lat = basis.lattice();
    let a = connection(basis, x)?;
    let da = a.coboundary(lat)?;
    let quad = a.wedge(&da, lat)?.trace_integrate(lat)?;
    let aa = a.wedge(&a, lat)?;
    let cubic = a.wedge(&aa, lat)?.trace_integrate(lat)?;
    Ok((quad + cubic * (2.0 / 3.0)).re)
}

// ∫Tr(α∧β∧γ) for one-forms, summed pointwise over the six orderings.
fn triple(basis: &ModeBasis, i: usize, j: usize, k: usize) -> f64 {
    const PERMS: [([usize; 3], f64); 6] =
        [([0, 1, 2], 1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([0, 2, 1], -1.0), ([2, 1, 0], -1.0), ([1, 0, 2], -1.0)];
    let lat = basis.lattice();
    let (a, b, c) = (basis.mode(i), basis.mode(j), basis.mode(k));
    let mut s = 0.0;
    for v in 0..lat.num_vertices() {
        for (p, sign) in PERMS {
            let m: Mat2 = a.get(v, p[0]) * b.get(v, p[1]) * c.get(v, p[2]);
            s += sign * m.trace().re;
        }
    }
    s * lat.cell_volume()
}

/// Coefficients Qᵢⱼ = ½[∫Tr(ξᵢ∧dξⱼ) + (i↔j)], Cᵢⱼₖ = ⅔·sym ∫Tr(ξᵢ∧ξⱼ∧ξₖ).
pub fn chern_simons_coefficients(basis: &ModeBasis) -> Result<CubicPolynomial> {
    let lat = basis.lattice();
    let n = basis.len();
    let dxi: Vec<LieCochain> = basis.modes().iter().map(|m| m.coboundary(lat)).collect::<Result<_>>()?;
    let mut p = CubicPolynomial::zeros(n);
    let raw: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| basis.mode(i).wedge(&dxi[j], lat).and_then(|w| w.trace_integrate(lat)).map(|z| z.re))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    for i in 0..n {
        for j in 0..n {
            p.quadratic[(i, j)] = 0.5 * (raw[i][j] + raw[j][i]);
        }
    }
    // T is invariant under cyclic shifts, so only two orderings per triple are independent.
    let sym: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n * n];
            for j in i..n {
                for k in j..n {
                    row[j * n + k] = (triple(basis, i, j, k) + triple(basis, i, k, j)) / 2.0;
                }
            }
            row
        })
        .collect();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let c = 2.0 / 3.0 * sym[i][j * n + k];
                for (a, b, d) in crate::polynomial::permutations3(i, j, k) {
                    p.cubic[(a * n + b) * n + d] = c;
                }
            }
        }
    }
    Ok(p)
}

/// F(A) = dA + A∧A.
pub fn field_strength(basis: &ModeBasis, x: &[f64]) -> Result<LieCochain> {
    let lat = basis.lattice();
    let a = connection(basis, x)?;
    a.coboundary(lat)?.add(&a.wedge(&a, lat)?)
}

/// vᵢ = ∫Tr(ξᵢ∧F(A)).
pub fn pair_modes_with_f(basis: &ModeBasis, x: &[f64]) -> Result<Vec<f64>> {
    let lat = basis.lattice();
    let f = field_strength(basis, x)?;
    basis
        .modes()
        .par_iter()
        .map(|m| m.wedge(&f, lat)?.trace_integrate(lat).map(|z| z.re))
        .collect()
}

/// gᵢ = ⟨ξᵢ, ∇^A λ⟩ with ∇^A λ = dλ + [A, λ].
pub fn gauge_direction(basis: &ModeBasis, x: &[f64], lambda: &LieCochain) -> Result<Vec<f64>> {
    if lambda.degree() != 0 {
        return Err(Error::domain("gauge parameter must be a 0-cochain"));
    }
    let lat = basis.lattice();
    let a = connection(basis, x)?;
    let mut cov = lambda.coboundary(lat)?;
    for v in 0..lat.num_vertices() {
        let l = *lambda.get(v, 0);
        for mu in 0..3 {
            let am = *a.get(v, mu);
            *cov.get_mut(v, mu) += am * l - l * am;
        }
    }
    basis
        .modes()
        .iter()
        .map(|m| m.inner_product(&cov, lat, basis.inner_product_kind()).map(|z| z.re))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{build_lattice, build_mode_basis, InnerProduct, LieBasis, ModeBasis, SeedFamily};
    use super::*;
    use crate::numerics::finite_difference_gradient;
    use rand::{Rng, SeedableRng};

    fn random_x(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn rich_basis() -> ModeBasis {
        let lat = build_lattice(3, 0.9).unwrap();
        build_mode_basis(&lat, 24, InnerProduct::L2).unwrap()
    }

    #[test]
    fn constant_modes_have_no_quadratic_term() {
        let lat = build_lattice(2, 1.0).unwrap();
        let b = build_mode_basis(&lat, 9, InnerProduct::L2).unwrap();
        let p = chern_simons_coefficients(&b).unwrap();
        assert_eq!(p.quadratic.abs().max(), 0.0);
        assert!(p.c(0, 4, 8).abs() > 1e-3);
        assert_eq!(p.eval(&[0.0; 9]).unwrap(), 0.0);
    }

    #[test]
    fn polynomial_matches_direct_evaluation() {
        let lat = build_lattice(2, 1.0).unwrap();
        let small = build_mode_basis(&lat, 3, InnerProduct::L2).unwrap();
        let x = random_x(3, 1);
        let p = chern_simons_coefficients(&small).unwrap();
        assert!((p.eval(&x).unwrap() - cs_direct(&small, &x).unwrap()).abs() < 1e-12);
        let b = rich_basis();
        let p = chern_simons_coefficients(&b).unwrap();
        assert!(p.symmetry_defect() < 1e-14);
        assert!(p.quadratic.abs().max() > 1e-3 && p.cubic.iter().any(|c| c.abs() > 1e-3));
        for seed in 0..3 {
            let x = random_x(b.len(), seed);
            let direct = cs_direct(&b, &x).unwrap();
            let poly = p.eval(&x).unwrap();
            assert!((poly - direct).abs() < 1e-10 * direct.abs().max(1.0), "{poly} {direct}");
        }
    }

    #[test]
    fn field_strength_linearizes() {
        let b = rich_basis();
        assert_eq!(field_strength(&b, &vec![0.0; b.len()]).unwrap().max_abs(), 0.0);
        let x = random_x(b.len(), 9);
        let lat = b.lattice();
        let da = connection(&b, &x).unwrap().coboundary(lat).unwrap();
        let err = |eps: f64| {
            let xe: Vec<f64> = x.iter().map(|v| v * eps).collect();
            field_strength(&b, &xe).unwrap().sub(&da.scale_real(eps)).unwrap().max_abs()
        };
        let ratio = err(1e-2) / err(1e-3);
        assert!((ratio - 100.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn abelian_pairings_see_no_quadratic_part() {
        let lat = build_lattice(3, 1.0).unwrap();
        let b = ModeBasis::build(&lat, 12, InnerProduct::L2, SeedFamily::SingleComponent { a: 2, mu: 1 }).unwrap();
        let x = random_x(12, 4);
        let a = connection(&b, &x).unwrap();
        let aa = a.wedge(&a, &lat).unwrap();
        for m in b.modes() {
            assert!(m.wedge(&aa, &lat).unwrap().trace_integrate(&lat).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_is_twice_the_pairing() {
        let b = rich_basis();
        let p = chern_simons_coefficients(&b).unwrap();
        let x = random_x(b.len(), 3);
        let g = p.gradient(&x).unwrap();
        let v = pair_modes_with_f(&b, &x).unwrap();
        let fd = finite_difference_gradient(|y| cs_direct(&b, y).unwrap(), &x, 1e-5);
        let scale = g.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        for i in 0..b.len() {
            assert!((g[i] - 2.0 * v[i]).abs() < 1e-10 * scale);
            assert!((2.0 * v[i] - fd[i]).abs() < 1e-6 * scale);
        }
        let zero = pair_modes_with_f(&b, &vec![0.0; b.len()]).unwrap();
        assert!(zero.iter().all(|z| *z == 0.0));
    }

    #[test]
    fn bianchi_on_constant_block() {
        let lat = build_lattice(3, 1.0).unwrap();
        let b = build_mode_basis(&lat, 9, InnerProduct::L2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let lie = LieBasis::default();
        let lambda = LieCochain::from_fn(&lat, 0, |_, _| lie.combine([rng.gen(), rng.gen(), rng.gen()])).unwrap();
        let x = random_x(9, 12);
        let v = pair_modes_with_f(&b, &x).unwrap();
        let g = gauge_direction(&b, &x, &lambda).unwrap();
        let s: f64 = v.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!(s.abs() < 1e-9, "{s}");
        assert!(g.iter().any(|z| z.abs() > 1e-3));
    }
}
