//! Acceptance criteria 1-10. Runs without the libtest harness so the
//! PASS/FAIL lines always reach the console; exits nonzero on any FAIL.

use std::process::ExitCode;
use std::time::Instant;

use confspace_dirac::boson::{cs_unitary, derivative_op, k_from_integer, polynomial_multiplication_op, BosonBasis, UnitaryRoute};
use confspace_dirac::dirac::{
    check_real_structure, field_commutator_check, free_spectrum, kernel_and_degeneracy, kernel_concentration, rotate,
    spectral_term_operator, square_and_decompose, ym_check, DiracSetup, FieldPoint,
};
use confspace_dirac::experiment::{run_and_emit, Suite};
use confspace_dirac::fock::{car_residuals, fock_charge_conjugation, grading, AntilinearOperator, FockBasis};
use confspace_dirac::lattice::{
    build_lattice, build_mode_basis, chern_simons_coefficients, covariant_derivative_matrix, cs_direct,
    gauge_direction, pair_modes_with_f, spectral_invariant, InnerProduct, LieBasis, LieCochain, ModeBasis,
};
use confspace_dirac::numerics::{dense, dense_eigh, finite_difference_gradient, CsrMatrix, LanczosOptions};
use confspace_dirac::polynomial::CubicPolynomial;
use confspace_dirac::spinor::{embed_basis, extend_basis, mode_conjugation, ReferenceFrame};
use confspace_dirac::{Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_c(r: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    (0..m).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

fn random_x(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

fn random_cubic(r: &mut ChaCha8Rng, n: usize, scale: f64) -> CubicPolynomial {
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i..n {
            terms.push((scale * r.gen_range(-1.0..1.0), vec![i, j]));
            for l in j..n {
                terms.push((scale * r.gen_range(-1.0..1.0), vec![i, j, l]));
            }
        }
    }
    CubicPolynomial::from_terms(n, &terms).unwrap()
}

fn flat_setup(n_modes: usize, m: usize, boson: BosonBasis) -> Result<DiracSetup> {
    let lat = build_lattice(3, 1.0)?;
    let basis = build_mode_basis(&lat, n_modes, InnerProduct::L2)?;
    DiracSetup::from_geometry(&basis, &ReferenceFrame::standard(&lat), m, boson)
}

fn car() -> Result<Outcome> {
    let b = FockBasis::new(6)?;
    let mut r = rng(1);
    let (u, w) = (random_c(&mut r, 6), random_c(&mut r, 6));
    let worst = car_residuals(&b, &u, &w)?.iter().map(|x| x.1).fold(0.0, f64::max);
    outcome(worst < 1e-12, format!("M=6, max residual {worst:.2e}"))
}

fn real_structure() -> Result<Outcome> {
    let lat = build_lattice(3, 1.0)?;
    let basis = build_mode_basis(&lat, 2, InnerProduct::L2)?;
    let psi = extend_basis(&embed_basis(&basis, &ReferenceFrame::standard(&lat))?, 6, &lat, InnerProduct::L2)?;
    let conj = mode_conjugation(&psi, &lat, InnerProduct::L2, 1e-10)?;
    let fock = FockBasis::new(6)?;
    let c = fock_charge_conjugation(&fock, &AntilinearOperator::new(CsrMatrix::from_dense(&conj.matrix)))?;
    let c2 = c.square().max_abs_diff(&grading(&fock).matrix);

    let setup = flat_setup(2, 2, BosonBasis::new(2, 3)?)?;
    let r = check_real_structure(&setup, 1e-10)?;
    let pass = c2 < 1e-12 && r.consistent_ordering.is_some() && r.max_residual < 1e-10;
    outcome(
        pass,
        format!("C^2 defect {c2:.2e} at M=6; JDJ residual {:.2e}, ordering {:?}", r.max_residual, r.consistent_ordering),
    )
}

fn cs_gradient() -> Result<Outcome> {
    let lat = build_lattice(3, 0.9)?;
    let basis = build_mode_basis(&lat, 24, InnerProduct::L2)?;
    let poly = chern_simons_coefficients(&basis)?;
    let mut r = rng(3);
    let (mut coef, mut fd_rel) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let x = random_x(&mut r, 24);
        let g = poly.gradient(&x)?;
        let v = pair_modes_with_f(&basis, &x)?;
        let fd = finite_difference_gradient(|y| cs_direct(&basis, y).unwrap(), &x, 1e-5);
        let scale = g.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        for i in 0..24 {
            coef = coef.max((g[i] - 2.0 * v[i]).abs() / scale);
            fd_rel = fd_rel.max((2.0 * v[i] - fd[i]).abs() / scale);
        }
    }
    let lat1 = build_lattice(3, 1.0)?;
    let constant = build_mode_basis(&lat1, 9, InnerProduct::L2)?;
    let lie = LieBasis::default();
    let lambda = LieCochain::from_fn(&lat1, 0, |_, _| lie.combine([r.gen(), r.gen(), r.gen()]))?;
    let x = random_x(&mut r, 9);
    let v = pair_modes_with_f(&constant, &x)?;
    let gd = gauge_direction(&constant, &x, &lambda)?;
    let bianchi: f64 = v.iter().zip(&gd).map(|(a, b)| a * b).sum::<f64>().abs();
    outcome(
        coef < 1e-10 && fd_rel < 1e-6 && bianchi < 1e-9,
        format!("coefficient {coef:.2e}, finite difference {fd_rel:.2e}, Bianchi {bianchi:.2e}"),
    )
}

fn conjugated_derivative() -> Result<Outcome> {
    let b = BosonBasis::with_guard(2, 8, 16)?;
    let p = random_cubic(&mut rng(4), 2, 0.3);
    let k = k_from_integer(1);
    let u = cs_unitary(&b, k, &p, UnitaryRoute::Krylov)?;
    let low = b.low_indices(3);
    let mut err = 0.0f64;
    for i in 0..2 {
        let d = derivative_op(&b, i)?;
        let dp = polynomial_multiplication_op(&b, &p.partial(i)?)?;
        let expect = CsrMatrix::lin_comb(C64::new(1.0, 0.0), &d, C64::new(0.0, -k), &dp);
        for (col, &c) in u.conjugate_columns(&d, &low, false)?.iter().zip(&low) {
            for &row in &low {
                err = err.max((col[row] - expect.get(row, c)).norm());
            }
        }
    }
    outcome(err < 1e-8, format!("cutoff 8, N=2, Krylov route, residual {err:.2e}"))
}

fn square_decomposition() -> Result<Outcome> {
    let setup = flat_setup(2, 2, BosonBasis::with_guard(2, 8, 16)?)?;
    let poly = random_cubic(&mut rng(5), 2, 0.3);
    let rot = rotate(&setup, k_from_integer(1), &poly)?;
    let rep = square_and_decompose(&setup, &rot, &poly, 3, None)?;
    let resid = rep.plus.residual.max(rep.minus.residual);
    let pass = resid < 1e-8
        && rep.opposite_cross_terms
        && rep.opposite_spectral_terms
        && (rep.fermionic_normalization - 0.5).abs() < 1e-8;
    outcome(
        pass,
        format!(
            "fit residual {resid:.2e}, opposite cross/spectral {}/{}, normalization {:.12}",
            rep.opposite_cross_terms, rep.opposite_spectral_terms, rep.fermionic_normalization
        ),
    )
}

fn ym_sectors() -> Result<Outcome> {
    let setup = flat_setup(2, 2, BosonBasis::new(2, 6)?)?;
    let poly = random_cubic(&mut rng(6), 2, 0.3);
    let r = ym_check(&setup, &poly, k_from_integer(1), None)?;
    let free = free_spectrum(&setup.boson, 6, &LanczosOptions { tol: 1e-10, ..Default::default() })?;
    let dev = free.max_deviation();
    let herm = r.hermitian_plus.max(r.hermitian_minus);
    outcome(
        r.sum_defect < 1e-12 && herm < 1e-12 && dev < 1e-9,
        format!("sum {:.2e}, Hermitian {herm:.2e}, free spectrum {dev:.2e}", r.sum_defect),
    )
}

fn field_commutators() -> Result<Outcome> {
    let lat = build_lattice(3, 1.0)?;
    let basis = build_mode_basis(&lat, 3, InnerProduct::L2)?;
    let boson = BosonBasis::new(3, 3)?;
    let m1 = FieldPoint { vertex: lat.vertex([1, 1, 1]), mu: 0, a: 0 };
    let mut worst = 0.0f64;
    for v in 0..lat.num_vertices() {
        for c in 0..9 {
            let m2 = FieldPoint { vertex: v, mu: c / 3, a: c % 3 };
            worst = worst.max(field_commutator_check(&basis, &boson, m1, m2)?.residual);
        }
    }
    let ratios = kernel_concentration(&lat, m1, &[3, 4, 5, 6])?;
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    outcome(worst < 1e-12 && monotone, format!("commutator {worst:.2e}, off-point mass {ratios:.3?}"))
}

fn spectral() -> Result<Outcome> {
    let lat = build_lattice(3, 0.8)?;
    let basis = build_mode_basis(&lat, 20, InnerProduct::L2)?;
    let n = basis.len();
    let mut r = rng(8);
    let (x1, x2) = (random_x(&mut r, n), random_x(&mut r, n));
    let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
    let s = |x: &[f64]| spectral_invariant(&basis, x).unwrap();
    let affine = (s(&sum) - s(&x1) - s(&x2) + s(&vec![0.0; n])).abs();
    let m = covariant_derivative_matrix(&basis, &x1)?;
    let eig_sum = (dense_eigh(&m)?.values.iter().sum::<f64>() - s(&x1)).abs();

    let small: ModeBasis = build_mode_basis(&lat, 3, InnerProduct::L2)?;
    let op = spectral_term_operator(&small, &BosonBasis::new(3, 3)?)?.operator;
    let herm = op.hermitian_defect().max(dense::max_abs(&(&m - m.adjoint())));
    let lat1 = build_lattice(3, 1.0)?;
    let constant = build_mode_basis(&lat1, 9, InnerProduct::L2)?;
    let zero = spectral_invariant(&constant, &[0.0; 9])?.abs();
    outcome(
        affine < 1e-12 && herm < 1e-12 && zero < 1e-12 && eig_sum < 1e-9,
        format!("affine {affine:.2e}, Hermitian {herm:.2e}, constant modes {zero:.2e}, eigenvalue sum {eig_sum:.2e}"),
    )
}

fn degeneracy() -> Result<Outcome> {
    let setup = flat_setup(2, 2, BosonBasis::new(2, 4)?)?;
    let r = kernel_and_degeneracy(&setup, 1e-10, &LanczosOptions { tol: 1e-11, ..Default::default() })?;
    let need = 1 << setup.m();
    outcome(
        r.kernel_count >= need,
        format!("{} eigenvalues of D*D below 1e-10 (need {need}), smallest {:.2e}", r.kernel_count, r.eigenvalues[0]),
    )
}

fn determinism() -> Result<Outcome> {
    let text = include_str!("../../../configs/default.toml");
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let ra = run_and_emit(text, Suite::All, None, Some(a.path()))?;
    let rb = run_and_emit(text, Suite::All, None, Some(b.path()))?;
    let mut same = ra.files == rb.files;
    for f in &ra.files {
        same &= std::fs::read(a.path().join(f))? == std::fs::read(b.path().join(f))?;
    }
    outcome(same, format!("{} files compared, suite checks passing: {}", ra.files.len(), ra.passed()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("CAR relations", car),
        ("real structure", real_structure),
        ("Chern-Simons gradient", cs_gradient),
        ("conjugated derivative", conjugated_derivative),
        ("rotation-square decomposition", square_decomposition),
        ("Yang-Mills sectors", ym_sectors),
        ("canonical commutators", field_commutators),
        ("spectral invariant", spectral),
        ("ground-state degeneracy", degeneracy),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} ({:.1}s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
