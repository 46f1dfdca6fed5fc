use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::{ExperimentConfig, FrameKind, PolynomialSource};
use super::report::{Check, Constant, KernelRow, Relation, SpectrumRow, SuiteOutcome};
use super::Suite;
use crate::boson::{polynomial_multiplication_op, BosonBasis};
use crate::dirac::{
    check_real_structure, field_commutator_check, free_spectrum, kernel_and_degeneracy, kernel_concentration,
    kernel_value, rotate, small_k_ratio, spectral_term_operator, square_and_decompose, square_difference, ym_check,
    DiracSetup, FieldPoint, XiFrame,
};
use crate::fock::{car_residuals, conjugation_sign_defects, fock_charge_conjugation, grading, AntilinearOperator, FockBasis};
use crate::lattice::{
    build_mode_basis, chern_simons_coefficients, covariant_derivative_matrix, cs_direct, gauge_direction,
    pair_modes_with_f, spectral_invariant, InnerProduct, LieBasis, LieCochain, ModeBasis, SeedFamily,
};
use crate::numerics::{dense_eigh, finite_difference_gradient, CsrMatrix, LanczosOptions};
use crate::polynomial::CubicPolynomial;
use crate::spinor::{embed_basis, extend_basis, mode_conjugation, ReferenceFrame};
use crate::{Result, C64};

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    name: &'static str,
    rng: ChaCha8Rng,
    seed: u64,
    out: SuiteOutcome,
}

impl Ctx<'_> {
    fn check(&mut self, identity: impl Into<String>, residual: f64, tol: f64, rel: Relation) {
        self.out.checks.push(Check::new(self.name, identity, residual, tol, rel));
    }

    fn constant(&mut self, name: impl Into<String>, value: serde_json::Value) {
        self.out.constants.push(Constant { suite: self.name, name: name.into(), value });
    }

    fn spectrum(&mut self, label: &'static str, values: &[f64], residuals: &[f64]) {
        for (i, (&e, &r)) in values.iter().zip(residuals).enumerate() {
            self.out.spectra.push(SpectrumRow { suite: self.name, label, index: i, eigenvalue: e, residual: r });
        }
    }

    fn random_point(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.rng.gen_range(-1.0..1.0)).collect()
    }

    fn lanczos(&self) -> LanczosOptions {
        LanczosOptions { tol: 1e-10, seed: self.seed, ..Default::default() }
    }

    fn basis(&self, count: usize) -> Result<ModeBasis> {
        build_mode_basis(&self.cfg.lattice()?, count, self.cfg.modes.inner_product())
    }

    fn setup(&self, boson: BosonBasis) -> Result<(ModeBasis, DiracSetup)> {
        let basis = self.basis(self.cfg.modes.count)?;
        let frame = ReferenceFrame::standard(basis.lattice());
        let setup = DiracSetup::from_geometry(&basis, &frame, self.cfg.fermion.modes, boson)?;
        Ok((basis, setup))
    }

    fn polynomial(&mut self, basis: &ModeBasis) -> Result<CubicPolynomial> {
        let n = basis.len();
        let scale = self.cfg.rotation.scale;
        Ok(match self.cfg.rotation.polynomial {
            PolynomialSource::Zero => CubicPolynomial::zeros(n),
            PolynomialSource::ChernSimons => chern_simons_coefficients(basis)?,
            PolynomialSource::Random => {
                let mut terms = Vec::new();
                for i in 0..n {
                    for j in i..n {
                        terms.push((scale * self.rng.gen_range(-1.0..1.0), vec![i, j]));
                        for l in j..n {
                            terms.push((scale * self.rng.gen_range(-1.0..1.0), vec![i, j, l]));
                        }
                    }
                }
                CubicPolynomial::from_terms(n, &terms)?
            }
        })
    }
}

pub(super) fn run_one(cfg: &ExperimentConfig, suite: Suite, seed: u64) -> Result<SuiteOutcome> {
    let suite_seed = seed.wrapping_add((suite as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut ctx =
        Ctx { cfg, name: suite.name(), rng: ChaCha8Rng::seed_from_u64(suite_seed), seed: suite_seed, out: SuiteOutcome::default() };
    match suite {
        Suite::CarRelations => car_relations(&mut ctx)?,
        Suite::RealStructure => real_structure(&mut ctx)?,
        Suite::CsGradient => cs_gradient(&mut ctx)?,
        Suite::RotateSquare => rotate_square(&mut ctx)?,
        Suite::YmSectors => ym_sectors(&mut ctx)?,
        Suite::FieldCommutators => field_commutators(&mut ctx)?,
        Suite::SpectralInvariant => spectral(&mut ctx)?,
        Suite::KernelDegeneracy => kernel(&mut ctx)?,
        Suite::All => unreachable!("expanded by the caller"),
    }
    Ok(ctx.out)
}

fn random_vec(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn car_relations(ctx: &mut Ctx) -> Result<()> {
    let m = ctx.cfg.suites.car_relations.fermion_modes;
    let basis = FockBasis::new(m)?;
    let (u, w) = (random_vec(&mut ctx.rng, m), random_vec(&mut ctx.rng, m));
    for (name, r) in car_residuals(&basis, &u, &w)? {
        ctx.check(name, r, 1e-12, Relation::Lt);
    }
    ctx.constant("fermion_modes", json!(m));
    ctx.constant("fock_dim", json!(basis.dim()));
    Ok(())
}

fn real_structure(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    // C² on the Fock space of the embedded modes, completed to the configured size
    let cm = cfg.suites.real_structure.conjugation_modes;
    let basis = ctx.basis(cfg.modes.count)?;
    let lat = basis.lattice();
    let psi = extend_basis(&embed_basis(&basis, &ReferenceFrame::standard(lat))?, cm, lat, basis.inner_product_kind())?;
    let conj = mode_conjugation(&psi, lat, basis.inner_product_kind(), 1e-10)?;
    let fock = FockBasis::new(cm)?;
    let c1 = AntilinearOperator::new(CsrMatrix::from_dense(&conj.matrix));
    let c = fock_charge_conjugation(&fock, &c1)?;
    ctx.check("C^2 = (-1)^deg on every Fock basis state", c.square().max_abs_diff(&grading(&fock).matrix), 1e-12, Relation::Lt);
    let probe = random_vec(&mut ctx.rng, cm);
    let (input, output) = conjugation_sign_defects(&fock, &c, &c1, &probe)?;
    ctx.check("C cbar(psi) C = cbar(C1 psi) (-1)^deg, degree of input", input, 1e-12, Relation::Lt);
    ctx.constant("conjugation_model", json!(conj.model));
    ctx.constant("conjugation_output_ordering_defect", json!(output));

    let boson = BosonBasis::new(cfg.modes.count, cfg.suites.real_structure.cutoff)?;
    let (_, setup) = ctx.setup(boson)?;
    let r = check_real_structure(&setup, 1e-10)?;
    let worst_other = r.orderings.iter().map(|o| o.max).fold(0.0, f64::max);
    ctx.check("JDJ = (-1)^deg gamma D, sector-wise, consistent ordering", r.max_residual, 1e-10, Relation::Lt);
    ctx.check("the other sign ordering fails", worst_other, 1e-10, Relation::Gt);
    ctx.check("negative control: gamma replaced by identity", r.negative_control, 0.1, Relation::Gt);
    ctx.check("J^2 = (-1)^deg", r.j_squared_defect, 1e-12, Relation::Lt);
    ctx.check("gamma J + J gamma = 0", r.gamma_j_anticommutator, 1e-12, Relation::Lt);
    ctx.constant("consistent_ordering", json!(r.consistent_ordering));
    for o in &r.orderings {
        ctx.constant(format!("sector_residuals_{}", o.ordering), json!(o.per_sector));
    }
    ctx.constant("dirac_conjugation_model", json!(r.conjugation_model));
    Ok(())
}

fn cs_gradient(ctx: &mut Ctx) -> Result<()> {
    let g = &ctx.cfg.suites.cs_gradient;
    let (count, points, step) = (g.modes, g.points, g.fd_step);
    let basis = ctx.basis(count)?;
    let poly = chern_simons_coefficients(&basis)?;
    let (mut coef, mut fd_err, mut direct) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..points {
        let x = ctx.random_point(count);
        let grad = poly.gradient(&x)?;
        let v = pair_modes_with_f(&basis, &x)?;
        let fd = finite_difference_gradient(|y| cs_direct(&basis, y).unwrap_or(f64::NAN), &x, step);
        let scale = grad.iter().fold(0.0f64, |m, z| m.max(z.abs())).max(1e-300);
        for i in 0..count {
            coef = coef.max((grad[i] - 2.0 * v[i]).abs() / scale);
            fd_err = fd_err.max((2.0 * v[i] - fd[i]).abs() / scale);
        }
        let cs = cs_direct(&basis, &x)?;
        direct = direct.max((poly.eval(&x)? - cs).abs() / cs.abs().max(1.0));
    }
    ctx.check("2 int Tr(xi_i ^ F) = dCS/dx_i (relative)", coef, 1e-10, Relation::Lt);
    ctx.check("central finite differences of CS (relative)", fd_err, 1e-6, Relation::Lt);
    ctx.check("CS polynomial = direct lattice evaluation (relative)", direct, 1e-10, Relation::Lt);

    // gauge directions are orthogonal to the gradient on the constant block
    let lat = ctx.cfg.lattice()?;
    let constant = build_mode_basis(&lat, 9, InnerProduct::L2)?;
    let lie = LieBasis::default();
    let mut bianchi = 0.0f64;
    let mut gauge_norm = 0.0f64;
    for _ in 0..points {
        let coords: Vec<[f64; 3]> =
            (0..lat.num_vertices()).map(|_| [ctx.rng.gen(), ctx.rng.gen(), ctx.rng.gen()]).collect();
        let lambda = LieCochain::from_fn(&lat, 0, |v, _| lie.combine(coords[v]))?;
        let x = ctx.random_point(9);
        let v = pair_modes_with_f(&constant, &x)?;
        let gd = gauge_direction(&constant, &x, &lambda)?;
        bianchi = bianchi.max(v.iter().zip(&gd).map(|(a, b)| a * b).sum::<f64>().abs());
        gauge_norm = gauge_norm.max(gd.iter().fold(0.0, |m, z| m.max(z.abs())));
    }
    ctx.check("Bianchi: sum_i v_i g_i = 0 for gauge directions g", bianchi, 1e-9, Relation::Lt);
    ctx.constant("gauge_direction_max", json!(gauge_norm));
    ctx.constant("cs_degree", json!(poly.degree()));
    Ok(())
}

fn rotate_square(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let rs = &cfg.suites.rotate_square;
    let k = cfg.rotation.k();
    let boson = BosonBasis::with_guard(cfg.modes.count, rs.cutoff, rs.guard)?;
    let (basis, setup) = ctx.setup(boson)?;
    let poly = ctx.polynomial(&basis)?;
    let zero = poly.monomials().is_empty();
    let r = rotate(&setup, k, &poly)?;
    ctx.check("U D U* = D - [D, U] U*", r.route_agreement, 1e-10, Relation::Lt);

    let low = setup.boson.low_indices(rs.margin);
    let mut conj = 0.0f64;
    for (i, b) in r.plus.iter().enumerate() {
        let p = polynomial_multiplication_op(&setup.boson, &poly.partial(i)?)?;
        let expect = CsrMatrix::lin_comb(C64::new(1.0, 0.0), &setup.derivatives[i], C64::new(0.0, -k), &p);
        let e = expect.submatrix(&low, &low);
        let got = b.select_rows(&low).select_columns(&low);
        conj = conj.max(crate::numerics::dense::max_abs(&(got - e)));
    }
    ctx.check("U d_i U* = d_i - ik (d_i CS)(x) on the low subspace", conj, 1e-8, Relation::Lt);

    let xi = (cfg.frame.kind == FrameKind::LinearX).then_some(XiFrame { epsilon: cfg.frame.epsilon, seed: ctx.seed });
    let rep = square_and_decompose(&setup, &r, &poly, rs.margin, xi)?;
    ctx.check("(D+_U)^2 term-dictionary fit", rep.plus.residual, 1e-8, Relation::Lt);
    ctx.check("(D-_U)^2 term-dictionary fit", rep.minus.residual, 1e-8, Relation::Lt);
    ctx.check("fermionic normalization = 1/2", (rep.fermionic_normalization - 0.5).abs(), 1e-8, Relation::Lt);
    if zero {
        ctx.check("(D^U)^2 = D^2 for CS = 0", square_difference(&setup, &r, rs.margin), 1e-12, Relation::Lt);
    } else {
        let sign = |t: usize| rep.plus.coefficients[t][1] * rep.minus.coefficients[t][1];
        ctx.check("cross terms carry opposite signs in the two blocks", sign(1), 0.0, Relation::Lt);
        ctx.check("spectral terms carry opposite signs in the two blocks", sign(3), 0.0, Relation::Lt);
        let ratio = small_k_ratio(&setup, &poly, 1e-2, 1e-3, rs.margin)?;
        ctx.check("(D^U)^2 - D^2 = O(k): ratio at k = 1e-2 vs 1e-3 near 10", (ratio - 10.0).abs(), 0.5, Relation::Lt);
        ctx.constant("small_k_ratio", json!(ratio));
    }
    let ym = ym_check(&setup, &poly, k, Some((&r, rs.margin)))?;
    ctx.check("(D+-_U)^2 = H+-/2 on the low subspace", ym.square_defect.unwrap_or(f64::NAN), 1e-8, Relation::Lt);
    ctx.constant("k", json!(k));
    ctx.constant("low_dim", json!(rep.low_dim));
    ctx.constant("terms", json!(rep.terms));
    ctx.constant("coefficients_plus", json!(rep.plus.coefficients));
    ctx.constant("coefficients_minus", json!(rep.minus.coefficients));
    ctx.constant("expected_plus", json!(rep.plus.expected));
    ctx.constant("coefficient_error", json!(rep.plus.coefficient_error.max(rep.minus.coefficient_error)));
    ctx.constant("fermionic_normalization", json!(rep.fermionic_normalization));
    if let Some(x) = rep.xi_residual {
        ctx.constant("xi_residual", json!(x));
    }
    Ok(())
}

fn ym_sectors(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let y = &cfg.suites.ym_sectors;
    let k = cfg.rotation.k();
    let boson = BosonBasis::new(cfg.modes.count, y.cutoff)?;
    let (basis, setup) = ctx.setup(boson)?;
    let poly = ctx.polynomial(&basis)?;
    let r = ym_check(&setup, &poly, k, None)?;
    ctx.check("H+ + H- = 2 (common part)", r.sum_defect, 1e-12, Relation::Lt);
    ctx.check("H+ Hermitian", r.hermitian_plus, 1e-12, Relation::Lt);
    ctx.check("H- Hermitian", r.hermitian_minus, 1e-12, Relation::Lt);
    let free = free_spectrum(&setup.boson, y.eigenpairs, &ctx.lanczos())?;
    ctx.check("free spectrum = truncated oscillator oracle", free.max_deviation(), 1e-9, Relation::Lt);
    ctx.check("free ground energy >= 0", -free.values[0], 1e-12, Relation::Lt);
    ctx.spectrum("free_hamiltonian", &free.values, &free.residuals);
    ctx.constant("oracle", json!(free.oracle));
    ctx.constant("overall_factor_4k2", json!(4.0 * k * k));
    Ok(())
}

fn field_commutators(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let f = &cfg.suites.field_commutators;
    let lat = cfg.lattice()?;
    let basis = ctx.basis(f.modes)?;
    let boson = BosonBasis::new(f.modes, f.cutoff)?;
    let m1 = FieldPoint { vertex: lat.vertex(f.point), mu: f.mu, a: f.a };
    let mut residual = 0.0f64;
    let mut min_diag = f64::INFINITY;
    for v in 0..lat.num_vertices() {
        for mu in 0..3 {
            for a in 0..3 {
                let m2 = FieldPoint { vertex: v, mu, a };
                residual = residual.max(field_commutator_check(&basis, &boson, m1, m2)?.residual);
                min_diag = min_diag.min(kernel_value(&basis, m2, m2)?);
            }
        }
    }
    ctx.check("[E_A(m1), A(m2)] = K(m1, m2) on the low subspace", residual, 1e-12, Relation::Lt);
    ctx.check("K(m, m) >= 0", -min_diag, 0.0, Relation::Le);

    let ratios = kernel_concentration(&lat, m1, &f.concentration_counts)?;
    let rise = ratios.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if ratios.len() > 1 {
        ctx.check("kernel off-point mass decreases with N", rise, 0.0, Relation::Lt);
    }
    ctx.constant("concentration_counts", json!(f.concentration_counts));
    ctx.constant("off_point_mass_ratio", json!(ratios));

    let largest = *f.concentration_counts.iter().max().expect("validated nonempty");
    let family = ModeBasis::build(&lat, largest, InnerProduct::L2, SeedFamily::SingleComponent { a: f.a, mu: f.mu })?;
    for v in 0..lat.num_vertices() {
        for comp in 0..9 {
            let m2 = FieldPoint { vertex: v, mu: comp / 3, a: comp % 3 };
            let value = kernel_value(&family, m1, m2)?;
            ctx.out.kernels.push(KernelRow { suite: ctx.name, m1: m1.vertex, m2: v, component: comp, value });
        }
    }
    Ok(())
}

fn spectral(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let s = &cfg.suites.spectral_invariant;
    let basis = ctx.basis(s.modes)?;
    let n = basis.len();
    let lap = chern_simons_coefficients(&basis)?.laplacian();
    let si = |x: &[f64]| spectral_invariant(&basis, x);
    let s0 = si(&vec![0.0; n])?;
    let (mut affine, mut eig_sum, mut herm, mut cs_rel) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut first: Option<(Vec<f64>, Vec<f64>)> = None;
    for _ in 0..s.points {
        let (x1, x2) = (ctx.random_point(n), ctx.random_point(n));
        let sum: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        affine = affine.max((si(&sum)? - si(&x1)? - si(&x2)? + s0).abs());
        let m = covariant_derivative_matrix(&basis, &x1)?;
        herm = herm.max(crate::numerics::dense::max_abs(&(&m - m.adjoint())));
        let e = dense_eigh(&m)?;
        let value = si(&x1)?;
        eig_sum = eig_sum.max((e.values.iter().sum::<f64>() - value).abs());
        cs_rel = cs_rel.max((value + 0.5 * lap.eval(&x1)?).abs());
        if first.is_none() {
            let res = (0..e.values.len())
                .map(|c| {
                    let v = e.vectors.column(c);
                    (&m * v - v * C64::new(e.values[c], 0.0)).norm()
                })
                .collect();
            first = Some((e.values.clone(), res));
        }
    }
    ctx.check("Tr_xi(i nabla^A) affine in x", affine, 1e-12, Relation::Lt);
    ctx.check("covariant curl matrix Hermitian", herm, 1e-10, Relation::Lt);
    ctx.check("Tr_xi(i nabla^A) = sum of eigenvalues", eig_sum, 1e-9, Relation::Lt);
    ctx.check("Tr_xi(i nabla^A) = -Laplacian(CS)/2", cs_rel, 1e-10, Relation::Lt);

    let constant = build_mode_basis(&cfg.lattice()?, 9, InnerProduct::L2)?;
    let zero_op = spectral_term_operator(&constant, &BosonBasis::new(9, 1)?)?;
    ctx.check("spectral term vanishes for constant modes at A = 0", zero_op.operator.max_abs(), 1e-12, Relation::Lt);
    let small = ctx.basis(cfg.modes.count)?;
    let term = spectral_term_operator(&small, &BosonBasis::new(cfg.modes.count, cfg.boson.cutoff)?)?;
    ctx.check("spectral term operator Hermitian", term.operator.hermitian_defect(), 1e-12, Relation::Lt);
    ctx.constant("spectral_term_constant", json!(term.constant));
    ctx.constant("spectral_term_linear", json!(term.linear));
    if let Some((vals, res)) = first {
        ctx.spectrum("covariant_curl", &vals, &res);
    }
    Ok(())
}

fn kernel(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let boson = BosonBasis::new(cfg.modes.count, cfg.boson.cutoff)?;
    let (_, setup) = ctx.setup(boson)?;
    let r = kernel_and_degeneracy(&setup, cfg.suites.kernel_degeneracy.tol, &ctx.lanczos())?;
    let need = 1usize << setup.m();
    ctx.check("Lanczos converged on the requested eigenpairs", if r.converged { 0.0 } else { 1.0 }, 0.0, Relation::Le);
    if r.boson_kernel_dim > 0 {
        ctx.check(
            format!("at least 2^M = {need} eigenvalues of D*D below tol"),
            need as f64 - r.kernel_count as f64,
            0.0,
            Relation::Le,
        );
        ctx.check("D (w x Phi) = 0 for w in the derivative kernel, any Fock Phi", r.mechanism_defect, 1e-10, Relation::Lt);
        ctx.check("D Psi = 0 for Psi = (eta, eta) x |0>", r.vacuum_defect, 1e-10, Relation::Lt);
    }
    ctx.constant("kernel_count", json!(r.kernel_count));
    ctx.constant("boson_kernel_dim", json!(r.boson_kernel_dim));
    ctx.constant("predicted_lower_bound", json!(r.predicted_lower_bound));
    ctx.spectrum("dirac_square", &r.eigenvalues, &r.residuals);
    Ok(())
}
