use confspace_dirac::boson::{derivative_op, position_op, BosonBasis};
use confspace_dirac::dirac::{check_real_structure, DiracSetup};
use confspace_dirac::experiment::ExperimentConfig;
use confspace_dirac::fock::{car_residuals, fock_charge_conjugation, grading, AntilinearOperator, FockBasis};
use confspace_dirac::lattice::{build_lattice, build_mode_basis, spectral_invariant, InnerProduct};
use confspace_dirac::numerics::{finite_difference_gradient, CsrMatrix};
use confspace_dirac::polynomial::CubicPolynomial;
use confspace_dirac::spinor::{embed_basis, extend_basis, mode_conjugation, ReferenceFrame};
use confspace_dirac::C64;
use proptest::prelude::*;

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn car_holds_for_random_vectors(m in 1usize..6, re in coords(12), im in coords(12)) {
        let b = FockBasis::new(m).unwrap();
        let u: Vec<C64> = (0..m).map(|i| C64::new(re[i], im[i])).collect();
        let w: Vec<C64> = (0..m).map(|i| C64::new(re[6 + i], im[6 + i])).collect();
        for (name, r) in car_residuals(&b, &u, &w).unwrap() {
            prop_assert!(r < 1e-12, "{name}: {r}");
        }
    }

    #[test]
    fn cubic_gradient_matches_finite_differences(c in coords(10), x in coords(3)) {
        let terms = vec![
            (c[0], vec![0]), (c[1], vec![0, 1]), (c[2], vec![1, 2]), (c[3], vec![2, 2]),
            (c[4], vec![0, 0, 0]), (c[5], vec![0, 1, 2]), (c[6], vec![1, 1, 2]),
            (c[7], vec![2, 2, 2]), (c[8], vec![0, 2, 2]), (c[9], vec![1]),
        ];
        let p = CubicPolynomial::from_terms(3, &terms).unwrap();
        let g = p.gradient(&x).unwrap();
        let fd = finite_difference_gradient(|y| p.eval(y).unwrap(), &x, 1e-5);
        for i in 0..3 {
            prop_assert!((g[i] - fd[i]).abs() < 1e-7 * (1.0 + g[i].abs()));
        }
    }

    #[test]
    fn spectral_invariant_is_affine(x in coords(8), y in coords(8), t in -2.0f64..2.0) {
        let lat = build_lattice(3, 0.9).unwrap();
        let basis = build_mode_basis(&lat, 8, InnerProduct::L2).unwrap();
        let s = |v: &[f64]| spectral_invariant(&basis, v).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        prop_assert!((s(&mix) - t * s(&x) - (1.0 - t) * s(&y)).abs() < 1e-11);
    }

    #[test]
    fn boson_commutator_is_identity_on_low_states(n in 1usize..3, cutoff in 2usize..7) {
        let b = BosonBasis::with_guard(n, cutoff, 8).unwrap();
        let low = b.low_indices(1);
        for i in 0..n {
            let c = derivative_op(&b, i).unwrap().commutator(&position_op(&b, i).unwrap());
            let c = c.sub(&CsrMatrix::identity(b.dim()));
            for &r in &low {
                for &s in &low {
                    prop_assert!(c.get(r, s).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn real_structure_for_random_cutoff(cutoff in 1usize..5) {
        let lat = build_lattice(3, 1.0).unwrap();
        let basis = build_mode_basis(&lat, 2, InnerProduct::L2).unwrap();
        let setup = DiracSetup::from_geometry(&basis, &ReferenceFrame::standard(&lat), 2, BosonBasis::new(2, cutoff).unwrap()).unwrap();
        let r = check_real_structure(&setup, 1e-10).unwrap();
        prop_assert!(r.consistent_ordering.is_some());
        prop_assert!(r.max_residual < 1e-10);
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z]{3,10}") {
        prop_assume!(!["seed", "suite", "lattice", "modes", "fermion", "boson", "rotation", "frame", "output", "limits", "suites"].contains(&key.as_str()));
        let text = format!("schema_version = 1\n{key} = 1\n");
        prop_assert!(ExperimentConfig::parse(&text).is_err());
        let nested = format!("schema_version = 1\n[boson]\n{key} = 1\n");
        prop_assert!(key == "cutoff" || ExperimentConfig::parse(&nested).is_err());
    }
}

#[test]
fn charge_conjugation_squares_to_grading_for_even_modes() {
    let lat = build_lattice(3, 1.0).unwrap();
    let basis = build_mode_basis(&lat, 2, InnerProduct::L2).unwrap();
    let embedded = embed_basis(&basis, &ReferenceFrame::standard(&lat)).unwrap();
    for m in [2, 4, 6] {
        let psi = extend_basis(&embedded, m, &lat, InnerProduct::L2).unwrap();
        let conj = mode_conjugation(&psi, &lat, InnerProduct::L2, 1e-10).unwrap();
        let fock = FockBasis::new(m).unwrap();
        let c = fock_charge_conjugation(&fock, &AntilinearOperator::new(CsrMatrix::from_dense(&conj.matrix))).unwrap();
        assert!(c.square().max_abs_diff(&grading(&fock).matrix) < 1e-12, "M={m}");
    }
}
