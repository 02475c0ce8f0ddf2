//! Randomized invariants over trees, F₃ classes, theta series and the identity.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thomae::cx::lift;
use thomae::f3::{self, F3Class};
use thomae::linalg::Mat;
use thomae::periods::PeriodSettings;
use thomae::theta::{sixth_power_periodicity_check, theta_series, Characteristic, ThetaSettings};
use thomae::thomae::{equidistributed_labelings, example7_problem, verify_thomae, Tolerances};
use thomae::tree::gen;
use thomae::{BranchConfig, Dd, Real};

fn circle(m: usize, indices: Vec<u8>) -> BranchConfig {
    let pts = (0..m).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64)).collect();
    BranchConfig::new(pts, indices).unwrap()
}

fn ratio(c: &BranchConfig, l: &F3Class) -> (bool, Complex64) {
    let (_, t, _) = example7_problem();
    let (r, _) = verify_thomae::<f64>(
        c,
        &t,
        l,
        &PeriodSettings::for_precision::<f64>(),
        &ThetaSettings::for_precision::<f64>(),
        &Tolerances::for_precision::<f64>(),
    )
    .unwrap();
    (r.pass, Complex64::new(r.ratio[0], r.ratio[1]))
}

/// Genus-2 τ with Im τ diagonally dominant, hence positive definite.
fn tau2() -> impl Strategy<Value = [f64; 6]> {
    (-0.5..0.5f64, 0.8..1.6f64, -0.5..0.5f64, -0.3..0.3f64, -0.5..0.5f64, 0.8..1.6f64)
        .prop_map(|(a, b, c, d, e, f)| [a, b, c, d, e, f])
}

fn tau_mat(v: [f64; 6]) -> Mat<f64> {
    let (t11, t12, t22) = (Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]), Complex64::new(v[4], v[5]));
    Mat::from_rows(vec![vec![lift(t11), lift(t12)], vec![lift(t12), lift(t22)]])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn double_double_decimal_roundtrip(hi in -1e6..1e6f64, lo in -1.0..1.0f64, e in -40i32..40) {
        prop_assume!(hi != 0.0);
        let x = Dd::from_f64(hi) * Dd::from_f64(10f64.powi(e)) + Dd::from_f64(hi * 1e-17 * lo);
        let back: Dd = x.to_string().parse().unwrap();
        prop_assert!(((back - x) / x).abs().to_f64() < 1e-31, "{} → {:?} vs {:?}", x, back, x);
    }

    #[test]
    fn diag_shift_and_tripling_are_trivial(k in prop::collection::vec(-5i64..5, 2..9), s in -4i64..4) {
        let x = F3Class::raw(k.clone());
        let shifted = F3Class::raw(k.iter().map(|v| v + s));
        prop_assert!(x.eq_mod_diag(&shifted));
        prop_assert!(x.scale(3).eq_mod_diag(&F3Class::zero(k.len())));
        prop_assert!(x.add(&x.scale(-1)).eq_mod_diag(&F3Class::zero(k.len())));
    }

    #[test]
    fn solve_returns_a_preimage(cols in prop::collection::vec(prop::collection::vec(0u8..3, 5), 1..5), x in prop::collection::vec(0u8..3, 4)) {
        let rhs: Vec<u8> = (0..5)
            .map(|r| f3::md3(cols.iter().zip(&x).map(|(c, &xi)| c[r] as i64 * xi as i64).sum()))
            .collect();
        let y = f3::solve(&cols, &rhs).expect("rhs lies in the span by construction");
        for r in 0..5 {
            let got = f3::md3(cols.iter().zip(&y).map(|(c, &yi)| c[r] as i64 * yi as i64).sum());
            prop_assert_eq!(got, rhs[r]);
        }
        prop_assert!(f3::rank(&cols) <= cols.len().min(5));
    }

    #[test]
    fn random_trees_validate_and_expand(m in 3usize..9, seed in any::<u64>(), coeffs in prop::collection::vec(0u8..3, 7)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = gen::random_tree(m, &mut rng);
        let config = circle(m, tree.indices());
        prop_assert_eq!(tree.validate(&config).genus, Some(config.genus()));
        let order = tree.inner_order();
        let c = &coeffs[..order.len()];
        let lambda = order
            .iter()
            .zip(c)
            .fold(F3Class::zero(m), |acc, (&v, &k)| acc.add(&tree.class_abar(v).scale(k as i64)));
        prop_assert_eq!(tree.abar_basis_expand(&lambda).unwrap(), c.to_vec());
        for e in tree.inner_edges() {
            let (p, q) = tree.decompose(e).unwrap();
            prop_assert_eq!(p.tree.genus() + q.tree.genus(), tree.genus());
        }
    }

    #[test]
    fn integer_shifts_of_characteristics(v in tau2(), a in prop::collection::vec(0i64..6, 2), b in prop::collection::vec(0i64..6, 2),
                                         n in prop::collection::vec(-2i64..3, 2)) {
        let tau = tau_mat(v);
        let s = ThetaSettings::for_precision::<f64>();
        let chi = Characteristic::from_sixths(&a, &b).unwrap();
        let (al, be): (Vec<f64>, Vec<f64>) = (chi.alpha_real(), chi.beta_real());
        let base = theta_series(&tau, &al, &be, &s).unwrap().value;
        let scale = base.norm().max(1e-3);
        // α ↦ α + n leaves ϑ unchanged.
        let a2: Vec<f64> = al.iter().zip(&n).map(|(x, &k)| x + k as f64).collect();
        let v1 = theta_series(&tau, &a2, &be, &s).unwrap().value;
        prop_assert!((v1 - base).norm() / scale < 1e-11);
        // β ↦ β + n multiplies it by e^{2πi α·n}.
        let b2: Vec<f64> = be.iter().zip(&n).map(|(x, &k)| x + k as f64).collect();
        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * al.iter().zip(&n).map(|(x, &k)| x * k as f64).sum::<f64>());
        let v2 = theta_series(&tau, &al, &b2, &s).unwrap().value;
        prop_assert!((v2 - phase * base).norm() / scale < 1e-11);
        let shifts = vec![(n.clone(), vec![0, 0]), (vec![0, 0], n.clone()), (n.clone(), n.clone())];
        prop_assert!(sixth_power_periodicity_check(&tau, &chi, &shifts, &s).unwrap().pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn ratio_is_translation_invariant(bx in -3.0..3.0f64, by in -3.0..3.0f64) {
        let (c, _, l) = example7_problem();
        let (_, r0) = ratio(&c, &l);
        let moved = c.map_points(|_, z| z + Complex64::new(bx, by)).unwrap();
        let (pass, r1) = ratio(&moved, &l);
        prop_assert!(pass);
        prop_assert!((r1 - r0).norm() / r0.norm() < 1e-9, "{} vs {}", r1, r0);
    }

    #[test]
    fn identity_survives_similarities(s in 0.3..3.0f64, phi in 0.0..std::f64::consts::TAU, bx in -2.0..2.0f64) {
        let (c, _, _) = example7_problem();
        let a = Complex64::from_polar(s, phi);
        let moved = c.map_points(|_, z| a * z + bx).unwrap();
        for l in equidistributed_labelings(&moved) {
            let (pass, _) = ratio(&moved, &l);
            prop_assert!(pass, "Λ = {:?}", l.signed());
        }
    }
}
