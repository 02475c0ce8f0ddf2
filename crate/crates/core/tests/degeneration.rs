//! Merge and scale families on the genus-2 worked example.

use num_complex::Complex64;

use thomae::degeneration::{
    check_period_limits, det_pb_limit_of, extrapolate, family_merge, family_scale, family_scale_about, merge_family,
    period_limits_of, DegenerationSettings,
};
use thomae::periods::PeriodSettings;
use thomae::theta::ThetaSettings;
use thomae::thomae::{example7_problem, verify_thomae, Tolerances};
use thomae::Error;

fn settings(t: &[f64]) -> DegenerationSettings {
    DegenerationSettings { t_seq: t.to_vec(), ..DegenerationSettings::for_precision::<f64>() }
}

#[test]
fn extrapolation_recovers_a_polynomial_in_the_cube_root() {
    let t = [1e-1, 1e-2, 1e-3, 1e-4];
    let f = |t: f64| Complex64::new(1.0, -2.0) + Complex64::new(0.5, 3.0) * t.cbrt() - 4.0 * t.cbrt().powi(2);
    let l = extrapolate(&t, &t.map(f)).unwrap();
    assert!((l.value() - Complex64::new(1.0, -2.0)).norm() < 1e-12);
    assert!(l.error_estimate < 1e-10);
    assert!(matches!(extrapolate(&[0.1], &[Complex64::new(1.0, 0.0)]), Err(Error::Invalid(_))));
}

#[test]
fn divergence_shows_in_the_slope_and_nan_is_rejected() {
    let t = [1e-2, 1e-3, 1e-4, 1e-5];
    let l = extrapolate(&t, &t.map(|t: f64| Complex64::new(1.0 / t, 0.0))).unwrap();
    assert!((l.slope + 1.0).abs() < 1e-9, "{}", l.slope);
    let mut v = t.map(|t: f64| Complex64::new(t, 0.0));
    v[2] = Complex64::new(f64::NAN, 0.0);
    assert!(matches!(extrapolate(&t, &v), Err(Error::Numerical { .. })));
}

#[test]
fn white_merge_limits_do_not_depend_on_the_t_sequence() {
    let (c, t, _) = example7_problem();
    let tilde = Complex64::new(2.5, 0.0);
    let mut limits = Vec::new();
    for seq in [[1e-2, 1e-3, 1e-4, 1e-5], [3e-3, 5e-4, 7e-5, 9e-6]] {
        let s = settings(&seq);
        let fam = merge_family::<f64>(&c, &t, 2, tilde, &s).unwrap();
        let p = period_limits_of(&c, &fam, &s).unwrap();
        let d = det_pb_limit_of(&c, &fam, &s).unwrap();
        assert!(p.white && p.pass, "{p:?}");
        assert!(p.divergent_rel_error.unwrap() < 1e-3);
        assert!(d.rel_error.unwrap() < 1e-3);
        limits.push(p.divergent.value());
    }
    let spread = (limits[0] - limits[1]).norm() / limits[0].norm();
    assert!(spread < 1e-4, "{spread:e}");
}

#[test]
fn black_merge_has_no_closed_form_target() {
    let (c, t, _) = example7_problem();
    let r = check_period_limits::<f64>(&c, &t, 0, Complex64::new(0.5, 0.0), &DegenerationSettings::for_precision::<f64>()).unwrap();
    assert!(!r.white);
    assert!(r.target.is_none() && r.divergent_pass.is_none());
    assert!(r.vanishing_pass && r.finite_pass && r.limit_curve_pass, "{r:?}");
}

#[test]
fn bad_parameters_are_invalid_input() {
    let (c, t, _) = example7_problem();
    let tilde = Complex64::new(2.5, 0.0);
    for seq in [vec![0.1], vec![0.0, 0.1], vec![1.5, 0.1], vec![0.1, 0.1]] {
        let e = merge_family::<f64>(&c, &t, 2, tilde, &settings(&seq)).unwrap_err();
        assert_eq!(e.exit_code(), 1, "{seq:?}: {e}");
    }
    assert!(family_merge(&c, 3, tilde, 0.5).is_err());
    assert!(family_merge(&c, 2, Complex64::new(0.0, 0.0), 0.5).is_err());
    assert!(family_merge(&c, 2, tilde, 0.0).is_err());
    assert!(family_scale(&c, &[0, 1], Complex64::new(0.0, 0.0)).is_err());
    assert!(family_scale(&c, &[7], Complex64::new(0.5, 0.0)).is_err());
}

#[test]
fn merge_family_moves_only_the_pair() {
    let (c, _, _) = example7_problem();
    let tilde = Complex64::new(2.5, 0.0);
    let m = family_merge(&c, 2, tilde, 0.1).unwrap();
    assert_eq!(&m.points()[..2], &c.points()[..2]);
    assert!((m.point(2) - Complex64::new(2.45, 0.0)).norm() < 1e-15);
    assert!((m.point(3) - Complex64::new(2.55, 0.0)).norm() < 1e-15);
}

#[test]
fn identity_holds_along_a_scale_family() {
    let (c, t, l) = example7_problem();
    let run = |cfg| {
        verify_thomae::<f64>(
            &cfg,
            &t,
            &l,
            &PeriodSettings::for_precision::<f64>(),
            &ThetaSettings::for_precision::<f64>(),
            &Tolerances::for_precision::<f64>(),
        )
        .unwrap()
        .0
    };
    for s in [0.9, 0.5, 0.2] {
        let shrunk = family_scale_about(&c, &[2, 3], Complex64::new(2.5, 0.0), Complex64::new(s, 0.0)).unwrap();
        assert!(run(shrunk).pass, "pair shrunk by {s}");
    }
    for z in [Complex64::new(2.0, 0.0), Complex64::from_polar(0.7, 1.3)] {
        let r = run(family_scale(&c, &[0, 1, 2, 3], z).unwrap());
        assert!(r.pass, "global scale {z}");
    }
}
