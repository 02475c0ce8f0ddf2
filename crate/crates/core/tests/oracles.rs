//! Values frozen from independent mpmath computations at 50 digits. Real
//! integrals use u = s^{1/(1−p)} at each endpoint so the integrand is smooth.

use num_complex::Complex64;

use thomae::cx::{abs, lift, C};
use thomae::linalg::Mat;
use thomae::periods::{period_matrices, symmetrize, PeriodSettings};
use thomae::quad::{tanh_sinh, QuadSettings};
use thomae::theta::{theta_constant, Characteristic, ThetaSettings};
use thomae::thomae::{example7_problem, kappa};
use thomae::{Dd, Real};

/// ∫₀¹ dx / (x²(1−x)²(2−x)(3−x))^{1/3}.
const R11: &str = "3.50030650663307774868901743554865652";
/// ∫₂³ dx / (x²(x−1)²(x−2)(3−x))^{1/3}.
const R21: &str = "0.895136256217791131341469186482128445";

/// τ of the tree basis on λ = (0,1,2,3), a = (2,2,1,1). The oracle builds the
/// double-segment periods from four real integrals; the tree basis differs from
/// those segment cycles by ρ² on its second row, which gives τ = −τ̄_segments − I.
const TAU11: (&str, &str) = ("-0.408292367104780272210215538556974559", "0.806152638880215962230372050131000552");
const TAU12: (&str, &str) = ("0.382062480851069671212345846456492957", "0.193503298463787113767445786123213513");

/// ϑ[5/6,5/6;1/6,1/6] at that τ.
const THETA7: (&str, &str) = ("1.08600759158445228790661680554136319", "-0.470642395726816504936597286232625327");

fn dd(s: &str) -> Dd {
    s.parse().expect("decimal literal")
}

fn cdd((re, im): (&str, &str)) -> C<Dd> {
    C::new(dd(re), dd(im))
}

fn parse<R: Real>(s: &str) -> R {
    R::from_str_radix(s, 10).ok().expect("decimal literal")
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn rel<R: Real>(a: C<R>, b: C<R>) -> f64 {
    (abs(a - b) / abs(b)).to_f64()
}

#[test]
fn real_integrals_of_the_worked_example() {
    fn run<R: Real>(tol: f64) {
        let s = QuadSettings::for_precision::<R>();
        let third = R::ratio(1, 3);
        let two = R::from_f64(2.0);
        let three = R::from_f64(3.0);
        let r11 = tanh_sinh::<R>(1, &s, |u, v, out| {
            out[0] = C::new((u * v).powf(-(third + third)) * ((two - u) * (three - u)).powf(-third), R::zero())
        })
        .unwrap();
        // x = 2 + u on (2, 3): x² (x−1)² (x−2)(3−x) with x−2 = u, 3−x = v.
        let r21 = tanh_sinh::<R>(1, &s, |u, v, out| {
            let x = two + u;
            out[0] = C::new((x * (x - R::one())).powf(-(third + third)) * (u * v).powf(-third), R::zero())
        })
        .unwrap();
        let e1 = rel(r11.values[0], C::new(parse::<R>(R11), R::zero()));
        let e2 = rel(r21.values[0], C::new(parse::<R>(R21), R::zero()));
        assert!(e1 < tol && e2 < tol, "{e1:e} {e2:e}");
    }
    run::<f64>(1e-14);
    run::<Dd>(1e-24);
}

#[test]
fn worked_example_tau_double() {
    let (c, t, _) = example7_problem();
    let p = period_matrices::<f64>(&c, &t, &PeriodSettings::for_precision::<f64>()).unwrap();
    let tau = symmetrize(&p.tau);
    let t11 = Complex64::new(f(TAU11.0), f(TAU11.1));
    let t12 = Complex64::new(f(TAU12.0), f(TAU12.1));
    for (got, want) in [(tau[(0, 0)], t11), (tau[(1, 1)], t11), (tau[(0, 1)], t12), (tau[(1, 0)], t12)] {
        assert!((got - want).norm() < 1e-13, "{got} vs {want}");
    }
}

#[test]
fn worked_example_tau_extended() {
    let (c, t, _) = example7_problem();
    let p = period_matrices::<Dd>(&c, &t, &PeriodSettings::for_precision::<Dd>()).unwrap();
    let tau = symmetrize(&p.tau);
    for (got, want) in [(tau[(0, 0)], TAU11), (tau[(1, 1)], TAU11), (tau[(0, 1)], TAU12)] {
        assert!(rel(got, cdd(want)) < 1e-26, "{}", rel(got, cdd(want)));
    }
}

#[test]
fn theta_at_the_worked_example_tau() {
    let tau: Mat<Dd> = Mat::from_rows(vec![vec![cdd(TAU11), cdd(TAU12)], vec![cdd(TAU12), cdd(TAU11)]]);
    let chi = Characteristic::parse("5/6,5/6;1/6,1/6").unwrap();
    let v = theta_constant(&tau, &chi, &ThetaSettings::for_precision::<Dd>()).unwrap();
    assert!(rel(v.value, cdd(THETA7)) < 1e-28, "{}", rel(v.value, cdd(THETA7)));
}

fn genus3_tau<R: Real>() -> Mat<R> {
    let e = |re: f64, im: f64| lift::<R>(Complex64::new(re, im));
    Mat::from_rows(vec![
        vec![e(0.2, 1.1), e(0.3, 0.1), e(-0.1, 0.2)],
        vec![e(0.3, 0.1), e(-0.4, 0.9), e(0.05, -0.15)],
        vec![e(-0.1, 0.2), e(0.05, -0.15), e(0.1, 1.3)],
    ])
}

type Case = ([i64; 3], [i64; 3], (&'static str, &'static str));

#[test]
fn genus_three_theta_series() {
    // (α, β) in sixths, mpmath value with |m_i| ≤ 9.
    let cases: [Case; 3] = [
        ([0, 0, 0], [0, 0, 0], ("1.1195955188837349671583277624", "-0.0680819247334158352921127423898")),
        ([1, 5, 3], [2, 1, 4], ("-0.27253008948951489936225810834", "-0.101133544227516495620840059068")),
        ([5, 5, 1], [1, 3, 1], ("0.762997653458935666220631454683", "-0.185634153607904325608841037873")),
    ];
    for (a, b, want) in cases {
        let chi = Characteristic::from_sixths(&a, &b).unwrap();
        let d = theta_constant(&genus3_tau::<f64>(), &chi, &ThetaSettings::for_precision::<f64>()).unwrap();
        let w = Complex64::new(f(want.0), f(want.1));
        assert!((d.value - w).norm() < 1e-14, "{chi}: {} vs {w}", d.value);
        // The decimal entries of τ are exact in Dd only up to their f64 rounding, so compare at 1e-15.
        let x = theta_constant(&genus3_tau::<Dd>(), &chi, &ThetaSettings::for_precision::<Dd>()).unwrap();
        assert!(rel(x.value, cdd(want)) < 1e-15);
    }
}

#[test]
fn kappa_against_closed_form() {
    // κ = ((2π)³·3^{3/4}·e^{11πi/12})⁻¹ to 30 digits.
    let want = cdd(("-0.001708296424847204353102201976767832", "-0.000457736647470782508010131815694129"));
    assert!(rel(kappa::<Dd>(), want) < 1e-29, "{}", rel(kappa::<Dd>(), want));
}
