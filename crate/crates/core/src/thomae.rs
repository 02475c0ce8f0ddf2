//! Difference products, the constant κ, and the end-to-end check
//! ϑ(τ)[Λ+ϱ]⁶ = ±κ_Λ·Δ(Σ,Λ)·det(P_B)³ with κ_Λ⁶ = κ^{6g}.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::config::BranchConfig;
use crate::cx::{abs, cis, div, lift, powi, C};
use crate::error::{Error, Result};
use crate::f3::F3Class;
use crate::periods::{period_matrices, symmetrize, PeriodData, PeriodSettings};
use crate::real::Real;
use crate::theta::{characteristic_of, theta_constant, Characteristic, ThetaSettings};
use crate::tree::{equidistribution, MarkedBinaryTree};

/// Π (λ_a − λ_b) over a ∈ S1, b ∈ S2; over index pairs a < b when S1 = S2.
pub fn pair_product<R: Real>(s1: &[usize], s2: &[usize], config: &BranchConfig) -> Result<C<R>> {
    let pt = |i: usize| lift::<R>(config.point(i));
    let mut p = C::<R>::one();
    if s1 == s2 {
        let mut s: Vec<usize> = s1.to_vec();
        s.sort_unstable();
        for (k, &i) in s.iter().enumerate() {
            for &j in &s[k + 1..] {
                p = p * (pt(i) - pt(j));
            }
        }
        return Ok(p);
    }
    if s1.iter().any(|i| s2.contains(i)) {
        return Err(Error::invalid("pair_product of overlapping distinct sets"));
    }
    for &i in s1 {
        for &j in s2 {
            p = p * (pt(i) - pt(j));
        }
    }
    Ok(p)
}

/// Λ_k (white terminals labelled k) and Λ̄_k (black terminals labelled k).
pub fn label_sets(config: &BranchConfig, lambda: &F3Class) -> ([Vec<usize>; 3], [Vec<usize>; 3]) {
    let mut w: [Vec<usize>; 3] = Default::default();
    let mut b: [Vec<usize>; 3] = Default::default();
    for (i, &k) in lambda.coeffs().iter().enumerate() {
        if config.a(i) == 1 {
            w[k as usize].push(i);
        } else {
            b[k as usize].push(i);
        }
    }
    (w, b)
}

/// Δ(Σ,Λ) = Π_k(Λ_kΛ_k)³(Λ̄_kΛ̄_k)³ · Π_{i<j}(Λ_iΛ_j)(Λ̄_iΛ̄_j) · Π_{i≠j}(Λ_iΛ̄_j)².
/// There are no (Λ_iΛ̄_i) factors.
pub fn delta_product<R: Real>(config: &BranchConfig, lambda: &F3Class) -> Result<C<R>> {
    if lambda.len() != config.m() {
        return Err(Error::invalid("labeling length differs from the number of branch points"));
    }
    if !equidistribution(config.indices(), lambda.coeffs()).balanced {
        return Err(Error::invalid("Λ is not equi-distributed"));
    }
    let (w, b) = label_sets(config, lambda);
    let mut d = C::<R>::one();
    for k in 0..3 {
        d = d * powi(pair_product::<R>(&w[k], &w[k], config)?, 3) * powi(pair_product::<R>(&b[k], &b[k], config)?, 3);
    }
    for i in 0..3 {
        for j in i + 1..3 {
            d = d * pair_product::<R>(&w[i], &w[j], config)? * pair_product::<R>(&b[i], &b[j], config)?;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                d = d * powi(pair_product::<R>(&w[i], &b[j], config)?, 2);
            }
        }
    }
    Ok(d)
}

/// κ = ((2π)³·3^{3/4}·e^{11πi/12})⁻¹.
pub fn kappa<R: Real>() -> C<R> {
    let two_pi = R::pi() * R::from_f64(2.0);
    let modulus = two_pi * two_pi * two_pi * R::from_f64(3.0).powf(R::ratio(3, 4));
    cis(-(R::pi() * R::ratio(11, 12))) * (R::one() / modulus)
}

/// κ^g.
pub fn kappa_pow<R: Real>(g: usize) -> C<R> {
    powi(kappa::<R>(), g as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on |r⁶/κ^{6g} − 1|.
    pub phase: f64,
    /// Bound on | |r|/|κ|^g − 1 |.
    pub modulus: f64,
}

impl Tolerances {
    pub fn for_precision<R: Real>() -> Self {
        if R::EPS < 1e-20 {
            Tolerances { phase: 1e-10, modulus: 1e-10 }
        } else {
            Tolerances { phase: 1e-5, modulus: 1e-6 }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub genus: usize,
    pub lambda: Vec<u8>,
    pub characteristic: String,
    /// ϑ[Λ+ϱ]⁶.
    pub lhs: [f64; 2],
    /// Δ(Σ,Λ)·det(P_B)³.
    pub rhs_base: [f64; 2],
    pub delta: [f64; 2],
    pub det_pb_cubed: [f64; 2],
    /// r = lhs / rhs_base.
    pub ratio: [f64; 2],
    /// r/κ^g.
    pub ratio_over_kappa: [f64; 2],
    /// | |r|/|κ|^g − 1 |.
    pub modulus_dev: f64,
    /// |r⁶/κ^{6g} − 1|.
    pub phase_test: f64,
    /// min over σ = ±1 of |r⁶/κ^{6g} − σ|.
    pub phase_test_signed: f64,
    /// |(r/κ^g)^{12} − 1|, a weaker diagnostic.
    pub root12_test: f64,
    pub theta_bound: f64,
    pub tolerances: Tolerances,
    pub pass: bool,
}

fn pair<R: Real>(z: C<R>) -> [f64; 2] {
    [z.re.to_f64(), z.im.to_f64()]
}

/// The check against already computed periods.
pub fn verify_with_periods<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    lambda: &F3Class,
    periods: &PeriodData<R>,
    theta: &ThetaSettings,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let chi: Characteristic = characteristic_of(tree, lambda)?;
    let delta = delta_product::<R>(config, lambda)?;
    let tau = symmetrize(&periods.tau);
    let th = theta_constant(&tau, &chi, theta)?;
    let lhs = powi(th.value, 6);
    let det3 = powi(periods.pb.det(), 3);
    let rhs = delta * det3;
    if abs(rhs).is_zero() {
        return Err(Error::numerical("verify_thomae", "Δ·det(P_B)³ vanishes"));
    }
    let r = div(lhs, rhs);
    let g = tree.genus();
    let kg = kappa_pow::<R>(g);
    let q = div(r, kg);
    let q6 = powi(q, 6);
    let modulus_dev = (abs(q).to_f64() - 1.0).abs();
    let phase_test = abs(q6 - C::one()).to_f64();
    let phase_test_signed = phase_test.min(abs(q6 + C::one()).to_f64());
    let root12_test = abs(powi(q, 12) - C::one()).to_f64();
    let pass = phase_test <= tol.phase && modulus_dev <= tol.modulus;
    Ok(VerificationReport {
        genus: g,
        lambda: lambda.coeffs().to_vec(),
        characteristic: chi.to_string(),
        lhs: pair(lhs),
        rhs_base: pair(rhs),
        delta: pair(delta),
        det_pb_cubed: pair(det3),
        ratio: pair(r),
        ratio_over_kappa: pair(q),
        modulus_dev,
        phase_test,
        phase_test_signed,
        root12_test,
        theta_bound: th.bound,
        tolerances: *tol,
        pass,
    })
}

/// Runs tree → cycles → periods → τ → characteristic → ϑ⁶ and compares.
pub fn verify_thomae<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    lambda: &F3Class,
    periods: &PeriodSettings,
    theta: &ThetaSettings,
    tol: &Tolerances,
) -> Result<(VerificationReport, PeriodData<R>)> {
    if !equidistribution(config.indices(), lambda.coeffs()).balanced {
        return Err(Error::invalid("Λ is not equi-distributed"));
    }
    let p = period_matrices::<R>(config, tree, periods)?;
    let rep = verify_with_periods(config, tree, lambda, &p, theta, tol)?;
    Ok((rep, p))
}

/// The closed-form genus-2 right-hand side: κ²·(λ₂−λ₁)(λ₄−λ₃)(λ₃−λ₁)²(λ₄−λ₂)²·det(P_B)³.
pub fn example7_rhs<R: Real>(config: &BranchConfig, det_pb: C<R>) -> C<R> {
    let l = |i: usize| lift::<R>(config.point(i));
    let d = (l(1) - l(0)) * (l(3) - l(2)) * powi(l(2) - l(0), 2) * powi(l(3) - l(1), 2);
    kappa_pow::<R>(2) * d * powi(det_pb, 3)
}

/// The genus-2 worked example: λ = (0,1,2,3), a = (2,2,1,1), its tree and Λ = −e₁+e₂+e₃−e₄.
pub fn example7_problem() -> (BranchConfig, MarkedBinaryTree, F3Class) {
    let c = BranchConfig::from_reals(&[0.0, 1.0, 2.0, 3.0], &[2, 2, 1, 1]).expect("static config");
    let l = F3Class::class([-1, 1, 1, -1], c.indices()).expect("static labeling");
    (c, MarkedBinaryTree::example7(), l)
}

#[derive(Clone, Debug, Serialize)]
pub struct Example7Report {
    pub verification: VerificationReport,
    /// κ²·(λ₂−λ₁)(λ₄−λ₃)(λ₃−λ₁)²(λ₄−λ₂)²·det(P_B)³ in closed form.
    pub closed_form_rhs: [f64; 2],
    /// |ϑ⁶ / closed_form_rhs − 1|.
    pub closed_form_rel_error: f64,
    pub closed_form_tol: f64,
    pub pass: bool,
}

/// Compares ϑ[5/6,5/6;1/6,1/6]⁶ with the closed-form right-hand side, phase included.
pub fn example7_check<R: Real>(
    config: &BranchConfig,
    tree: &MarkedBinaryTree,
    lambda: &F3Class,
    periods: &PeriodData<R>,
    theta: &ThetaSettings,
    tol: &Tolerances,
) -> Result<Example7Report> {
    let verification = verify_with_periods(config, tree, lambda, periods, theta, tol)?;
    let chi = characteristic_of(tree, lambda)?;
    let lhs = powi(theta_constant(&symmetrize(&periods.tau), &chi, theta)?.value, 6);
    let rhs = example7_rhs(config, periods.pb.det());
    let closed_form_rel_error = abs(div(lhs, rhs) - C::one()).to_f64();
    let closed_form_tol = if R::EPS < 1e-20 { 1e-8 } else { 1e-6 };
    let pass = verification.pass && closed_form_rel_error < closed_form_tol;
    Ok(Example7Report { verification, closed_form_rhs: pair(rhs), closed_form_rel_error, closed_form_tol, pass })
}

/// All equi-distributed Λ, one representative per class mod Diag.
pub fn equidistributed_labelings(config: &BranchConfig) -> Vec<F3Class> {
    let mut out: Vec<F3Class> = Vec::new();
    for v in crate::f3::all_vectors(config.m()) {
        if v[0] != 0 {
            continue;
        }
        if equidistribution(config.indices(), &v).balanced {
            out.push(F3Class::class(v.iter().map(|&x| x as i64), config.indices()).expect("balanced ⇒ Ker Π"));
        }
    }
    out
}

/// Scale-free sanity number for κ: |κ| = (2π)^{−3}·3^{−3/4}.
pub fn kappa_modulus() -> f64 {
    abs(kappa::<f64>())
}
