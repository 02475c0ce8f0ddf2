//! Closed-form constants and worked examples, re-derived by the library.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::BranchConfig;
use crate::cx::{omega_pow, C};
use crate::cycles::{build_symplectic_basis, class_in_h, intersection_matrix, standard_form};
use crate::degeneration::{
    check_trivial_monodromy, chowla_selberg_value, merge_family, theta_factorization_of, DegenerationSettings,
    MonodromySettings,
};
use crate::error::Result;
use crate::f3::F3Class;
use crate::linalg::Mat;
use crate::periods::{period_matrices, PeriodSettings};
use crate::quad::{tanh_sinh, QuadSettings};
use crate::real::{Dd, Real};
use crate::theta::{characteristic_of, riemann_constant, theta_constant, Characteristic, ThetaSettings};
use crate::thomae::{delta_product, example7_check, example7_problem, kappa_pow, Tolerances};
use crate::tree::{equidistribution, MarkedBinaryTree};

#[derive(Clone, Debug, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    #[serde(skip)]
    pub millis: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<SelfCheck>,
    pub pass: bool,
}

type Outcome = Result<(bool, String)>;
type Named = (&'static str, fn() -> Outcome);

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn simplest_tree() -> Outcome {
    let t = MarkedBinaryTree::simplest();
    let c = BranchConfig::from_reals(&[0.0, 1.0, 3.0], &[1, 1, 1])?;
    let g = t.validate(&c).genus;
    let v = t.inner_order()[0];
    let blocks = t.blocks_at(v)?;
    let class = t.class_abar(v);
    let ok = g == Some(1) && blocks == [vec![0], vec![1], vec![2]] && class.eq_mod_diag(&F3Class::raw([-1, 1, 0]));
    Ok((ok, format!("g = {g:?}, blocks {blocks:?}, class {:?}", class.signed())))
}

fn example_tree() -> Outcome {
    let (c, t, l) = example7_problem();
    let g = t.validate(&c).genus;
    let o = t.inner_order();
    let (a1, a2) = (t.class_abar(o[0]), t.class_abar(o[1]));
    let expand = t.abar_basis_expand(&l)?;
    let ok = g == Some(2)
        && a1.eq_mod_diag(&F3Class::raw([-1, 1, 0, 0]))
        && a2.eq_mod_diag(&F3Class::raw([0, 0, -1, 1]))
        && a1.add(&a2.scale(-1)).eq_mod_diag(&l)
        && expand == [1, 2];
    Ok((ok, format!("g = {g:?}, Ā₁ = {:?}, Ā₂ = {:?}, Λ coordinates {expand:?}", a1.signed(), a2.signed())))
}

fn equidistribution_examples() -> Outcome {
    let a = equidistribution(&[2, 2, 1, 1], &[2, 1, 1, 2]).balanced;
    let b = equidistribution(&[1; 6], &[0, 0, 1, 1, 2, 2]).balanced;
    Ok((a && b, format!("worked example {a}, all-white m = 6 {b}")))
}

fn decomposition_dimensions() -> Outcome {
    let (_, t, _) = example7_problem();
    let (p, q) = t.decompose(t.inner_edges()[0])?;
    let (gp, gq) = (p.tree.genus(), q.tree.genus());
    Ok((gp + gq == t.genus(), format!("{gp} + {gq} = {}", t.genus())))
}

fn intersection_form() -> Outcome {
    let (c, t, _) = example7_problem();
    let s = PeriodSettings::for_precision::<f64>();
    let p = period_matrices::<f64>(&c, &t, &s)?;
    let m = intersection_matrix(&c, &p.basis, &p.spider, s.seed)?;
    let classes_ok = p
        .basis
        .vertices
        .iter()
        .zip(&p.basis.a)
        .map(|(&v, a)| Ok(class_in_h(a, &c)?.eq_mod_diag(&t.class_abar(v))))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|x| x);
    Ok((m == standard_form(2) && classes_ok, format!("intersection matrix {m:?}, classes match {classes_ok}")))
}

/// b_v1 = ω²a_v1 on the white vertex, ω·a_v1 on the black one, and the real
/// integral behind a₁₁.
fn example_periods() -> Outcome {
    let (c, t, _) = example7_problem();
    let basis = build_symplectic_basis(&c, &t)?;
    let p = period_matrices::<f64>(&c, &t, &PeriodSettings::for_precision::<f64>())?;
    let w = |k| omega_pow::<f64>(k);
    let r1 = rel(p.pb[(0, 0)], w(2) * p.pa[(0, 0)]);
    let r2 = rel(p.pb[(1, 0)], w(1) * p.pa[(1, 0)]);
    // ∫₀¹ dx/y₁ with y₁ = (x²(x−1)²(x−2)(x−3))^{1/3} > 0 on (0, 1).
    let q = tanh_sinh::<f64>(1, &QuadSettings::for_precision::<f64>(), |u, v, out| {
        out[0] = C::new((u * v).powf(-2.0 / 3.0) * ((2.0 - u) * (3.0 - u)).powf(-1.0 / 3.0), 0.0)
    })?;
    // The global choice of cube root in y₁ rescales its column by a power of ω, which
    // leaves τ and det(P_B)³ unchanged; the closed-form integral uses the real branch.
    let ratio = p.pa[(0, 0)] / ((w(2) - Complex64::new(1.0, 0.0)) * q.values[0]);
    let k = (0..3).min_by(|&i, &j| (ratio - w(i)).norm().total_cmp(&(ratio - w(j)).norm())).unwrap_or(0);
    let r3 = (ratio - w(k)).norm();
    let ok = r1 < 1e-10 && r2 < 1e-10 && r3 < 1e-10 && basis.a[0] == p.basis.a[0];
    Ok((ok, format!("b11/ω²a11 − 1: {r1:.1e}, b21/ωa21 − 1: {r2:.1e}, a11 = ω^{k}·(ω²−1)∫₀¹ to {r3:.1e}")))
}

fn chowla_selberg() -> Outcome {
    let tau: Mat<Dd> = Mat::from_rows(vec![vec![omega_pow::<Dd>(1)]]);
    let chi = Characteristic::from_sixths(&[1], &[-1])?;
    let th = theta_constant(&tau, &chi, &ThetaSettings::for_precision::<Dd>())?;
    let v = crate::cx::powi(th.value, 6);
    let v = Complex64::new(v.re.to_f64(), v.im.to_f64());
    let e = rel(v, chowla_selberg_value());
    Ok((e < 1e-10, format!("ϑ(ω)[1/6;−1/6]⁶ = {v:.15}, relative error {e:.1e}")))
}

fn characteristics() -> Outcome {
    let (_, t, l) = example7_problem();
    let rho = riemann_constant(&t);
    let chi = characteristic_of(&t, &l)?;
    let ok = rho == Characteristic::from_sixths(&[3, 3], &[3, 3])? && chi == Characteristic::from_sixths(&[5, 5], &[1, 1])?;
    Ok((ok, format!("ϱ = {rho}, χ = {chi}")))
}

fn constants() -> Outcome {
    let (c, _, l) = example7_problem();
    let d = delta_product::<f64>(&c, &l)?;
    let pi = std::f64::consts::PI;
    let closed = Complex64::from_polar(1.0 / (3.0 * 3f64.sqrt() * (2.0 * pi).powi(6)), pi / 6.0);
    let e = rel(kappa_pow::<f64>(2), closed);
    Ok((d == Complex64::new(-16.0, 0.0) && e < 1e-14, format!("Δ = {d}, κ² vs closed form {e:.1e}")))
}

fn example7_at<R: Real>() -> Outcome {
    let (c, t, l) = example7_problem();
    let p = period_matrices::<R>(&c, &t, &PeriodSettings::for_precision::<R>())?;
    let r = example7_check(&c, &t, &l, &p, &ThetaSettings::for_precision::<R>(), &Tolerances::for_precision::<R>())?;
    Ok((r.pass, format!("|ϑ⁶/closed form − 1| = {:.2e} (tolerance {:.0e})", r.closed_form_rel_error, r.closed_form_tol)))
}

fn merged_index() -> Outcome {
    let (_, t, _) = example7_problem();
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, j) in [(0, 1), (2, 3)] {
        let d = t.merge_terminals(i, j)?;
        let a = d.indices()[d.new_branch];
        let sum = (t.indices()[i] + t.indices()[j]) % 3;
        ok &= a == sum;
        detail.push(format!("merge {i},{j}: new index {a}"));
    }
    Ok((ok, detail.join(", ")))
}

fn degeneration() -> Outcome {
    let (c, t, l) = example7_problem();
    let s = DegenerationSettings::for_precision::<f64>();
    let fam = merge_family::<f64>(&c, &t, 2, Complex64::new(2.5, 0.0), &s)?;
    let r = theta_factorization_of(&t, &l, &fam, &s)?;
    Ok((
        r.pass,
        format!(
            "first factor vs Chowla–Selberg {:.1e}, factorization {:.1e}, off-diagonal τ limit {:.1e}",
            r.chowla_selberg_rel_error, r.rel_error, r.tau_offdiag_limit
        ),
    ))
}

fn monodromy() -> Outcome {
    let (c, t, _) = example7_problem();
    let o = t.inner_order();
    let r = check_trivial_monodromy::<f64>(&c, &t, (o[0], o[1]), &MonodromySettings::for_precision::<f64>())?;
    Ok((r.pass, format!("drift {:.1e}, control drift {:.2}", r.drift, r.control_drift)))
}

pub fn run_selftest() -> SelftestReport {
    let checks: [Named; 14] = [
        ("simplest tree: genus, blocks, class", simplest_tree),
        ("worked example tree: genus, classes, expansion of Λ", example_tree),
        ("equi-distribution examples", equidistribution_examples),
        ("decomposition splits the dimension", decomposition_dimensions),
        ("worked example basis is symplectic", intersection_form),
        ("worked example A and B periods", example_periods),
        ("Chowla–Selberg theta value", chowla_selberg),
        ("Riemann characteristic and χ(Λ)", characteristics),
        ("Δ and κ²", constants),
        ("worked example identity, double", example7_at::<f64>),
        ("worked example identity, extended", example7_at::<Dd>),
        ("merged terminal index", merged_index),
        ("theta factorization under degeneration", degeneration),
        ("trivial monodromy", monodromy),
    ];
    let checks: Vec<SelfCheck> = checks
        .iter()
        .map(|&(name, f)| {
            let t0 = Instant::now();
            let (pass, detail) = f().unwrap_or_else(|e| (false, e.to_string()));
            SelfCheck { name, pass, detail, millis: t0.elapsed().as_secs_f64() * 1e3 }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    SelftestReport { checks, pass }
}
