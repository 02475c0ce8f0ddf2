//! Merges λ₃, λ₄ toward 2.5 and extrapolates the periods, det P_B and the
//! theta constant as t → 0.

use num_complex::Complex64;
use thomae::degeneration::{det_pb_limit_of, merge_family, period_limits_of, theta_factorization_of, DegenerationSettings};
use thomae::thomae::example7_problem;

fn main() {
    let (config, tree, lambda) = example7_problem();
    let s = DegenerationSettings::for_precision::<f64>();
    let fam = merge_family::<f64>(&config, &tree, 2, Complex64::new(2.5, 0.0), &s).unwrap();
    println!("merged tree has {} terminals, cofactor sign {:+}", fam.setup.merged.tree.m(), fam.cofactor_sign());

    let p = period_limits_of(&config, &fam, &s).unwrap();
    for f in &p.vanishing {
        println!("vanishing {:<8} → {:.2e} (slope {:.3})", f.label, f.limit.value().norm(), f.limit.slope);
    }
    println!("divergent limit {:.12}, target {:?}, error {:.1e}", p.divergent.value(), p.target, p.divergent_rel_error.unwrap_or(f64::NAN));
    println!("limit curve deviation {:.1e}", p.limit_curve_deviation);

    let d = det_pb_limit_of(&config, &fam, &s).unwrap();
    println!("det P_B limit: error {:.1e}", d.rel_error.unwrap_or(f64::NAN));

    let th = theta_factorization_of(&tree, &lambda, &fam, &s).unwrap();
    println!(
        "theta factorization error {:.1e}, Chowla–Selberg factor {:.1e}, off-diagonal τ {:.1e}, pass {}",
        th.rel_error, th.chowla_selberg_rel_error, th.tau_offdiag_limit, th.pass
    );
}
