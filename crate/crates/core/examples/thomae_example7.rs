//! The genus-2 identity ϑ[5/6,5/6;1/6,1/6]⁶ = κ²·Δ·det(P_B)³ on λ = (0,1,2,3).

use thomae::periods::{period_matrices, PeriodSettings};
use thomae::theta::ThetaSettings;
use thomae::thomae::{example7_check, example7_problem, Tolerances};
use thomae::{Dd, Real};

fn run<R: Real>() {
    let (config, tree, lambda) = example7_problem();
    let p = period_matrices::<R>(&config, &tree, &PeriodSettings::for_precision::<R>()).unwrap();
    let r = example7_check(&config, &tree, &lambda, &p, &ThetaSettings::for_precision::<R>(), &Tolerances::for_precision::<R>())
        .unwrap();
    let v = &r.verification;
    println!("[{}] χ = {}", R::NAME, v.characteristic);
    println!("  ϑ⁶        = {:+.15e} {:+.15e}i", v.lhs[0], v.lhs[1]);
    println!("  right side = {:+.15e} {:+.15e}i", r.closed_form_rhs[0], r.closed_form_rhs[1]);
    println!("  relative error {:.2e}, r/κ² = {:?}, pass {}", r.closed_form_rel_error, v.ratio_over_kappa, r.pass);
}

fn main() {
    run::<f64>();
    run::<Dd>();
}
