//! P_A, P_B and τ for the worked example at double and double-double precision.

use thomae::linalg::Mat;
use thomae::periods::{period_matrices, symmetrize, PeriodSettings};
use thomae::thomae::example7_problem;
use thomae::{Dd, Real};

fn show<R: Real>(name: &str, m: &Mat<R>) {
    println!("{name}:");
    for row in m.to_pairs() {
        let cells: Vec<String> = row.iter().map(|[re, im]| format!("{re:>+.15} {im:>+.15}i")).collect();
        println!("  {}", cells.join("   "));
    }
}

fn main() {
    let (config, tree, _) = example7_problem();
    let p = period_matrices::<f64>(&config, &tree, &PeriodSettings::for_precision::<f64>()).unwrap();
    show("P_A", &p.pa);
    show("P_B", &p.pb);
    show("τ", &symmetrize(&p.tau));
    println!("cond₁(P_B) {:.3}, asymmetry {:.1e}, min eig Im τ {:.4}", p.cond_b, p.symmetry_residual, p.min_eig_im_tau);

    let q = period_matrices::<Dd>(&config, &tree, &PeriodSettings::for_precision::<Dd>()).unwrap();
    let t = symmetrize(&q.tau);
    println!("τ₁₁ in double-double: {} {}i", t[(0, 0)].re, t[(0, 0)].im);
    println!("double vs double-double: {:.1e}", symmetrize(&p.tau).sub(&t.lower()).max_abs());
}
