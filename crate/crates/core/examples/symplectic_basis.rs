//! Lifts the tree's A and B cycles to the curve and prints their
//! intersection matrix, which must be the standard symplectic form.

use thomae::cycles::{class_in_h, intersection_matrix, standard_form};
use thomae::periods::{period_matrices, PeriodSettings};
use thomae::thomae::example7_problem;

fn main() {
    let (config, tree, _) = example7_problem();
    let s = PeriodSettings::for_precision::<f64>();
    let p = period_matrices::<f64>(&config, &tree, &s).expect("periods");
    println!("spider base point {} (score {:.3})", p.spider.base, p.spider.score);
    for (a, b) in p.basis.a.iter().zip(&p.basis.b) {
        println!("{:<6} {:?}  class {:?}", a.label, a.terms, class_in_h(a, &config).unwrap().signed());
        println!("{:<6} {:?}", b.label, b.terms);
    }
    let m = intersection_matrix(&config, &p.basis, &p.spider, s.seed).expect("intersections");
    for row in &m {
        println!("{row:?}");
    }
    assert_eq!(m, standard_form(tree.genus()));
}
