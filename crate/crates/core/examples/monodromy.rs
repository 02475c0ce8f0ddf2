//! Transports the period matrices around a full turn of the shrinking
//! parameter and compares with the start, plus the one-third-turn control.

use thomae::degeneration::{check_trivial_monodromy, MonodromySettings};
use thomae::thomae::example7_problem;

fn main() {
    let (config, tree, _) = example7_problem();
    let o = tree.inner_order();
    let r = check_trivial_monodromy::<f64>(&config, &tree, (o[0], o[1]), &MonodromySettings::for_precision::<f64>()).unwrap();
    println!("shrunk terminals {:?} about {:?}, annulus {:.3}..{:.3}", r.subset, r.center, r.r_inner, r.r_outer);
    println!("full turn drift {:.2e}, identity drift {:.2e}, one-third control {:.3}", r.drift, r.identity_drift, r.control_drift);
    println!("{}", if r.pass { "trivial monodromy" } else { "monodromy detected" });
}
