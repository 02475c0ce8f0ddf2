//! Random trees on random configurations: every equi-distributed Λ must give
//! r/κ^g of modulus one with sixth power one.
//! `cargo run --release --example thomae_random -- 6 10` for ten genus-4 cases.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thomae::periods::{period_matrices, PeriodSettings};
use thomae::theta::ThetaSettings;
use thomae::thomae::{equidistributed_labelings, verify_with_periods, Tolerances};
use thomae::tree::gen;
use thomae::BranchConfig;

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let m = args.next().unwrap_or(5);
    let n = args.next().unwrap_or(5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..n {
        let tree = gen::random_tree(m, &mut rng);
        let order = tree.cyclic_order();
        let mut pts = vec![Complex64::new(0.0, 0.0); m];
        for (k, &i) in order.iter().enumerate() {
            let ang = std::f64::consts::TAU * (k as f64 + rng.gen_range(-0.3..0.3)) / m as f64;
            pts[i] = Complex64::from_polar(rng.gen_range(0.7..1.3), ang);
        }
        let config = BranchConfig::new(pts, tree.indices()).unwrap();
        let p = period_matrices::<f64>(&config, &tree, &PeriodSettings::for_precision::<f64>()).unwrap();
        let labelings = equidistributed_labelings(&config);
        let (mut worst_phase, mut worst_mod, mut pass) = (0f64, 0f64, true);
        for l in &labelings {
            let r = verify_with_periods(&config, &tree, l, &p, &ThetaSettings::for_precision::<f64>(), &Tolerances::for_precision::<f64>())
                .unwrap();
            worst_phase = worst_phase.max(r.phase_test);
            worst_mod = worst_mod.max(r.modulus_dev);
            pass &= r.pass;
        }
        println!(
            "case {case}: a = {:?}, genus {}, {} labelings, worst phase {worst_phase:.1e}, modulus {worst_mod:.1e}, {}",
            config.indices(),
            tree.genus(),
            labelings.len(),
            if pass { "PASS" } else { "FAIL" }
        );
    }
}
