//! F₃ labelings of the worked example: which are equi-distributed, their
//! coordinates in the Ā basis and the theta characteristic each one selects.

use thomae::theta::{characteristic_of, riemann_constant};
use thomae::thomae::{equidistributed_labelings, example7_problem};
use thomae::tree::equidistribution;

fn main() {
    let (config, tree, _) = example7_problem();
    println!("ϱ = {}", riemann_constant(&tree));
    for lambda in equidistributed_labelings(&config) {
        let e = equidistribution(config.indices(), lambda.coeffs());
        let coords = tree.abar_basis_expand(&lambda).unwrap();
        let chi = characteristic_of(&tree, &lambda).unwrap();
        println!("Λ = {:>14} balanced {} coordinates {coords:?} χ = {chi}", format!("{:?}", lambda.signed()), e.balanced);
    }
}
