//! Builds the genus-2 worked example, validates its tree and prints the input
//! file the CLI accepts. `cargo run --example validate_tree > ex.json`

use thomae::io::ConfigFile;
use thomae::thomae::example7_problem;

fn main() {
    let (config, tree, lambda) = example7_problem();
    let report = tree.validate(&config);
    for c in &report.checks {
        eprintln!("{:<5} {}", if c.pass { "ok" } else { "FAIL" }, c.name);
    }
    eprintln!("genus {:?}", report.genus);
    for v in tree.inner_order() {
        eprintln!("{:?}: blocks {:?}, Ā = {:?}", tree.node_id(v), tree.blocks_at(v).unwrap(), tree.class_abar(v).signed());
    }
    println!("{}", ConfigFile::new(&config, &tree, Some(&lambda)).to_json());
}
