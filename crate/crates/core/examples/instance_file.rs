//! Loads an instance file, reports what it contains and prints it back in
//! canonical form.

use procpolar::instance::Instance;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/instances/m2.toml").to_string());
    let text = std::fs::read_to_string(&path).expect("readable instance");
    let inst = match Instance::parse(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(2);
        }
    };
    println!("{path}: {} nodes, horizon {}", inst.tree.len(), inst.tree.horizon());
    println!("processes: {}", inst.processes.is_some());
    println!("conditional: {}", inst.conditional.is_some());
    println!("market: {}", inst.market.is_some());
    let canonical = inst.to_toml();
    assert_eq!(Instance::parse(&canonical).unwrap(), inst);
    print!("{canonical}");
}
