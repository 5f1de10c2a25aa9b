//! Checks, on a random market, that the enlargement of the density processes
//! is the polar of the wealth processes with and without consumption, and
//! that the bipolar of the pure-investment wealth processes is exactly the
//! set of wealth processes with consumption.

use procpolar::fuzz::random_market;
use procpolar::market::{density_process, sample_consumption_pair, verify_market_duality};
use procpolar::process::AdaptedProcess;
use procpolar::report::fmt_values;
use procpolar::rat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_market(&mut rng);
    let tree = m.tree();
    println!("{} nodes, {} assets", tree.len(), m.assets());
    for p in m.prices() {
        println!("  prices {}", fmt_values(p.values()));
    }
    let density = density_process(m.interior_measure(), &m).unwrap().process;
    let pairs: Vec<_> = (0..4).map(|_| sample_consumption_pair(&mut rng, &m).unwrap()).collect();
    let y_probes = vec![density.clone(), density.scale(&rat(1, 2)), AdaptedProcess::constant(tree, rat(1, 1))];
    let z_probes: Vec<_> = pairs.iter().map(|p| AdaptedProcess::new(tree, p.net()).unwrap()).collect();
    let report = verify_market_duality(&m, &y_probes, &pairs, &z_probes).unwrap();
    println!("products checked: {}", report.products_checked);
    println!("polar oracles (pure, consumption, extended): {:?}", report.polar_oracles);
    println!("bipolar vs feasibility: {:?}", report.bipolar_oracles);
    println!("all consistent: {}", report.all_ok());
}
