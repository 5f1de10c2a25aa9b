//! Hull membership against conditional bipolar membership for a family of
//! random variables on four outcomes, then the product decomposition of a
//! bipolar element.

use procpolar::conditional::{
    compare_oracles, secondpolar_decompose, RandomVariable, RvSet,
};
use procpolar::report::fmt_values;
use procpolar::tree::{FiniteSpace, Partition};
use procpolar::rat;

fn rv(v: &[(i64, i64)]) -> RandomVariable {
    RandomVariable::new(v.iter().map(|&(a, b)| rat(a, b)).collect()).unwrap()
}

fn main() {
    let space = FiniteSpace::uniform(4);
    let partition = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
    let generators = vec![rv(&[(2, 1), (0, 1), (1, 1), (1, 1)]), rv(&[(0, 1), (2, 1), (1, 1), (1, 1)])];
    let c = RvSet::new(space, partition, generators).unwrap();

    let probes = [
        ("average", rv(&[(1, 1), (1, 1), (1, 1), (1, 1)])),
        ("block mix", rv(&[(3, 2), (1, 2), (1, 1), (1, 2)])),
        ("too tall", rv(&[(2, 1), (2, 1), (1, 1), (1, 1)])),
    ];
    for (name, h) in &probes {
        let cmp = compare_oracles(h, &c).unwrap();
        println!(
            "{name:10} {}: hull {}, bipolar {}",
            fmt_values(h.values()),
            cmp.hull.is_in(),
            cmp.bipolar.is_in()
        );
        assert!(cmp.agree());
    }

    // f is in the bipolar; l is block-constant with E[l] <= 1.
    let f = rv(&[(3, 2), (1, 2), (1, 1), (1, 2)]);
    let l = rv(&[(1, 2), (1, 2), (3, 2), (3, 2)]);
    let d = secondpolar_decompose(&f, &l, &c).unwrap();
    println!("f l = h k with h = {}, k = {}", fmt_values(d.h.values()), fmt_values(d.k.values()));
}
