//! Decides membership in the bipolar of a set of processes with two
//! independent oracles and builds a polar element by the envelope
//! construction.

use procpolar::conditional::RandomVariable;
use procpolar::fixtures::t2;
use procpolar::polar::{
    bipolar_membership_incremental, bipolar_membership_lp, cadlag_envelope, polar_membership,
};
use procpolar::process::{AdaptedProcess, ProcessSet};
use procpolar::report::fmt_values;
use procpolar::rat;

fn main() {
    let tree = t2();
    let p = |v: &[(i64, i64)]| AdaptedProcess::new(&tree, v.iter().map(|&(a, b)| rat(a, b)).collect()).unwrap();
    let c = ProcessSet::new(
        tree.clone(),
        vec![
            p(&[(1, 1), (3, 2), (1, 2), (2, 1), (1, 1), (1, 2), (1, 2)]),
            p(&[(1, 1), (2, 1), (0, 1), (4, 1), (0, 1), (0, 1), (0, 1)]),
        ],
    )
    .unwrap();

    let probes = [
        ("average", p(&[(1, 1), (7, 4), (1, 4), (3, 1), (1, 2), (1, 4), (1, 4)])),
        ("half", p(&[(1, 2), (3, 4), (1, 4), (1, 1), (1, 2), (1, 4), (1, 4)])),
        ("too large", p(&[(1, 1), (2, 1), (1, 1), (4, 1), (0, 1), (1, 1), (1, 1)])),
    ];
    for (name, z) in &probes {
        let lp = bipolar_membership_lp(z, &c).unwrap();
        let inc = bipolar_membership_incremental(z, &c).unwrap();
        println!("{name:10} lp {:5} incremental {:5}", lp.is_in(), inc.is_in());
        assert_eq!(lp.is_in(), inc.is_in());
    }

    // Envelope from time 0 to time 2 for the payoff g at the leaves.
    let g = RandomVariable::new(vec![rat(1, 4), rat(0, 1), rat(1, 2), rat(1, 2)]).unwrap();
    let x = cadlag_envelope(&c, &g, 0, 2).unwrap();
    println!("envelope {}  in polar: {}", fmt_values(x.values()), polar_membership(&x, &c));
}
