//! Builds elements of the solid, fork-convex hull of two supermartingales
//! and replays a random construction from its trace.

use procpolar::fixtures::t2;
use procpolar::process::{
    fork_splice, in_s1, random_hull_element, solid_multiply, AdaptedProcess, NonIncreasingProcess, ProcessSet,
};
use procpolar::report::fmt_values;
use procpolar::rat;

fn main() {
    let tree = t2();
    let values = |v: &[(i64, i64)]| v.iter().map(|&(a, b)| rat(a, b)).collect::<Vec<_>>();
    let y1 = AdaptedProcess::new(&tree, values(&[(1, 1), (3, 2), (1, 2), (2, 1), (1, 1), (1, 2), (1, 2)])).unwrap();
    let y2 = AdaptedProcess::new(&tree, values(&[(1, 1), (2, 1), (0, 1), (4, 1), (0, 1), (0, 1), (0, 1)])).unwrap();

    // Follow y1 until time 1, then mix the increments of y1 and y2 with a
    // weight chosen separately at each time-1 node.
    let spliced = fork_splice(&tree, &y1, &y1, &y2, 1, &[rat(1, 3), rat(1, 1)]).unwrap();
    println!("splice   {}  in S_1: {}", fmt_values(spliced.values()), in_s1(&spliced, &tree));

    let b = NonIncreasingProcess::new(
        &tree,
        AdaptedProcess::new(&tree, values(&[(1, 1), (1, 2), (1, 1), (1, 4), (1, 2), (1, 1), (0, 1)])).unwrap(),
    )
    .unwrap();
    let shrunk = solid_multiply(&y2, &b, &tree);
    println!("multiply {}", fmt_values(shrunk.values()));

    let c = ProcessSet::new(tree, vec![y1, y2]).unwrap();
    println!("far-reaching: {}", c.is_far_reaching());
    let sample = random_hull_element(&c, 3, 2024).unwrap();
    println!("sample   {} (trace depth {})", fmt_values(sample.process.values()), sample.trace.depth());
    assert_eq!(sample.trace.replay(&c).unwrap(), sample.process);
}
