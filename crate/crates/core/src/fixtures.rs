//! Small named instances used by tests, examples and the acceptance suite.

use crate::rational::rat;
use crate::market::Market;
use crate::process::AdaptedProcess;
use crate::tree::EventTree;

/// One step, two branches with probabilities (1/2, 1/2).
pub fn t1() -> EventTree {
    EventTree::uniform_levels(&[vec![rat(1, 2), rat(1, 2)]]).unwrap()
}

/// Two steps of the binary (1/2, 1/2) tree. Nodes: 0 root; 1, 2 at time 1;
/// 3, 4 below 1 and 5, 6 below 2.
pub fn t2() -> EventTree {
    EventTree::uniform_levels(&[vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]]).unwrap()
}

/// One step, three equally likely branches.
pub fn trinomial_tree() -> EventTree {
    EventTree::uniform_levels(&[vec![rat(1, 3), rat(1, 3), rat(1, 3)]]).unwrap()
}

/// Complete one-step market: S = 4 going to 8 or 2 with probabilities
/// (1/2, 1/2). The unique martingale weights are (1/3, 2/3).
pub fn m1() -> Market {
    let tree = t1();
    let s = AdaptedProcess::new(&tree, vec![rat(4, 1), rat(8, 1), rat(2, 1)]).unwrap();
    Market::new(tree, vec![s]).unwrap()
}

/// Incomplete trinomial market: S = 4 going to 8, 4 or 2, uniform P.
pub fn m2() -> Market {
    let tree = trinomial_tree();
    let s = AdaptedProcess::new(&tree, vec![rat(4, 1), rat(8, 1), rat(4, 1), rat(2, 1)]).unwrap();
    Market::new(tree, vec![s]).unwrap()
}
