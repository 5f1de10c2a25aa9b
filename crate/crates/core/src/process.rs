//! Nonnegative adapted processes on an event tree and the operations that
//! generate solid, fork-convex hulls.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::{div_zero_convention, in_unit_interval};
use crate::tree::{EventTree, NodeId};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProcessError {
    #[error("expected {expected} node values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value at node {0} is negative")]
    Negative(NodeId),
    #[error("value {0} at the root exceeds 1")]
    RootAboveOne(String),
    #[error("value increases along the edge into node {0}")]
    Increases(NodeId),
    #[error("a process set needs at least one generator")]
    NoGenerators,
    #[error("generator {0} is not a supermartingale starting at most 1")]
    NotInS1(usize),
    #[error("process does not absorb zeros (node {0} is zero, a descendant is not)")]
    NotAbsorbing(NodeId),
    #[error("times out of order: s = {s}, t = {t}")]
    TimesOutOfOrder { s: usize, t: usize },
    #[error("node {node} is at time {actual}, expected {expected}")]
    WrongTime {
        node: NodeId,
        expected: usize,
        actual: usize,
    },
    #[error("time {t} exceeds the horizon {horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },
    #[error("splice weight at slot {0} lies outside [0, 1]")]
    WeightOutOfRange(usize),
}

/// One nonnegative value per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdaptedProcess {
    values: Vec<Rational>,
}

impl AdaptedProcess {
    pub fn new(tree: &EventTree, values: Vec<Rational>) -> Result<Self, ProcessError> {
        if values.len() != tree.len() {
            return Err(ProcessError::LengthMismatch {
                expected: tree.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(Signed::is_negative) {
            return Err(ProcessError::Negative(NodeId(i)));
        }
        Ok(AdaptedProcess { values })
    }

    pub fn constant(tree: &EventTree, c: Rational) -> Self {
        assert!(!c.is_negative());
        AdaptedProcess {
            values: vec![c; tree.len()],
        }
    }

    pub fn zero(tree: &EventTree) -> Self {
        Self::constant(tree, Rational::zero())
    }

    pub fn get(&self, n: NodeId) -> &Rational {
        &self.values[n.0]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn root_value(&self, tree: &EventTree) -> &Rational {
        self.get(tree.root())
    }

    pub fn mul(&self, other: &AdaptedProcess) -> AdaptedProcess {
        AdaptedProcess {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> AdaptedProcess {
        assert!(!c.is_negative());
        AdaptedProcess {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Copy with one node value replaced.
    pub fn with_value(&self, n: NodeId, v: Rational) -> AdaptedProcess {
        assert!(!v.is_negative());
        let mut values = self.values.clone();
        values[n.0] = v;
        AdaptedProcess { values }
    }
}

/// A process in `V`: starts at most 1 and never increases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonIncreasingProcess(AdaptedProcess);

impl NonIncreasingProcess {
    pub fn new(tree: &EventTree, p: AdaptedProcess) -> Result<Self, ProcessError> {
        if p.len() != tree.len() {
            return Err(ProcessError::LengthMismatch {
                expected: tree.len(),
                found: p.len(),
            });
        }
        let root = p.root_value(tree);
        if root > &Rational::one() {
            return Err(ProcessError::RootAboveOne(root.to_string()));
        }
        for n in tree.nodes() {
            if let Some(parent) = tree.parent(n) {
                if p.get(n) > p.get(parent) {
                    return Err(ProcessError::Increases(n));
                }
            }
        }
        Ok(NonIncreasingProcess(p))
    }

    pub fn process(&self) -> &AdaptedProcess {
        &self.0
    }
}

/// First non-terminal node where the one-step expectation exceeds the value.
pub fn supermartingale_violation(y: &AdaptedProcess, tree: &EventTree) -> Option<NodeId> {
    tree.non_terminal()
        .find(|&n| &tree.expect_children(n, y.values()) > y.get(n))
}

pub fn is_supermartingale(y: &AdaptedProcess, tree: &EventTree) -> bool {
    y.len() == tree.len() && supermartingale_violation(y, tree).is_none()
}

/// Supermartingale with value at most 1 at the root.
pub fn in_s1(y: &AdaptedProcess, tree: &EventTree) -> bool {
    is_supermartingale(y, tree) && y.root_value(tree) <= &Rational::one()
}

pub fn is_martingale(y: &AdaptedProcess, tree: &EventTree) -> bool {
    tree.non_terminal()
        .all(|n| &tree.expect_children(n, y.values()) == y.get(n))
}

/// First node that is zero while one of its children is not.
pub fn absorption_violation(y: &AdaptedProcess, tree: &EventTree) -> Option<NodeId> {
    tree.non_terminal().find(|&n| {
        y.get(n).is_zero() && tree.children(n).any(|c| !y.get(c).is_zero())
    })
}

/// Whether `y(n) = 0` forces `y = 0` on every descendant of `n`.
pub fn zero_absorption_check(y: &AdaptedProcess, tree: &EventTree) -> bool {
    absorption_violation(y, tree).is_none()
}

/// Multiplicative increment `y(node_t) / y(ancestor at s)` with `0/0 = 0`.
pub fn increment(
    y: &AdaptedProcess,
    tree: &EventTree,
    s: usize,
    t: usize,
    node_t: NodeId,
) -> Result<Rational, ProcessError> {
    if s > t {
        return Err(ProcessError::TimesOutOfOrder { s, t });
    }
    if tree.time(node_t) != t {
        return Err(ProcessError::WrongTime {
            node: node_t,
            expected: t,
            actual: tree.time(node_t),
        });
    }
    if let Some(n) = absorption_violation(y, tree) {
        return Err(ProcessError::NotAbsorbing(n));
    }
    Ok(increment_unchecked(y, tree, s, node_t))
}

/// [`increment`] without validation; the caller guarantees absorption.
pub(crate) fn increment_unchecked(y: &AdaptedProcess, tree: &EventTree, s: usize, m: NodeId) -> Rational {
    if tree.time(m) == s {
        return Rational::one();
    }
    let n = tree.ancestor_at(m, s).expect("s <= time(m)");
    div_zero_convention(y.get(m), y.get(n)).expect("absorbing process")
}

/// Pointwise product `y b`.
pub fn solid_multiply(y: &AdaptedProcess, b: &NonIncreasingProcess, tree: &EventTree) -> AdaptedProcess {
    let out = y.mul(b.process());
    if in_s1(y, tree) {
        assert!(in_s1(&out, tree), "solid multiplication left S_1");
    }
    out
}

/// Keeps `y1` before time `s`; below a time-`s` node `n` continues as
/// `y1(n) (h(n) dY2 + (1 - h(n)) dY3)` with increments taken from time `s`.
/// `h` is indexed by the position of `n` among the time-`s` nodes.
pub fn fork_splice(
    tree: &EventTree,
    y1: &AdaptedProcess,
    y2: &AdaptedProcess,
    y3: &AdaptedProcess,
    s: usize,
    h: &[Rational],
) -> Result<AdaptedProcess, ProcessError> {
    for y in [y1, y2, y3] {
        if y.len() != tree.len() {
            return Err(ProcessError::LengthMismatch {
                expected: tree.len(),
                found: y.len(),
            });
        }
    }
    if s > tree.horizon() {
        return Err(ProcessError::TimeOutOfRange {
            t: s,
            horizon: tree.horizon(),
        });
    }
    let slots = tree.nodes_at(s).len();
    if h.len() != slots {
        return Err(ProcessError::LengthMismatch {
            expected: slots,
            found: h.len(),
        });
    }
    if let Some(i) = h.iter().position(|w| !in_unit_interval(w)) {
        return Err(ProcessError::WeightOutOfRange(i));
    }
    for y in [y2, y3] {
        if let Some(n) = absorption_violation(y, tree) {
            return Err(ProcessError::NotAbsorbing(n));
        }
    }
    let mut values = y1.values.clone();
    for m in tree.nodes() {
        if tree.time(m) < s {
            continue;
        }
        let n = tree.ancestor_at(m, s).unwrap();
        let w = &h[tree.slot(n)];
        let mix = w * increment_unchecked(y2, tree, s, m)
            + (Rational::one() - w) * increment_unchecked(y3, tree, s, m);
        values[m.0] = y1.get(n) * mix;
    }
    let out = AdaptedProcess { values };
    if [y1, y2, y3].iter().all(|y| in_s1(y, tree)) {
        assert!(in_s1(&out, tree), "fork splice left S_1");
    }
    Ok(out)
}

/// Finite set of generators standing for its solid, fork-convex, closed hull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSet {
    tree: EventTree,
    generators: Vec<AdaptedProcess>,
    far_reaching: bool,
}

impl ProcessSet {
    pub fn new(tree: EventTree, generators: Vec<AdaptedProcess>) -> Result<Self, ProcessError> {
        if generators.is_empty() {
            return Err(ProcessError::NoGenerators);
        }
        for g in &generators {
            if g.len() != tree.len() {
                return Err(ProcessError::LengthMismatch {
                    expected: tree.len(),
                    found: g.len(),
                });
            }
        }
        // The hull mixes generators at time 0, so it holds an element that is
        // positive at the horizon iff every leaf is charged by some generator.
        let far_reaching = tree
            .leaves()
            .iter()
            .all(|&l| generators.iter().any(|g| g.get(NodeId(l)).is_positive()));
        Ok(ProcessSet {
            tree,
            generators,
            far_reaching,
        })
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn generators(&self) -> &[AdaptedProcess] {
        &self.generators
    }

    pub fn is_far_reaching(&self) -> bool {
        self.far_reaching
    }

    /// Whether one single generator is positive at every leaf.
    pub fn has_positive_generator(&self) -> bool {
        self.generators.iter().any(|g| {
            self.tree
                .leaves()
                .iter()
                .all(|&l| g.get(NodeId(l)).is_positive())
        })
    }

    /// Errors unless every generator lies in `S_1`.
    pub fn check_s1(&self) -> Result<(), ProcessError> {
        match self.generators.iter().position(|g| !in_s1(g, &self.tree)) {
            Some(i) => Err(ProcessError::NotInS1(i)),
            None => Ok(()),
        }
    }

    /// Largest root value among the generators.
    pub fn max_root_value(&self) -> Rational {
        self.generators
            .iter()
            .map(|g| g.root_value(&self.tree).clone())
            .max()
            .unwrap()
    }
}

/// Construction of a hull element from the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullTrace {
    Generator(usize),
    Multiply {
        inner: Box<HullTrace>,
        b: Vec<Rational>,
    },
    Splice {
        y1: Box<HullTrace>,
        y2: Box<HullTrace>,
        y3: Box<HullTrace>,
        s: usize,
        h: Vec<Rational>,
    },
}

impl HullTrace {
    /// Re-evaluates the construction.
    pub fn replay(&self, c: &ProcessSet) -> Result<AdaptedProcess, ProcessError> {
        let tree = c.tree();
        match self {
            HullTrace::Generator(i) => Ok(c.generators()[*i].clone()),
            HullTrace::Multiply { inner, b } => {
                let y = inner.replay(c)?;
                let b = NonIncreasingProcess::new(tree, AdaptedProcess::new(tree, b.clone())?)?;
                Ok(solid_multiply(&y, &b, tree))
            }
            HullTrace::Splice { y1, y2, y3, s, h } => {
                fork_splice(tree, &y1.replay(c)?, &y2.replay(c)?, &y3.replay(c)?, *s, h)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            HullTrace::Generator(_) => 0,
            HullTrace::Multiply { inner, .. } => 1 + inner.depth(),
            HullTrace::Splice { y1, y2, y3, .. } => 1 + y1.depth().max(y2.depth()).max(y3.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullSample {
    pub process: AdaptedProcess,
    pub trace: HullTrace,
}

/// Random element of `V` on `tree`.
pub fn random_nonincreasing<R: Rng>(rng: &mut R, tree: &EventTree) -> NonIncreasingProcess {
    let mut values = vec![Rational::zero(); tree.len()];
    for t in 0..=tree.horizon() {
        for &v in tree.nodes_at(t) {
            let n = NodeId(v);
            let cap = match tree.parent(n) {
                Some(p) => values[p.0].clone(),
                None => Rational::one(),
            };
            values[v] = if rng.random_bool(0.5) {
                cap
            } else {
                cap * crate::fuzz::unit(rng)
            };
        }
    }
    NonIncreasingProcess(AdaptedProcess { values })
}

/// Random weights in `[0, 1]`, one per time-`s` node.
pub fn random_splice_weight<R: Rng>(rng: &mut R, tree: &EventTree, s: usize) -> Vec<Rational> {
    (0..tree.nodes_at(s).len()).map(|_| crate::fuzz::unit(rng)).collect()
}

fn random_trace<R: Rng>(rng: &mut R, c: &ProcessSet, depth: usize) -> HullTrace {
    let k = c.generators().len();
    if depth == 0 {
        return HullTrace::Generator(rng.random_range(0..k));
    }
    let tree = c.tree();
    if rng.random_bool(0.3) {
        let b = random_nonincreasing(rng, tree).0.values;
        HullTrace::Multiply {
            inner: Box::new(random_trace(rng, c, depth - 1)),
            b,
        }
    } else {
        let s = rng.random_range(0..=tree.horizon());
        let h = random_splice_weight(rng, tree, s);
        let y1 = random_trace(rng, c, depth - 1);
        let d2 = rng.random_range(0..depth);
        let y2 = random_trace(rng, c, d2);
        let d3 = rng.random_range(0..depth);
        let y3 = random_trace(rng, c, d3);
        HullTrace::Splice {
            y1: Box::new(y1),
            y2: Box::new(y2),
            y3: Box::new(y3),
            s,
            h,
        }
    }
}

/// Samples the hull by composing splices and solid multiplications of
/// generators, `depth` levels deep. The trace replays to the same element.
pub fn random_hull_element(c: &ProcessSet, depth: usize, seed: u64) -> Result<HullSample, ProcessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = random_trace(&mut rng, c, depth);
    let process = trace.replay(c)?;
    Ok(HullSample { process, trace })
}
