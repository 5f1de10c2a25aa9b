//! Finite filtered probability spaces as rooted event trees.
//!
//! A node at depth `t` is an atom of `F_t`; the terminal nodes are the
//! outcomes. Every one-step transition probability is strictly positive, so
//! the reference measure charges every path and "almost surely" statements
//! are plain pointwise ones.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, sum};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Unvalidated description of one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub label: Option<String>,
    pub parent: Option<usize>,
    /// One-step probability from the parent. Ignored for the root.
    pub prob: Option<Rational>,
    /// Optional declared time; checked against the depth when present.
    pub time: Option<usize>,
}

impl NodeSpec {
    pub fn root() -> Self {
        NodeSpec {
            label: None,
            parent: None,
            prob: None,
            time: None,
        }
    }

    pub fn child(parent: usize, prob: Rational) -> Self {
        NodeSpec {
            label: None,
            parent: Some(parent),
            prob: Some(prob),
            time: None,
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeSpec {
    pub nodes: Vec<NodeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    NoRoot,
    MultipleRoots(Vec<usize>),
    ParentOutOfRange { node: usize, parent: usize },
    /// The node cannot be reached from the root by following parents.
    Unreachable { node: usize },
    TimeMismatch { node: usize, declared: usize, depth: usize },
    MissingProbability { node: usize },
    NonPositiveProbability { node: usize },
    ProbabilityAboveOne { node: usize },
    ChildrenSum { node: usize, sum: Rational },
    ShortBranch { node: usize, depth: usize, horizon: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "tree has no nodes"),
            Violation::NoRoot => write!(f, "no root node"),
            Violation::MultipleRoots(r) => write!(f, "multiple roots {r:?}"),
            Violation::ParentOutOfRange { node, parent } => {
                write!(f, "node {node}: parent {parent} does not exist")
            }
            Violation::Unreachable { node } => write!(f, "node {node}: not reachable from the root"),
            Violation::TimeMismatch {
                node,
                declared,
                depth,
            } => write!(f, "node {node}: declared time {declared} but depth {depth}"),
            Violation::MissingProbability { node } => {
                write!(f, "node {node}: missing transition probability")
            }
            Violation::NonPositiveProbability { node } => {
                write!(f, "node {node}: non-equivalent measure (probability must be > 0)")
            }
            Violation::ProbabilityAboveOne { node } => {
                write!(f, "node {node}: transition probability exceeds 1")
            }
            Violation::ChildrenSum { node, sum } => write!(
                f,
                "node {node}: children probabilities sum to {}",
                format_rational(sum)
            ),
            Violation::ShortBranch {
                node,
                depth,
                horizon,
            } => write!(f, "node {node}: terminal at time {depth} before horizon {horizon}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("invalid event tree: {0}")]
    Invalid(ValidationReport),
    #[error("time {t} outside 0..={horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },
    #[error("node {0} is terminal")]
    TerminalNode(NodeId),
    #[error("no value given for child {0}")]
    MissingChildValue(NodeId),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
}

/// Checks every structural and probabilistic invariant of an event tree.
/// Violations are returned as data; nothing here fails.
pub fn validate_tree(spec: &TreeSpec) -> ValidationReport {
    let n = spec.nodes.len();
    let mut violations = Vec::new();
    if n == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }
    let roots: Vec<usize> = (0..n).filter(|&i| spec.nodes[i].parent.is_none()).collect();
    match roots.len() {
        0 => violations.push(Violation::NoRoot),
        1 => {}
        _ => violations.push(Violation::MultipleRoots(roots.clone())),
    }
    let mut children = vec![Vec::new(); n];
    for (i, node) in spec.nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            if p >= n {
                violations.push(Violation::ParentOutOfRange { node: i, parent: p });
            } else {
                children[p].push(i);
            }
        }
    }
    // Depth by walking down from the root; anything left over sits on a cycle
    // or hangs off a broken parent.
    let mut depth = vec![None; n];
    if let Some(&r) = roots.first() {
        depth[r] = Some(0usize);
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                if depth[c].is_none() {
                    depth[c] = Some(depth[v].unwrap() + 1);
                    stack.push(c);
                }
            }
        }
    }
    for (i, d) in depth.iter().enumerate() {
        if d.is_none() && !roots.contains(&i) {
            violations.push(Violation::Unreachable { node: i });
        }
    }
    for (i, node) in spec.nodes.iter().enumerate() {
        if let (Some(declared), Some(d)) = (node.time, depth[i]) {
            if declared != d {
                violations.push(Violation::TimeMismatch {
                    node: i,
                    declared,
                    depth: d,
                });
            }
        }
        if node.parent.is_none() {
            continue;
        }
        match &node.prob {
            None => violations.push(Violation::MissingProbability { node: i }),
            Some(p) if !p.is_positive() => {
                violations.push(Violation::NonPositiveProbability { node: i })
            }
            Some(p) if p > &Rational::one() => {
                violations.push(Violation::ProbabilityAboveOne { node: i })
            }
            _ => {}
        }
    }
    for (i, ch) in children.iter().enumerate() {
        if ch.is_empty() {
            continue;
        }
        let total = ch.iter().fold(Rational::zero(), |acc, &c| {
            acc + spec.nodes[c].prob.clone().unwrap_or_else(Rational::zero)
        });
        if !total.is_one() {
            violations.push(Violation::ChildrenSum { node: i, sum: total });
        }
    }
    let horizon = depth.iter().flatten().copied().max().unwrap_or(0);
    for i in 0..n {
        if let Some(d) = depth[i] {
            if children[i].is_empty() && d != horizon {
                violations.push(Violation::ShortBranch {
                    node: i,
                    depth: d,
                    horizon,
                });
            }
        }
    }
    ValidationReport { violations }
}

/// Path probabilities of every node (the reference measure restricted to
/// each `F_t`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMeasure {
    pub path_prob: Vec<Rational>,
}

/// A node at time `t` together with the terminal nodes below it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub node: NodeId,
    pub leaves: Vec<NodeId>,
}

/// A validated event tree. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTree {
    labels: Vec<Option<String>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    time: Vec<usize>,
    one_step: Vec<Rational>,
    measure: NodeMeasure,
    by_time: Vec<Vec<usize>>,
    root: usize,
    /// Position of each node inside `by_time[time]`.
    slot: Vec<usize>,
}

impl EventTree {
    pub fn new(spec: TreeSpec) -> Result<Self, TreeError> {
        let report = validate_tree(&spec);
        if !report.is_ok() {
            return Err(TreeError::Invalid(report));
        }
        let n = spec.nodes.len();
        let root = spec.nodes.iter().position(|s| s.parent.is_none()).unwrap();
        let mut children = vec![Vec::new(); n];
        for (i, s) in spec.nodes.iter().enumerate() {
            if let Some(p) = s.parent {
                children[p].push(i);
            }
        }
        let mut time = vec![0usize; n];
        let mut path_prob = vec![Rational::zero(); n];
        let mut one_step = vec![Rational::one(); n];
        path_prob[root] = Rational::one();
        // Breadth-first, so parents are finished before their children.
        let mut order = vec![root];
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            for &c in &children[v] {
                time[c] = time[v] + 1;
                one_step[c] = spec.nodes[c].prob.clone().unwrap();
                path_prob[c] = &path_prob[v] * &one_step[c];
                order.push(c);
            }
            k += 1;
        }
        let horizon = *time.iter().max().unwrap();
        let mut by_time = vec![Vec::new(); horizon + 1];
        let mut slot = vec![0; n];
        for v in 0..n {
            slot[v] = by_time[time[v]].len();
            by_time[time[v]].push(v);
        }
        Ok(EventTree {
            labels: spec.nodes.iter().map(|s| s.label.clone()).collect(),
            parent: spec.nodes.iter().map(|s| s.parent).collect(),
            children,
            time,
            one_step,
            measure: NodeMeasure { path_prob },
            by_time,
            root,
            slot,
        })
    }

    /// Tree with the given branching per level; every non-terminal node at
    /// depth `t` gets `probs[t].len()` children with those probabilities.
    pub fn uniform_levels(probs: &[Vec<Rational>]) -> Result<Self, TreeError> {
        let mut nodes = vec![NodeSpec::root()];
        let mut frontier = vec![0usize];
        for level in probs {
            let mut next = Vec::new();
            for &p in &frontier {
                for q in level {
                    nodes.push(NodeSpec::child(p, q.clone()));
                    next.push(nodes.len() - 1);
                }
            }
            frontier = next;
        }
        EventTree::new(TreeSpec { nodes })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.root)
    }

    pub fn horizon(&self) -> usize {
        self.by_time.len() - 1
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.0 < self.len()
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent[n.0].map(NodeId)
    }

    pub fn children(&self, n: NodeId) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.children[n.0].iter().map(|&c| NodeId(c))
    }

    pub fn child_ids(&self, n: NodeId) -> &[usize] {
        &self.children[n.0]
    }

    pub fn is_terminal(&self, n: NodeId) -> bool {
        self.children[n.0].is_empty()
    }

    pub fn time(&self, n: NodeId) -> usize {
        self.time[n.0]
    }

    pub fn label(&self, n: NodeId) -> Option<&str> {
        self.labels[n.0].as_deref()
    }

    pub fn find_label(&self, label: &str) -> Option<NodeId> {
        self.labels
            .iter()
            .position(|l| l.as_deref() == Some(label))
            .map(NodeId)
    }

    /// Display name: the label when present, otherwise `n<index>`.
    pub fn name(&self, n: NodeId) -> String {
        self.label(n).map_or_else(|| n.to_string(), str::to_owned)
    }

    /// One-step probability of reaching `n` from its parent (1 for the root).
    pub fn one_step_prob(&self, n: NodeId) -> &Rational {
        &self.one_step[n.0]
    }

    pub fn path_prob(&self, n: NodeId) -> &Rational {
        &self.measure.path_prob[n.0]
    }

    pub fn measure(&self) -> &NodeMeasure {
        &self.measure
    }

    pub fn nodes_at(&self, t: usize) -> &[usize] {
        &self.by_time[t]
    }

    /// Position of `n` among the nodes at its own time.
    pub fn slot(&self, n: NodeId) -> usize {
        self.slot[n.0]
    }

    pub fn non_terminal(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| !self.is_terminal(n))
    }

    pub fn leaves(&self) -> &[usize] {
        &self.by_time[self.horizon()]
    }

    pub fn ancestor_at(&self, mut n: NodeId, t: usize) -> Option<NodeId> {
        if t > self.time(n) {
            return None;
        }
        while self.time(n) > t {
            n = self.parent(n)?;
        }
        Some(n)
    }

    /// Strict descendants of `n`.
    pub fn descendants(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.children[n.0].clone();
        while let Some(v) = stack.pop() {
            out.push(NodeId(v));
            stack.extend(self.children[v].iter().copied());
        }
        out.sort();
        out
    }

    pub fn leaves_below(&self, n: NodeId) -> Vec<NodeId> {
        if self.is_terminal(n) {
            return vec![n];
        }
        self.descendants(n)
            .into_iter()
            .filter(|&d| self.is_terminal(d))
            .collect()
    }

    /// Atoms of `F_t`: one per node at time `t`, each with its terminal nodes.
    pub fn atoms_at_time(&self, t: usize) -> Result<Vec<Atom>, TreeError> {
        if t > self.horizon() {
            return Err(TreeError::TimeOutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        Ok(self.by_time[t]
            .iter()
            .map(|&v| Atom {
                node: NodeId(v),
                leaves: self.leaves_below(NodeId(v)),
            })
            .collect())
    }

    /// `sum_children p(c) * values[c]` for a partial association of values.
    pub fn cond_exp_one_step(
        &self,
        node: NodeId,
        values: &BTreeMap<NodeId, Rational>,
    ) -> Result<Rational, TreeError> {
        if !self.contains(node) {
            return Err(TreeError::UnknownNode(node));
        }
        if self.is_terminal(node) {
            return Err(TreeError::TerminalNode(node));
        }
        let mut acc = Rational::zero();
        for c in self.children(node) {
            let v = values.get(&c).ok_or(TreeError::MissingChildValue(c))?;
            acc += self.one_step_prob(c) * v;
        }
        Ok(acc)
    }

    /// One-step conditional expectation of a full node-indexed process.
    /// `node` must be non-terminal.
    pub fn expect_children(&self, node: NodeId, values: &[Rational]) -> Rational {
        debug_assert!(!self.is_terminal(node));
        self.children[node.0]
            .iter()
            .fold(Rational::zero(), |acc, &c| acc + &self.one_step[c] * &values[c])
    }

    /// Outcomes at time `t` as a finite probability space (path probabilities).
    pub fn space_at(&self, t: usize) -> FiniteSpace {
        FiniteSpace {
            probs: self.by_time[t]
                .iter()
                .map(|&v| self.measure.path_prob[v].clone())
                .collect(),
        }
    }

    pub fn terminal_space(&self) -> FiniteSpace {
        self.space_at(self.horizon())
    }

    /// Partition of the time-`t+1` nodes by their time-`t` parent, i.e. `F_t`
    /// seen on `F_{t+1}`-outcomes. Block order follows `nodes_at(t)`.
    pub fn step_partition(&self, t: usize) -> Partition {
        let blocks = self.by_time[t]
            .iter()
            .map(|&v| self.children[v].iter().map(|&c| self.slot[c]).collect())
            .collect();
        Partition {
            ground: self.by_time[t + 1].len(),
            blocks,
        }
    }

    /// Partition of the terminal nodes by their ancestor at time `t`.
    pub fn terminal_partition(&self, t: usize) -> Result<Partition, TreeError> {
        let atoms = self.atoms_at_time(t)?;
        Ok(Partition {
            ground: self.leaves().len(),
            blocks: atoms
                .into_iter()
                .map(|a| a.leaves.into_iter().map(|l| self.slot[l.0]).collect())
                .collect(),
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("probability space has no outcomes")]
    Empty,
    #[error("outcome {0} has non-positive probability")]
    NonPositive(usize),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("outcome {0} lies in more than one block")]
    Overlap(usize),
    #[error("outcome {0} is not covered by any block")]
    Uncovered(usize),
    #[error("outcome {index} outside a ground set of size {size}")]
    OutOfRange { index: usize, size: usize },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Finitely many outcomes, each with strictly positive probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    probs: Vec<Rational>,
}

impl FiniteSpace {
    pub fn new(probs: Vec<Rational>) -> Result<Self, SpaceError> {
        if probs.is_empty() {
            return Err(SpaceError::Empty);
        }
        if let Some(i) = probs.iter().position(|p| !p.is_positive()) {
            return Err(SpaceError::NonPositive(i));
        }
        let total = sum(&probs);
        if !total.is_one() {
            return Err(SpaceError::NotNormalized(format_rational(&total)));
        }
        Ok(FiniteSpace { probs })
    }

    pub fn uniform(n: usize) -> Self {
        let p = Rational::new(1.into(), (n as i64).into());
        FiniteSpace {
            probs: vec![p; n],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, i: usize) -> &Rational {
        &self.probs[i]
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn expectation(&self, values: &[Rational]) -> Rational {
        self.probs
            .iter()
            .zip(values)
            .fold(Rational::zero(), |acc, (p, v)| acc + p * v)
    }

    pub fn block_prob(&self, block: &[usize]) -> Rational {
        block.iter().fold(Rational::zero(), |acc, &i| acc + &self.probs[i])
    }
}

/// A partition of `0..ground` into disjoint nonempty blocks: a finite
/// sub-sigma-algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    ground: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(ground: usize, blocks: Vec<Vec<usize>>) -> Result<Self, SpaceError> {
        let mut owner = vec![None; ground];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(SpaceError::EmptyBlock(b));
            }
            for &i in block {
                if i >= ground {
                    return Err(SpaceError::OutOfRange { index: i, size: ground });
                }
                if owner[i].replace(b).is_some() {
                    return Err(SpaceError::Overlap(i));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(SpaceError::Uncovered(i));
        }
        Ok(Partition { ground, blocks })
    }

    pub fn trivial(ground: usize) -> Self {
        Partition {
            ground,
            blocks: vec![(0..ground).collect()],
        }
    }

    pub fn discrete(ground: usize) -> Self {
        Partition {
            ground,
            blocks: (0..ground).map(|i| vec![i]).collect(),
        }
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&i)).unwrap()
    }

    /// Whether `values` is constant on every block (measurable for this
    /// partition).
    pub fn is_measurable(&self, values: &[Rational]) -> bool {
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&i| values[i] == values[b[0]]))
    }

    /// Whether every block of `self` sits inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.ground == coarser.ground
            && self.blocks.iter().all(|b| {
                let owner = coarser.block_of(b[0]);
                b.iter().all(|&i| coarser.block_of(i) == owner)
            })
    }
}

/// Conditional expectation onto a partition: on each block `B`,
/// `sum_{w in B} P(w) v(w) / P(B)`.
pub fn cond_exp_partition(
    space: &FiniteSpace,
    values: &[Rational],
    partition: &Partition,
) -> Result<Vec<Rational>, SpaceError> {
    if values.len() != space.len() || partition.ground() != space.len() {
        return Err(SpaceError::LengthMismatch {
            expected: space.len(),
            found: if values.len() != space.len() {
                values.len()
            } else {
                partition.ground()
            },
        });
    }
    let mut out = vec![Rational::zero(); values.len()];
    for block in partition.blocks() {
        let mass = space.block_prob(block);
        let weighted = block
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + space.prob(i) * &values[i]);
        let avg = weighted / mass;
        for &i in block {
            out[i] = avg.clone();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn binary(depth: usize) -> EventTree {
        EventTree::uniform_levels(&vec![vec![rat(1, 2), rat(1, 2)]; depth]).unwrap()
    }

    #[test]
    fn one_step_binary_tree_is_valid() {
        let spec = TreeSpec {
            nodes: vec![
                NodeSpec::root(),
                NodeSpec::child(0, rat(1, 2)),
                NodeSpec::child(0, rat(1, 2)),
            ],
        };
        assert!(validate_tree(&spec).is_ok());
    }

    #[test]
    fn children_summing_to_three_quarters_is_reported() {
        let spec = TreeSpec {
            nodes: vec![
                NodeSpec::root(),
                NodeSpec::child(0, rat(1, 2)),
                NodeSpec::child(0, rat(1, 4)),
            ],
        };
        let report = validate_tree(&spec);
        assert_eq!(
            report.violations,
            vec![Violation::ChildrenSum {
                node: 0,
                sum: rat(3, 4)
            }]
        );
        assert!(matches!(EventTree::new(spec), Err(TreeError::Invalid(_))));
    }

    #[test]
    fn zero_probability_child_is_non_equivalent() {
        let spec = TreeSpec {
            nodes: vec![
                NodeSpec::root(),
                NodeSpec::child(0, int(1)),
                NodeSpec::child(0, int(0)),
            ],
        };
        let report = validate_tree(&spec);
        assert!(report
            .violations
            .contains(&Violation::NonPositiveProbability { node: 2 }));
        assert!(report.to_string().contains("non-equivalent measure"));
    }

    #[test]
    fn structural_violations() {
        let two_roots = TreeSpec {
            nodes: vec![NodeSpec::root(), NodeSpec::root()],
        };
        assert!(matches!(
            validate_tree(&two_roots).violations[0],
            Violation::MultipleRoots(_)
        ));
        let short = TreeSpec {
            nodes: vec![
                NodeSpec::root(),
                NodeSpec::child(0, rat(1, 2)),
                NodeSpec::child(0, rat(1, 2)),
                NodeSpec::child(1, int(1)),
            ],
        };
        assert_eq!(
            validate_tree(&short).violations,
            vec![Violation::ShortBranch {
                node: 2,
                depth: 1,
                horizon: 2
            }]
        );
        let mut bad_time = TreeSpec {
            nodes: vec![NodeSpec::root(), NodeSpec::child(0, int(1))],
        };
        bad_time.nodes[1].time = Some(2);
        assert!(matches!(
            validate_tree(&bad_time).violations[0],
            Violation::TimeMismatch { .. }
        ));
        let cycle = TreeSpec {
            nodes: vec![
                NodeSpec::root(),
                NodeSpec::child(2, int(1)),
                NodeSpec::child(1, int(1)),
            ],
        };
        assert!(validate_tree(&cycle)
            .violations
            .contains(&Violation::Unreachable { node: 1 }));
    }

    #[test]
    fn atoms() {
        let t = binary(2);
        let a0 = t.atoms_at_time(0).unwrap();
        assert_eq!(a0.len(), 1);
        assert_eq!(a0[0].leaves.len(), 4);
        let a1 = t.atoms_at_time(1).unwrap();
        assert_eq!(a1.len(), 2);
        assert!(a1.iter().all(|a| a.leaves.len() == 2));
        let a2 = t.atoms_at_time(2).unwrap();
        assert!(a2.iter().all(|a| a.leaves == vec![a.node]));
        assert!(matches!(
            t.atoms_at_time(3),
            Err(TreeError::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn atoms_refine_over_time() {
        let t = EventTree::uniform_levels(&[
            vec![rat(1, 3), rat(2, 3)],
            vec![rat(1, 3), rat(1, 3), rat(1, 3)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        for s in 0..=t.horizon() {
            for u in s..=t.horizon() {
                let fine = t.terminal_partition(u).unwrap();
                let coarse = t.terminal_partition(s).unwrap();
                assert!(fine.refines(&coarse));
            }
        }
    }

    #[test]
    fn one_step_expectation() {
        let check = |probs: Vec<Rational>, vals: Vec<i64>, want: Rational| {
            let t = EventTree::uniform_levels(&[probs]).unwrap();
            let map: BTreeMap<_, _> = t
                .children(t.root())
                .zip(vals)
                .map(|(c, v)| (c, int(v)))
                .collect();
            assert_eq!(t.cond_exp_one_step(t.root(), &map).unwrap(), want);
        };
        check(vec![rat(1, 2), rat(1, 2)], vec![2, 0], int(1));
        check(vec![rat(1, 3), rat(2, 3)], vec![3, 3], int(3));
        check(vec![rat(1, 3), rat(1, 3), rat(1, 3)], vec![3, 0, 0], int(1));
    }

    #[test]
    fn one_step_expectation_errors() {
        let t = binary(1);
        let mut map = BTreeMap::new();
        map.insert(NodeId(1), int(1));
        assert_eq!(
            t.cond_exp_one_step(t.root(), &map),
            Err(TreeError::MissingChildValue(NodeId(2)))
        );
        assert_eq!(
            t.cond_exp_one_step(NodeId(1), &map),
            Err(TreeError::TerminalNode(NodeId(1)))
        );
    }

    #[test]
    fn partition_expectation_examples() {
        let space = FiniteSpace::uniform(4);
        let g = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let fixed = vec![int(1), int(1), int(2), int(2)];
        assert_eq!(cond_exp_partition(&space, &fixed, &g).unwrap(), fixed);
        let spike = vec![int(2), int(0), int(0), int(0)];
        assert_eq!(
            cond_exp_partition(&space, &spike, &g).unwrap(),
            vec![int(1), int(1), int(0), int(0)]
        );
        let triv = Partition::trivial(4);
        let f = vec![int(1), int(3), int(0), int(4)];
        assert_eq!(
            cond_exp_partition(&space, &f, &triv).unwrap(),
            vec![int(2); 4]
        );
    }

    #[test]
    fn tower_property_is_exact() {
        let space = FiniteSpace::new(vec![rat(1, 6), rat(1, 3), rat(1, 12), rat(5, 12)]).unwrap();
        let fine = Partition::new(4, vec![vec![0, 1], vec![2], vec![3]]).unwrap();
        let coarse = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let f = vec![rat(7, 3), int(0), rat(5, 2), int(9)];
        let direct = cond_exp_partition(&space, &f, &coarse).unwrap();
        let nested = cond_exp_partition(
            &space,
            &cond_exp_partition(&space, &f, &fine).unwrap(),
            &coarse,
        )
        .unwrap();
        assert_eq!(direct, nested);
        assert_eq!(space.expectation(&direct), space.expectation(&f));
    }

    #[test]
    fn partition_invariants() {
        assert_eq!(
            Partition::new(3, vec![vec![0], vec![1]]),
            Err(SpaceError::Uncovered(2))
        );
        assert_eq!(
            Partition::new(2, vec![vec![0, 1], vec![1]]),
            Err(SpaceError::Overlap(1))
        );
        assert_eq!(
            Partition::new(2, vec![vec![0, 1], vec![]]),
            Err(SpaceError::EmptyBlock(1))
        );
        assert!(FiniteSpace::new(vec![rat(1, 2), rat(1, 3)]).is_err());
    }

    #[test]
    fn path_probabilities_are_consistent() {
        let t = EventTree::uniform_levels(&[
            vec![rat(1, 4), rat(3, 4)],
            vec![rat(1, 3), rat(1, 3), rat(1, 3)],
        ])
        .unwrap();
        for n in t.non_terminal() {
            let below = t
                .children(n)
                .fold(Rational::zero(), |acc, c| acc + t.path_prob(c));
            assert_eq!(&below, t.path_prob(n));
        }
        assert_eq!(sum(t.terminal_space().probs()), int(1));
        assert_eq!(t.path_prob(t.root()), &int(1));
    }
}
