//! Seeded random instances and probe generators for the randomized suites.
//!
//! Size caps: at most 6 outcomes, 3 blocks, 4 generators; trees of depth at
//! most 3 and branching at most 3 with at most 6 leaves; at most 2 assets.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::conditional::{gauge_on_block, RandomVariable, RvSet};
use crate::lp::{self, LpProblem, Sense};
use crate::market::{ConsumptionDensity, Market};
use crate::polar::{polar_constraints, FbtProbe};
use crate::process::{random_hull_element, random_nonincreasing, solid_multiply, AdaptedProcess, ProcessSet};
use crate::rational::{int, rat};
use crate::tree::{EventTree, FiniteSpace, NodeId, NodeSpec, Partition, TreeSpec};
use crate::Rational;

pub const MAX_OUTCOMES: usize = 6;
pub const MAX_BLOCKS: usize = 3;
pub const MAX_GENERATORS: usize = 4;
pub const MAX_ASSETS: usize = 2;

/// Step added to a boundary probe to push it outside.
pub fn default_bump() -> Rational {
    rat(1, 1000)
}

/// Uniform on `{0, 1/d, ..., max_num/d}` for a random `d` in `1..=4`.
pub fn small_nonneg<R: Rng>(rng: &mut R, max_num: i64) -> Rational {
    rat(rng.random_range(0..=max_num), rng.random_range(1..=4))
}

pub fn small_pos<R: Rng>(rng: &mut R, max_num: i64) -> Rational {
    rat(rng.random_range(1..=max_num), rng.random_range(1..=4))
}

/// A value in `[0, 1]` with small denominator.
pub fn unit<R: Rng>(rng: &mut R) -> Rational {
    let d = rng.random_range(1..=6);
    rat(rng.random_range(0..=d), d)
}

/// Strictly positive weights summing to 1.
pub fn random_probs<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| rat(x, total)).collect()
}

pub fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Partition {
    let k = rng.random_range(1..=MAX_BLOCKS.min(n));
    let mut owner: Vec<usize> = (0..n).map(|i| i % k).collect();
    owner.shuffle(rng);
    let blocks = (0..k)
        .map(|b| (0..n).filter(|&i| owner[i] == b).collect())
        .collect();
    Partition::new(n, blocks).expect("every block index is used")
}

fn random_generator<R: Rng>(rng: &mut R, n: usize) -> RandomVariable {
    let values = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                Rational::zero()
            } else {
                small_pos(rng, 4)
            }
        })
        .collect();
    RandomVariable::new(values).unwrap()
}

pub fn random_rv_set<R: Rng>(rng: &mut R) -> RvSet {
    let n = rng.random_range(1..=MAX_OUTCOMES);
    let space = FiniteSpace::new(random_probs(rng, n)).unwrap();
    let partition = random_partition(rng, n);
    let k = rng.random_range(1..=MAX_GENERATORS);
    let generators = (0..k).map(|_| random_generator(rng, n)).collect();
    RvSet::new(space, partition, generators).unwrap()
}

/// Block-constant weight with values in `[0, 1]`.
pub fn random_block_weight<R: Rng>(rng: &mut R, partition: &Partition) -> Vec<Rational> {
    let mut h = vec![Rational::zero(); partition.ground()];
    for block in partition.blocks() {
        let v = unit(rng);
        for &i in block {
            h[i] = v.clone();
        }
    }
    h
}

/// Pointwise `x * u` for random `u` in `[0, 1]`.
pub fn random_shrink<R: Rng>(rng: &mut R, x: &RandomVariable) -> RandomVariable {
    RandomVariable::new(x.values().iter().map(|v| v * unit(rng)).collect()).unwrap()
}

/// A random nonnegative vector scaled block by block onto the boundary of
/// the conditional polar.
pub fn random_polar_element<R: Rng>(rng: &mut R, c: &RvSet) -> Option<RandomVariable> {
    let n = c.len();
    let mut g: Vec<Rational> = (0..n).map(|_| small_nonneg(rng, 6)).collect();
    for block in c.partition().blocks() {
        let mass = c.space().block_prob(block);
        let worst = c
            .generators()
            .iter()
            .map(|f| {
                block
                    .iter()
                    .map(|&w| c.space().prob(w) * f.get(w) * &g[w])
                    .sum::<Rational>()
            })
            .max()
            .unwrap_or_else(Rational::zero);
        if worst > mass {
            let s = &mass / &worst;
            for &w in block {
                g[w] = &g[w] * &s;
            }
        }
    }
    RandomVariable::new(g).ok()
}

/// Per block, a random convex combination of the generators.
pub fn random_envelope_point<R: Rng>(rng: &mut R, c: &RvSet) -> RandomVariable {
    let mut values = vec![Rational::zero(); c.len()];
    let k = c.generators().len();
    for block in c.partition().blocks() {
        let w: Vec<i64> = (0..k).map(|_| rng.random_range(0..=3)).collect();
        let total: i64 = w.iter().sum::<i64>().max(1);
        let weights: Vec<Rational> = if w.iter().all(|&x| x == 0) {
            (0..k).map(|i| if i == 0 { int(1) } else { int(0) }).collect()
        } else {
            w.iter().map(|&x| rat(x, total)).collect()
        };
        for &o in block {
            values[o] = c
                .generators()
                .iter()
                .zip(&weights)
                .map(|(f, l)| f.get(o) * l)
                .sum();
        }
    }
    RandomVariable::new(values).unwrap()
}

/// Element of the hull: an envelope point shrunk pointwise.
pub fn random_hull_rv<R: Rng>(rng: &mut R, c: &RvSet) -> RandomVariable {
    let e = random_envelope_point(rng, c);
    if rng.random_bool(0.5) {
        e
    } else {
        random_shrink(rng, &e)
    }
}

/// Element of `B_+(G)`.
pub fn random_unit_ball_element<R: Rng>(rng: &mut R, c: &RvSet) -> RandomVariable {
    let raw = random_block_weight(rng, c.partition());
    let scale = int(rng.random_range(1..=3));
    let raw: Vec<Rational> = raw.iter().map(|v| v * &scale).collect();
    let mean = c.space().expectation(&raw);
    let values = if mean > Rational::one() {
        raw.iter().map(|v| v / &mean).collect()
    } else {
        raw
    };
    RandomVariable::new(values).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Generator,
    Interior,
    Boundary,
    Exterior,
    Random,
}

/// At least ten probes: generators, shrunk envelope points, envelope points,
/// envelope points bumped by a small step at one outcome, and free draws.
pub fn cbt_probes<R: Rng>(rng: &mut R, c: &RvSet) -> Vec<(ProbeKind, RandomVariable)> {
    let mut out = Vec::new();
    let g = rng.random_range(0..c.generators().len());
    out.push((ProbeKind::Generator, c.generators()[g].clone()));
    for _ in 0..3 {
        let e = random_envelope_point(rng, c);
        out.push((ProbeKind::Interior, random_shrink(rng, &e)));
    }
    for _ in 0..3 {
        out.push((ProbeKind::Boundary, random_envelope_point(rng, c)));
    }
    for _ in 0..3 {
        let mut v = random_envelope_point(rng, c).into_values();
        let w = rng.random_range(0..v.len());
        v[w] += default_bump();
        out.push((ProbeKind::Exterior, RandomVariable::new(v).unwrap()));
    }
    let free = (0..c.len()).map(|_| small_nonneg(rng, 5)).collect();
    out.push((ProbeKind::Random, RandomVariable::new(free).unwrap()));
    out
}

/// Elements of `H^f` for `f` in the hull: on each block, `s_B f` with
/// `0 <= s_B <= 1 / gauge_B(f)`.
pub fn random_hf_family<R: Rng>(rng: &mut R, c: &RvSet, f: &RandomVariable) -> Vec<RandomVariable> {
    let count = rng.random_range(1..=3);
    let gauges: Vec<Option<Rational>> = c
        .partition()
        .blocks()
        .iter()
        .map(|b| gauge_on_block(f, c, b).expect("well-formed LP"))
        .collect();
    (0..count)
        .map(|_| {
            let mut v = vec![Rational::zero(); c.len()];
            for (block, gauge) in c.partition().blocks().iter().zip(&gauges) {
                let cap = match gauge {
                    Some(r) if !r.is_zero() => r.recip(),
                    _ => Rational::one(),
                };
                let s = cap * unit(rng);
                for &w in block {
                    v[w] = f.get(w) * &s;
                }
            }
            RandomVariable::new(v).unwrap()
        })
        .collect()
}

pub const MAX_DEPTH: usize = 3;
pub const MAX_BRANCHING: usize = 3;
pub const MAX_LEAVES: usize = 6;

/// Random event tree of depth `1..=3`, branching `1..=3` and at most six
/// leaves. Every node at depth `< T` has at least one child.
pub fn random_tree<R: Rng>(rng: &mut R) -> EventTree {
    let depth = rng.random_range(1..=MAX_DEPTH);
    let mut nodes = vec![NodeSpec::root()];
    let mut frontier = vec![0usize];
    for level in 0..depth {
        let remaining_levels = depth - level - 1;
        let mut next = Vec::new();
        for (i, &p) in frontier.iter().enumerate() {
            // Leave room so each later frontier node still gets a child.
            let later = frontier.len() - i - 1;
            let room = MAX_LEAVES - next.len() - later;
            let cap = if remaining_levels == 0 { room } else { room.min(MAX_BRANCHING) };
            let b = rng.random_range(1..=MAX_BRANCHING.min(cap).max(1));
            let probs = random_probs(rng, b);
            for q in probs {
                nodes.push(NodeSpec::child(p, q));
                next.push(nodes.len() - 1);
            }
        }
        frontier = next;
    }
    EventTree::new(TreeSpec { nodes }).expect("generated tree is valid")
}

/// Random element of `S_1`: at every node the children values average to
/// the parent value times a factor in `[0, 1]` (often exactly 1). Zeros are
/// absorbing by construction.
pub fn random_s1_process<R: Rng>(rng: &mut R, tree: &EventTree) -> AdaptedProcess {
    let mut values = vec![Rational::zero(); tree.len()];
    values[tree.root().0] = if rng.random_bool(0.5) { Rational::one() } else { small_pos(rng, 4).min(Rational::one()) };
    for t in 0..tree.horizon() {
        for &v in tree.nodes_at(t) {
            let n = NodeId(v);
            let children = tree.child_ids(n);
            if values[v].is_zero() {
                continue;
            }
            let mut w: Vec<Rational> = children
                .iter()
                .map(|_| if rng.random_bool(0.15) { Rational::zero() } else { small_pos(rng, 4) })
                .collect();
            if w.iter().all(Zero::is_zero) {
                w = vec![Rational::one(); children.len()];
            }
            let mean: Rational = children
                .iter()
                .zip(&w)
                .map(|(&c, x)| tree.one_step_prob(NodeId(c)) * x)
                .sum();
            let drift = if rng.random_bool(0.5) { Rational::one() } else { unit(rng) };
            let s = &values[v] * drift / mean;
            for (&c, x) in children.iter().zip(&w) {
                values[c] = x * &s;
            }
        }
    }
    AdaptedProcess::new(tree, values).unwrap()
}

/// Far-reaching set of one to four `S_1` generators on a random tree.
pub fn random_process_set<R: Rng>(rng: &mut R) -> ProcessSet {
    let tree = random_tree(rng);
    loop {
        let k = rng.random_range(1..=MAX_GENERATORS);
        let generators = (0..k).map(|_| random_s1_process(rng, &tree)).collect();
        let c = ProcessSet::new(tree.clone(), generators).unwrap();
        if c.is_far_reaching() {
            return c;
        }
    }
}

/// Polar element of `c` found by maximizing a random positive objective
/// over the polar; sometimes the midpoint of two such vertices.
pub fn lp_polar_element<R: Rng>(rng: &mut R, c: &ProcessSet) -> AdaptedProcess {
    let sys = polar_constraints(c);
    let vertex = |rng: &mut R| {
        let objective = (0..sys.num_vars).map(|_| small_pos(rng, 4)).collect();
        let out = lp::solve(&LpProblem::new(Sense::Maximize, objective, sys.clone()))
            .expect("polar LP is well formed");
        out.point().expect("0 is feasible").to_vec()
    };
    let a = vertex(rng);
    let values = if rng.random_bool(0.3) {
        let b = vertex(rng);
        a.iter().zip(&b).map(|(x, y)| (x + y) / int(2)).collect()
    } else {
        a
    };
    AdaptedProcess::new(c.tree(), values).unwrap()
}

/// Probes for the filtered bipolar comparison: a generator and hull samples
/// (known to be in), solid shrinks of hull samples (in), and probes of
/// unknown status: doubled roots, hull samples bumped at one node, and free
/// `S_1` draws.
pub fn fbt_probes<R: Rng>(rng: &mut R, c: &ProcessSet) -> Vec<FbtProbe> {
    let tree = c.tree();
    let mut out = Vec::new();
    let gi = rng.random_range(0..c.generators().len());
    out.push(FbtProbe {
        label: format!("generator {gi}"),
        process: c.generators()[gi].clone(),
        known_in: Some(true),
    });
    let mut hull = Vec::new();
    for _ in 0..3 {
        let depth = rng.random_range(1..=3);
        let sample = random_hull_element(c, depth, rng.random()).expect("generators are absorbing");
        hull.push(sample.process.clone());
        out.push(FbtProbe {
            label: format!("hull depth {depth}"),
            process: sample.process,
            known_in: Some(true),
        });
    }
    let b = random_nonincreasing(rng, tree);
    out.push(FbtProbe {
        label: "solid shrink".into(),
        process: solid_multiply(&hull[0], &b, tree),
        known_in: Some(true),
    });
    let root = tree.root();
    let g = &c.generators()[gi];
    out.push(FbtProbe {
        label: "doubled root".into(),
        process: g.with_value(root, g.get(root) * int(2)),
        known_in: None,
    });
    for (i, base) in hull.iter().enumerate() {
        let n = NodeId(rng.random_range(0..tree.len()));
        out.push(FbtProbe {
            label: format!("bumped hull {i} at {n}"),
            process: base.with_value(n, base.get(n) + default_bump()),
            known_in: None,
        });
    }
    out.push(FbtProbe {
        label: "free S_1 draw".into(),
        process: random_s1_process(rng, tree),
        known_in: None,
    });
    out
}

/// Random arbitrage-free market with one or two assets: prices move by
/// positive factors normalised to average 1 under hidden positive weights.
pub fn random_market<R: Rng>(rng: &mut R) -> Market {
    let tree = random_tree(rng);
    let d = rng.random_range(1..=MAX_ASSETS);
    let mut hidden = vec![Rational::one(); tree.len()];
    for n in tree.non_terminal() {
        let children: Vec<NodeId> = tree.children(n).collect();
        for (c, q) in children.iter().zip(random_probs(rng, children.len())) {
            hidden[c.0] = q;
        }
    }
    let prices = (0..d)
        .map(|_| {
            let mut s = vec![Rational::zero(); tree.len()];
            s[tree.root().0] = int(rng.random_range(1..=4));
            for t in 0..tree.horizon() {
                for &v in tree.nodes_at(t) {
                    let n = NodeId(v);
                    let children: Vec<NodeId> = tree.children(n).collect();
                    let factors: Vec<Rational> = children.iter().map(|_| int(rng.random_range(1..=4))).collect();
                    let mean: Rational = children.iter().zip(&factors).map(|(c, f)| &hidden[c.0] * f).sum();
                    for (c, f) in children.iter().zip(&factors) {
                        s[c.0] = &s[v] * f / &mean;
                    }
                }
            }
            AdaptedProcess::new(&tree, s).expect("prices are positive")
        })
        .collect();
    Market::new(tree, prices).expect("hidden weights are a martingale measure")
}

/// Random nonnegative consumption rate with random time weights.
pub fn random_consumption_density<R: Rng>(rng: &mut R, tree: &EventTree) -> ConsumptionDensity {
    let density = AdaptedProcess::new(tree, tree.nodes().map(|_| small_nonneg(rng, 4)).collect()).unwrap();
    let weights = if rng.random_bool(0.5) {
        let mut w = vec![Rational::zero(); tree.horizon() + 1];
        w[tree.horizon()] = Rational::one();
        w
    } else {
        let raw: Vec<i64> = (0..=tree.horizon()).map(|_| rng.random_range(0..=3)).collect();
        let total: i64 = raw.iter().sum::<i64>().max(1);
        let mut w: Vec<Rational> = raw.into_iter().map(|x| rat(x, total)).collect();
        if w.iter().all(Zero::is_zero) {
            w[tree.horizon()] = Rational::one();
        }
        w
    };
    ConsumptionDensity::new(tree, density, weights).unwrap()
}
