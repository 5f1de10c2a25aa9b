//! Process polars and the two bipolar membership oracles.
//!
//! The polar of a generator set is kept as an H-representation over one
//! variable per node. The first bipolar oracle quantifies over that polar
//! with one LP per node. The second never looks at the process polar: it
//! checks the initial value and then, step by step, whether the one-step
//! increments of the probe lie in the conditional bipolar of the generators'
//! increments.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::conditional::{
    conditional_bipolar_membership, conditional_polar_constraints, BipolarVerdict, PolarWitness,
    RandomVariable, RvError, RvSet,
};
use crate::lp::{self, ConstraintSystem, LpError, LpOutcome, LpProblem, Relation, Sense};
use crate::process::{
    absorption_violation, in_s1, increment_unchecked, is_supermartingale, AdaptedProcess,
    ProcessError, ProcessSet,
};
use crate::rational::div_zero_convention;
use crate::tree::{EventTree, NodeId};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolarError {
    #[error("the generator set is not far-reaching")]
    NotFarReaching,
    #[error("time {t1} has no next step (horizon {horizon})")]
    NoNextStep { t1: usize, horizon: usize },
    #[error("envelope exceeds 1 at node {0}")]
    EnvelopeHypothesis(NodeId),
    #[error("invalid envelope times t1 = {t1}, t2 = {t2}")]
    EnvelopeTimes { t1: usize, t2: usize },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Rv(#[from] RvError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Polar of the generators over node variables `Y(n) >= 0`: per generator
/// `X`, `X(root) Y(root) <= 1` and, at every non-terminal node `n`,
/// `sum_ch p(ch) X(ch) Y(ch) <= X(n) Y(n)`. Trivial rows are dropped.
pub fn polar_constraints(c: &ProcessSet) -> ConstraintSystem {
    let tree = c.tree();
    let mut sys = ConstraintSystem::nonnegative(tree.len());
    for x in c.generators() {
        let r = tree.root();
        if x.get(r).is_positive() {
            sys.push(vec![(r.0, x.get(r).clone())], Relation::Le, Rational::one());
        }
        for n in tree.non_terminal() {
            let mut coeffs: Vec<_> = tree
                .children(n)
                .filter(|&ch| x.get(ch).is_positive())
                .map(|ch| (ch.0, tree.one_step_prob(ch) * x.get(ch)))
                .collect();
            if coeffs.is_empty() {
                continue;
            }
            coeffs.push((n.0, -x.get(n).clone()));
            sys.push(coeffs, Relation::Le, Rational::zero());
        }
    }
    sys
}

pub fn polar_membership(y: &AdaptedProcess, c: &ProcessSet) -> bool {
    y.len() == c.tree().len() && polar_constraints(c).is_satisfied_by(y.values())
}

/// Which inequality of the bipolar description failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BipolarCheck {
    /// `z(root) Y(root) <= 1`.
    Root,
    /// `sum_ch p z(ch) Y(ch) <= z(n) Y(n)` at this node.
    Node(NodeId),
}

/// Polar element that separates a probe from the bipolar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessWitness {
    Point { y: Vec<Rational>, value: Rational },
    Ray { point: Vec<Rational>, ray: Vec<Rational> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpBipolarVerdict {
    In,
    Out {
        check: BipolarCheck,
        witness: ProcessWitness,
    },
}

impl LpBipolarVerdict {
    pub fn is_in(&self) -> bool {
        matches!(self, LpBipolarVerdict::In)
    }
}

fn require_hypotheses(c: &ProcessSet) -> Result<(), PolarError> {
    c.check_s1()?;
    if !c.is_far_reaching() {
        return Err(PolarError::NotFarReaching);
    }
    Ok(())
}

fn check_len(z: &AdaptedProcess, tree: &EventTree) -> Result<(), PolarError> {
    if z.len() != tree.len() {
        return Err(PolarError::LengthMismatch {
            expected: tree.len(),
            found: z.len(),
        });
    }
    Ok(())
}

/// Bipolar membership by quantifying over the polar: one LP for the root
/// and one per non-terminal node. Requires `S_1` generators and a
/// far-reaching set.
pub fn bipolar_membership_lp(z: &AdaptedProcess, c: &ProcessSet) -> Result<LpBipolarVerdict, PolarError> {
    require_hypotheses(c)?;
    bipolar_membership_lp_unchecked(z, c)
}

/// [`bipolar_membership_lp`] without the far-reaching hypothesis.
pub fn bipolar_membership_lp_unchecked(
    z: &AdaptedProcess,
    c: &ProcessSet,
) -> Result<LpBipolarVerdict, PolarError> {
    bipolar_membership_over(z, c.tree(), &polar_constraints(c))
}

/// Bipolar membership against an arbitrary polar given as a constraint
/// system whose first `tree.len()` variables are the node values; further
/// variables are auxiliary (an extended formulation).
pub fn bipolar_membership_over(
    z: &AdaptedProcess,
    tree: &EventTree,
    polar: &ConstraintSystem,
) -> Result<LpBipolarVerdict, PolarError> {
    check_len(z, tree)?;
    if polar.num_vars < tree.len() {
        return Err(PolarError::LengthMismatch {
            expected: tree.len(),
            found: polar.num_vars,
        });
    }
    let mut checks = vec![BipolarCheck::Root];
    checks.extend(tree.non_terminal().map(BipolarCheck::Node));
    let results: Vec<Result<Option<ProcessWitness>, LpError>> = checks
        .par_iter()
        .map(|&check| {
            let mut objective = vec![Rational::zero(); polar.num_vars];
            let bound = match check {
                BipolarCheck::Root => {
                    objective[tree.root().0] = z.root_value(tree).clone();
                    Rational::one()
                }
                BipolarCheck::Node(n) => {
                    for ch in tree.children(n) {
                        objective[ch.0] = tree.one_step_prob(ch) * z.get(ch);
                    }
                    objective[n.0] = -z.get(n).clone();
                    Rational::zero()
                }
            };
            let problem = LpProblem::new(Sense::Maximize, objective, polar.clone());
            Ok(match lp::solve(&problem)? {
                LpOutcome::Optimal { value, mut point, .. } => {
                    point.truncate(tree.len());
                    (value > bound).then_some(ProcessWitness::Point { y: point, value })
                }
                LpOutcome::Unbounded { mut point, mut ray } => {
                    point.truncate(tree.len());
                    ray.truncate(tree.len());
                    Some(ProcessWitness::Ray { point, ray })
                }
                LpOutcome::Infeasible { .. } => unreachable!("0 lies in every polar"),
            })
        })
        .collect();
    for (check, result) in checks.into_iter().zip(results) {
        if let Some(witness) = result? {
            return Ok(LpBipolarVerdict::Out { check, witness });
        }
    }
    Ok(LpBipolarVerdict::In)
}

/// One-step increments between times `t1` and `t1 + 1`, as random variables
/// on the time-`t1 + 1` nodes partitioned by their parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncrementSet {
    pub t1: usize,
    /// Time-`t1` nodes, in block order.
    pub atoms: Vec<NodeId>,
    /// Generators are the generator increments; the partition is the atoms.
    pub rv_set: RvSet,
}

/// `X(ch) / X(parent)` over the time-`t1 + 1` nodes, `0/0 = 0`.
pub fn step_increments(
    x: &AdaptedProcess,
    tree: &EventTree,
    t1: usize,
) -> Result<RandomVariable, PolarError> {
    check_len(x, tree)?;
    if t1 >= tree.horizon() {
        return Err(PolarError::NoNextStep {
            t1,
            horizon: tree.horizon(),
        });
    }
    let values = tree.nodes_at(t1 + 1)
        .iter()
        .map(|&v| {
            let ch = NodeId(v);
            let parent = tree.parent(ch).unwrap();
            div_zero_convention(x.get(ch), x.get(parent)).ok_or(ProcessError::NotAbsorbing(parent))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RandomVariable::new(values)?)
}

pub fn increment_set(c: &ProcessSet, t1: usize) -> Result<IncrementSet, PolarError> {
    let tree = c.tree();
    let generators = c
        .generators()
        .iter()
        .map(|x| step_increments(x, tree, t1))
        .collect::<Result<Vec<_>, _>>()?;
    let rv_set = RvSet::new(tree.space_at(t1 + 1), tree.step_partition(t1), generators)?;
    Ok(IncrementSet {
        t1,
        atoms: tree.nodes_at(t1).iter().map(|&v| NodeId(v)).collect(),
        rv_set,
    })
}

/// Conditional polar of the step-`t1` increment set with respect to the
/// time-`t1` atoms. Rows come grouped by atom.
pub fn increment_conditional_polar(c: &ProcessSet, t1: usize) -> Result<ConstraintSystem, PolarError> {
    Ok(conditional_polar_constraints(&increment_set(c, t1)?.rv_set))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IncrementalVerdict {
    In,
    /// `z(root)` exceeds every generator's initial value.
    InitialValue { z0: Rational, max: Rational },
    /// The step-`t` increments of `z` leave the conditional bipolar on `atom`.
    Step {
        t: usize,
        atom: NodeId,
        witness: PolarWitness,
    },
}

impl IncrementalVerdict {
    pub fn is_in(&self) -> bool {
        matches!(self, IncrementalVerdict::In)
    }
}

/// Bipolar membership step by step, one conditional bipolar per node.
/// Requires `S_1` generators, a far-reaching set and an absorbing `z`.
pub fn bipolar_membership_incremental(
    z: &AdaptedProcess,
    c: &ProcessSet,
) -> Result<IncrementalVerdict, PolarError> {
    require_hypotheses(c)?;
    bipolar_membership_incremental_unchecked(z, c)
}

/// [`bipolar_membership_incremental`] without the far-reaching hypothesis.
pub fn bipolar_membership_incremental_unchecked(
    z: &AdaptedProcess,
    c: &ProcessSet,
) -> Result<IncrementalVerdict, PolarError> {
    let tree = c.tree();
    check_len(z, tree)?;
    if let Some(n) = absorption_violation(z, tree) {
        return Err(ProcessError::NotAbsorbing(n).into());
    }
    let max = c.max_root_value();
    let z0 = z.root_value(tree);
    if z0 > &max {
        return Ok(IncrementalVerdict::InitialValue { z0: z0.clone(), max });
    }
    let steps: Vec<Result<Option<IncrementalVerdict>, PolarError>> = (0..tree.horizon())
        .into_par_iter()
        .map(|t| {
            let set = increment_set(c, t)?;
            let dz = step_increments(z, tree, t)?;
            Ok(match conditional_bipolar_membership(&dz, &set.rv_set)? {
                BipolarVerdict::In { .. } => None,
                BipolarVerdict::Out { block, witness } => Some(IncrementalVerdict::Step {
                    t,
                    atom: set.atoms[block],
                    witness,
                }),
            })
        })
        .collect();
    for step in steps {
        if let Some(out) = step? {
            return Ok(out);
        }
    }
    Ok(IncrementalVerdict::In)
}

/// The envelope `X` with `X = 1` before `t1`, `X = g` from `t2` on, and in
/// between the largest one-step conditional expectation of the next value
/// times a generator increment. `g` is indexed by the time-`t2` nodes.
///
/// Errors if the envelope exceeds 1 at time `t1`. The result lies in the
/// polar of the generators.
pub fn cadlag_envelope(
    c: &ProcessSet,
    g: &RandomVariable,
    t1: usize,
    t2: usize,
) -> Result<AdaptedProcess, PolarError> {
    let tree = c.tree();
    c.check_s1()?;
    if t1 > t2 || t2 > tree.horizon() {
        return Err(PolarError::EnvelopeTimes { t1, t2 });
    }
    if g.len() != tree.nodes_at(t2).len() {
        return Err(PolarError::LengthMismatch {
            expected: tree.nodes_at(t2).len(),
            found: g.len(),
        });
    }
    let mut x = vec![Rational::one(); tree.len()];
    for m in tree.nodes() {
        if tree.time(m) >= t2 {
            let a = tree.ancestor_at(m, t2).unwrap();
            x[m.0] = g.get(tree.slot(a)).clone();
        }
    }
    for t in (t1..t2).rev() {
        for &v in tree.nodes_at(t) {
            let n = NodeId(v);
            x[v] = c
                .generators()
                .iter()
                .map(|y| {
                    tree.children(n)
                        .map(|ch| tree.one_step_prob(ch) * increment_unchecked(y, tree, t, ch) * &x[ch.0])
                        .sum::<Rational>()
                })
                .max()
                .unwrap();
        }
    }
    if let Some(&v) = tree.nodes_at(t1).iter().find(|&&v| x[v] > Rational::one()) {
        return Err(PolarError::EnvelopeHypothesis(NodeId(v)));
    }
    let out = AdaptedProcess::new(tree, x)?;
    assert!(
        c.generators().iter().all(|y| is_supermartingale(&out.mul(y), tree)),
        "envelope times a generator is not a supermartingale"
    );
    Ok(out)
}

/// A probe for [`verify_fbt`], optionally with a known hull status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FbtProbe {
    pub label: String,
    pub process: AdaptedProcess,
    pub known_in: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IncrementalOutcome {
    Verdict(IncrementalVerdict),
    /// The probe revives after hitting zero, so it lies outside every
    /// bipolar of a far-reaching set.
    NotAbsorbing(NodeId),
}

impl IncrementalOutcome {
    pub fn is_in(&self) -> bool {
        matches!(self, IncrementalOutcome::Verdict(IncrementalVerdict::In))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FbtRow {
    pub label: String,
    pub lp: LpBipolarVerdict,
    pub incremental: IncrementalOutcome,
    pub known_in: Option<bool>,
}

impl FbtRow {
    pub fn agree(&self) -> bool {
        let lp = self.lp.is_in();
        lp == self.incremental.is_in() && self.known_in.is_none_or(|k| k == lp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FbtReport {
    pub rows: Vec<FbtRow>,
    /// False when run without the far-reaching hypothesis.
    pub hypotheses_hold: bool,
}

impl FbtReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(FbtRow::agree)
    }

    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| !r.agree()).count()
    }
}

fn fbt_rows(c: &ProcessSet, probes: &[FbtProbe]) -> Result<Vec<FbtRow>, PolarError> {
    probes
        .iter()
        .map(|p| {
            let lp = bipolar_membership_lp_unchecked(&p.process, c)?;
            let incremental = match bipolar_membership_incremental_unchecked(&p.process, c) {
                Ok(v) => IncrementalOutcome::Verdict(v),
                Err(PolarError::Process(ProcessError::NotAbsorbing(n))) => {
                    IncrementalOutcome::NotAbsorbing(n)
                }
                Err(e) => return Err(e),
            };
            Ok(FbtRow {
                label: p.label.clone(),
                lp,
                incremental,
                known_in: p.known_in,
            })
        })
        .collect()
}

/// Runs both bipolar oracles on every probe and compares them with each
/// other and with any known hull status.
pub fn verify_fbt(c: &ProcessSet, probes: &[FbtProbe]) -> Result<FbtReport, PolarError> {
    require_hypotheses(c)?;
    Ok(FbtReport {
        rows: fbt_rows(c, probes)?,
        hypotheses_hold: true,
    })
}

/// [`verify_fbt`] for sets that need not be far-reaching. Outcomes are
/// reported, not asserted.
pub fn verify_fbt_research(c: &ProcessSet, probes: &[FbtProbe]) -> Result<FbtReport, PolarError> {
    c.check_s1()?;
    Ok(FbtReport {
        rows: fbt_rows(c, probes)?,
        hypotheses_hold: c.is_far_reaching(),
    })
}

/// Whether `z` is in `S_1` and every polar constraint row of `c` holds for
/// `z` viewed as a polar candidate. Used for triality checks.
pub fn in_s1_and_polar(z: &AdaptedProcess, c: &ProcessSet) -> bool {
    in_s1(z, c.tree()) && polar_membership(z, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::fuzz;
    use crate::process::{fork_splice, random_hull_element, random_nonincreasing, solid_multiply};
    use crate::rational::{int, rat};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn proc(tree: &EventTree, v: &[Rational]) -> AdaptedProcess {
        AdaptedProcess::new(tree, v.to_vec()).unwrap()
    }

    /// T1 with generators {1, (1; 2, 0)}.
    fn t1_set() -> ProcessSet {
        let t1 = fixtures::t1();
        let x = proc(&t1, &[int(1), int(2), int(0)]);
        ProcessSet::new(t1.clone(), vec![AdaptedProcess::constant(&t1, int(1)), x]).unwrap()
    }

    #[test]
    fn polar_of_one_is_s1() {
        let t2 = fixtures::t2();
        let c = ProcessSet::new(t2.clone(), vec![AdaptedProcess::constant(&t2, int(1))]).unwrap();
        let sys = polar_constraints(&c);
        // One root row and one row per non-terminal node.
        assert_eq!(sys.constraints.len(), 4);
        let s1 = proc(&t2, &[int(1), int(2), int(0), int(2), int(2), int(0), int(0)]);
        assert!(polar_membership(&s1, &c));
        let not_s1 = proc(&t2, &[int(1), int(2), int(1), int(2), int(2), int(1), int(1)]);
        assert!(!polar_membership(&not_s1, &c));
    }

    #[test]
    fn polar_membership_on_t1() {
        let c = t1_set();
        let sys = polar_constraints(&c);
        // Rows of the second generator: Y_r <= 1 and (1/2) 2 Y_u - Y_r <= 0.
        let row = sys
            .constraints
            .iter()
            .find(|r| r.coeffs == vec![(1, int(1)), (0, int(-1))])
            .map(|r| r.rhs.clone());
        assert_eq!(row, Some(int(0)));
        assert!(polar_membership(&AdaptedProcess::zero(c.tree()), &c));
        let one = ProcessSet::new(c.tree().clone(), vec![c.generators()[0].clone()]).unwrap();
        assert!(polar_membership(&AdaptedProcess::constant(c.tree(), int(1)), &one));
        let y = proc(c.tree(), &[rat(1, 2), int(1), int(0)]);
        assert!(!polar_membership(&y, &c));
    }

    #[test]
    fn generators_and_hull_elements_are_in_the_bipolar() {
        let c = t1_set();
        for g in c.generators() {
            assert!(bipolar_membership_lp(g, &c).unwrap().is_in());
            assert!(bipolar_membership_incremental(g, &c).unwrap().is_in());
        }
        for seed in 0..10 {
            let s = random_hull_element(&c, 2, seed).unwrap();
            assert!(bipolar_membership_lp(&s.process, &c).unwrap().is_in());
            assert!(bipolar_membership_incremental(&s.process, &c).unwrap().is_in());
        }
    }

    #[test]
    fn mirrored_martingale_is_out() {
        // For z = (1; 0, 2) the root-node check is broken by a polar element
        // charging the right branch, e.g. Y = (1; 0, 2).
        let c = t1_set();
        let z = proc(c.tree(), &[int(1), int(0), int(2)]);
        match bipolar_membership_lp(&z, &c).unwrap() {
            LpBipolarVerdict::Out {
                check: BipolarCheck::Node(n),
                witness: ProcessWitness::Point { y, value },
            } => {
                assert_eq!(n, NodeId(0));
                assert!(value.is_positive());
                assert!(polar_membership(&proc(c.tree(), &y), &c));
            }
            other => panic!("{other:?}"),
        }
        assert!(!bipolar_membership_incremental(&z, &c).unwrap().is_in());
    }

    #[test]
    fn increment_polar_examples() {
        let t1 = fixtures::t1();
        let one = ProcessSet::new(t1.clone(), vec![AdaptedProcess::constant(&t1, int(1))]).unwrap();
        let sys = increment_conditional_polar(&one, 0).unwrap();
        assert_eq!(sys.constraints.len(), 1);
        assert_eq!(sys.constraints[0].coeffs, vec![(0, rat(1, 2)), (1, rat(1, 2))]);
        assert_eq!(sys.constraints[0].rhs, int(1));

        let x = ProcessSet::new(t1.clone(), vec![proc(&t1, &[int(1), int(2), int(0)])]).unwrap();
        let set = increment_set(&x, 0).unwrap();
        assert_eq!(set.rv_set.generators()[0].values(), &[int(2), int(0)]);
        let sys = increment_conditional_polar(&x, 0).unwrap();
        // (1/2)(2 g_u) <= 1.
        assert_eq!(sys.constraints[0].coeffs, vec![(0, int(1))]);
        assert_eq!(sys.constraints[0].rhs, int(1));
        assert!(matches!(
            increment_conditional_polar(&x, 1),
            Err(PolarError::NoNextStep { .. })
        ));
    }

    #[test]
    fn envelope_examples() {
        let t2 = fixtures::t2();
        let one = ProcessSet::new(t2.clone(), vec![AdaptedProcess::constant(&t2, int(1))]).unwrap();
        let g = RandomVariable::new(vec![int(1); 4]).unwrap();
        assert_eq!(
            cadlag_envelope(&one, &g, 0, 2).unwrap(),
            AdaptedProcess::constant(&t2, int(1))
        );

        let t1 = fixtures::t1();
        let y = proc(&t1, &[int(1), rat(2, 3), rat(4, 3)]);
        let c = ProcessSet::new(t1.clone(), vec![y]).unwrap();
        let g = RandomVariable::new(vec![int(3), int(0)]).unwrap();
        let x = cadlag_envelope(&c, &g, 0, 1).unwrap();
        assert_eq!(x, proc(&t1, &[int(1), int(3), int(0)]));
        assert!(polar_membership(&x, &c));

        let too_big = RandomVariable::new(vec![int(4), int(0)]).unwrap();
        assert_eq!(
            cadlag_envelope(&c, &too_big, 0, 1),
            Err(PolarError::EnvelopeHypothesis(NodeId(0)))
        );
    }

    #[test]
    fn verify_fbt_examples() {
        let c = t1_set();
        let mut probes: Vec<FbtProbe> = c
            .generators()
            .iter()
            .enumerate()
            .map(|(i, g)| FbtProbe {
                label: format!("generator {i}"),
                process: g.clone(),
                known_in: Some(true),
            })
            .collect();
        for (i, g) in c.generators().iter().enumerate() {
            let r = c.tree().root();
            probes.push(FbtProbe {
                label: format!("doubled root {i}"),
                process: g.with_value(r, g.get(r) * int(2)),
                known_in: Some(false),
            });
        }
        let report = verify_fbt(&c, &probes).unwrap();
        assert!(report.all_agree(), "{report:?}");
        assert!(report.rows[..2].iter().all(|r| r.lp.is_in()));
        assert!(report.rows[2..].iter().all(|r| !r.lp.is_in()));
    }

    #[test]
    fn non_far_reaching_sets_are_refused() {
        let t1 = fixtures::t1();
        let c = ProcessSet::new(t1.clone(), vec![proc(&t1, &[int(1), int(2), int(0)])]).unwrap();
        let z = c.generators()[0].clone();
        assert_eq!(bipolar_membership_lp(&z, &c), Err(PolarError::NotFarReaching));
        assert_eq!(verify_fbt(&c, &[]), Err(PolarError::NotFarReaching));
        let report = verify_fbt_research(
            &c,
            &[FbtProbe {
                label: "g".into(),
                process: z,
                known_in: Some(true),
            }],
        )
        .unwrap();
        assert!(!report.hypotheses_hold);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn oracles_agree_on_random_sets(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = fuzz::random_process_set(&mut rng);
            let probes = fuzz::fbt_probes(&mut rng, &c);
            let report = verify_fbt(&c, &probes).unwrap();
            prop_assert!(report.all_agree(), "{:?}", report);
        }

        #[test]
        fn polar_is_closed_under_hull_operations(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = fuzz::random_process_set(&mut rng);
            let tree = c.tree();
            let y1 = fuzz::lp_polar_element(&mut rng, &c);
            let y2 = fuzz::lp_polar_element(&mut rng, &c);
            let y3 = fuzz::lp_polar_element(&mut rng, &c);
            for y in [&y1, &y2, &y3] {
                prop_assert!(polar_membership(y, &c));
            }
            let s = rng.random_range(0..=tree.horizon());
            let h = crate::process::random_splice_weight(&mut rng, tree, s);
            let spliced = fork_splice(tree, &y1, &y2, &y3, s, &h).unwrap();
            prop_assert!(polar_membership(&spliced, &c));
            let b = random_nonincreasing(&mut rng, tree);
            prop_assert!(polar_membership(&solid_multiply(&spliced, &b, tree), &c));
        }

        #[test]
        fn triality_on_hull_samples(seed in any::<u64>()) {
            // Polar elements of the generators stay polar against any hull element.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = fuzz::random_process_set(&mut rng);
            let tree = c.tree();
            let y = fuzz::lp_polar_element(&mut rng, &c);
            let hull: Vec<AdaptedProcess> = (0..4)
                .map(|i| random_hull_element(&c, 2, seed.wrapping_add(i)).unwrap().process)
                .collect();
            let bigger = ProcessSet::new(tree.clone(), hull).unwrap();
            prop_assert!(polar_membership(&y, &bigger));
        }

        #[test]
        fn envelope_dominates_single_generators(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = fuzz::random_process_set(&mut rng);
            let tree = c.tree();
            let t2 = rng.random_range(1..=tree.horizon());
            let t1 = rng.random_range(0..t2);
            let g: Vec<Rational> = (0..tree.nodes_at(t2).len()).map(|_| fuzz::small_nonneg(&mut rng, 3)).collect();
            let g = RandomVariable::new(g).unwrap();
            match cadlag_envelope(&c, &g, t1, t2) {
                Ok(x) => {
                    prop_assert!(polar_membership(&x, &c));
                    for &v in tree.nodes_at(t1) {
                        for y in c.generators() {
                            // E[g dY | n] along the generator alone.
                            let single: Rational = tree.leaves_below(NodeId(v)).iter()
                                .map(|&l| {
                                    let a = tree.ancestor_at(l, t2).unwrap();
                                    let mass = tree.path_prob(l) / tree.path_prob(NodeId(v));
                                    mass * crate::process::increment_unchecked(y, tree, t1, a) * g.get(tree.slot(a))
                                })
                                .sum();
                            prop_assert!(x.get(NodeId(v)) >= &single);
                        }
                    }
                }
                Err(PolarError::EnvelopeHypothesis(_)) => {}
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }
}
