//! Random variables on a finite space and their conditional polars with
//! respect to a partition `G`.
//!
//! A set is given by finitely many nonnegative generators and stands for
//! their `G`-convex, solid, closed hull. Membership in that hull and in the
//! conditional bipolar are decided by two unrelated LP formulations, which
//! is what makes the dual-oracle comparison meaningful.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{self, ConstraintSystem, LpError, LpOutcome, LpProblem, Relation, Sense};
use crate::rational::{div_zero_convention, in_unit_interval};
use crate::tree::{cond_exp_partition, FiniteSpace, Partition};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RvError {
    #[error("value at outcome {0} is negative")]
    Negative(usize),
    #[error("expected {expected} outcomes, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("a set needs at least one generator")]
    NoGenerators,
    #[error("weight is not constant on block {0}")]
    NotBlockConstant(usize),
    #[error("weight at outcome {0} lies outside [0, 1]")]
    WeightOutOfRange(usize),
    #[error("the random variable is not in the conditional bipolar")]
    NotInBipolar,
    #[error("l is not in the G-unit ball")]
    NotInUnitBall,
    #[error("input {index} is not in H^f: {reason}")]
    NotInHf { index: usize, reason: &'static str },
    #[error("pairwise maximum left H^f: {0}")]
    MaxLeftHf(&'static str),
    #[error("decomposition failed on block {0}")]
    DecompositionFailure(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A nonnegative random variable, one value per outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomVariable {
    values: Vec<Rational>,
}

impl RandomVariable {
    pub fn new(values: Vec<Rational>) -> Result<Self, RvError> {
        if let Some(i) = values.iter().position(Signed::is_negative) {
            return Err(RvError::Negative(i));
        }
        Ok(RandomVariable { values })
    }

    pub fn zero(n: usize) -> Self {
        RandomVariable {
            values: vec![Rational::zero(); n],
        }
    }

    pub fn constant(n: usize, c: Rational) -> Result<Self, RvError> {
        RandomVariable::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.values[i]
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn dominated_by(&self, other: &RandomVariable) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub fn pointwise_max(&self, other: &RandomVariable) -> RandomVariable {
        RandomVariable {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| if a >= b { a.clone() } else { b.clone() })
                .collect(),
        }
    }

    pub fn mul(&self, other: &RandomVariable) -> RandomVariable {
        RandomVariable {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> RandomVariable {
        assert!(!c.is_negative());
        RandomVariable {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// The `G`-convex, solid, closed hull of finitely many generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RvSet {
    space: FiniteSpace,
    partition: Partition,
    generators: Vec<RandomVariable>,
}

impl RvSet {
    pub fn new(
        space: FiniteSpace,
        partition: Partition,
        generators: Vec<RandomVariable>,
    ) -> Result<Self, RvError> {
        if generators.is_empty() {
            return Err(RvError::NoGenerators);
        }
        let n = space.len();
        if partition.ground() != n {
            return Err(RvError::LengthMismatch {
                expected: n,
                found: partition.ground(),
            });
        }
        for g in &generators {
            if g.len() != n {
                return Err(RvError::LengthMismatch {
                    expected: n,
                    found: g.len(),
                });
            }
        }
        Ok(RvSet {
            space,
            partition,
            generators,
        })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn generators(&self) -> &[RandomVariable] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    fn check_len(&self, x: &RandomVariable) -> Result<(), RvError> {
        if x.len() != self.len() {
            return Err(RvError::LengthMismatch {
                expected: self.len(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn cond_exp(&self, x: &RandomVariable) -> Result<RandomVariable, RvError> {
        self.check_len(x)?;
        let values = cond_exp_partition(&self.space, x.values(), &self.partition)
            .expect("lengths checked");
        Ok(RandomVariable { values })
    }
}

/// `B_+(G)`: nonnegative block-constant random variables with `E[l] <= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GUnitBall {
    pub space: FiniteSpace,
    pub partition: Partition,
}

impl GUnitBall {
    pub fn of(c: &RvSet) -> Self {
        GUnitBall {
            space: c.space.clone(),
            partition: c.partition.clone(),
        }
    }

    pub fn contains(&self, l: &RandomVariable) -> bool {
        l.len() == self.space.len()
            && self.partition.is_measurable(l.values())
            && self.space.expectation(l.values()) <= Rational::one()
    }
}

/// `h f + (1 - h) g` for a block-constant weight `h` with values in `[0, 1]`.
pub fn g_convex_combine(
    f: &RandomVariable,
    g: &RandomVariable,
    h: &[Rational],
    partition: &Partition,
) -> Result<RandomVariable, RvError> {
    let n = partition.ground();
    for len in [f.len(), g.len(), h.len()] {
        if len != n {
            return Err(RvError::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if let Some(i) = h.iter().position(|w| !in_unit_interval(w)) {
        return Err(RvError::WeightOutOfRange(i));
    }
    for (b, block) in partition.blocks().iter().enumerate() {
        if block.iter().any(|&i| h[i] != h[block[0]]) {
            return Err(RvError::NotBlockConstant(b));
        }
    }
    let values = (0..n)
        .map(|i| &h[i] * &f.values[i] + (Rational::one() - &h[i]) * &g.values[i])
        .collect();
    Ok(RandomVariable { values })
}

/// H-representation of the conditional polar over coordinates `g(w)`:
/// `g >= 0` and, per generator `f` and block `B`,
/// `sum_{w in B} P(w) f(w) g(w) <= P(B)`. Rows with no support are dropped.
pub fn conditional_polar_constraints(c: &RvSet) -> ConstraintSystem {
    let mut sys = ConstraintSystem::nonnegative(c.len());
    for block in c.partition.blocks() {
        let mass = c.space.block_prob(block);
        for f in &c.generators {
            let coeffs: Vec<_> = block
                .iter()
                .filter(|&&i| !f.values[i].is_zero())
                .map(|&i| (i, c.space.prob(i) * &f.values[i]))
                .collect();
            if !coeffs.is_empty() {
                sys.push(coeffs, Relation::Le, mass.clone());
            }
        }
    }
    sys
}

pub fn conditional_polar_membership(g: &RandomVariable, c: &RvSet) -> bool {
    g.len() == c.len() && conditional_polar_constraints(c).is_satisfied_by(g.values())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullVerdict {
    /// Convex weights over the generators, one vector per block.
    In { weights: Vec<Vec<Rational>> },
    /// No convex combination dominates the probe on this block.
    Out { block: usize, farkas: Vec<Rational> },
}

impl HullVerdict {
    pub fn is_in(&self) -> bool {
        matches!(self, HullVerdict::In { .. })
    }
}

/// Decides membership in the hull: per block, look for convex weights `l`
/// with `h(w) <= sum_i l_i f_i(w)` on the block.
pub fn hull_membership(h: &RandomVariable, c: &RvSet) -> Result<HullVerdict, RvError> {
    c.check_len(h)?;
    let k = c.generators.len();
    let mut weights = Vec::with_capacity(c.partition.blocks().len());
    for (b, block) in c.partition.blocks().iter().enumerate() {
        let mut sys = ConstraintSystem::nonnegative(k);
        sys.push((0..k).map(|i| (i, Rational::one())).collect(), Relation::Eq, Rational::one());
        for &w in block {
            sys.push(
                c.generators
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (i, f.values[w].clone()))
                    .collect(),
                Relation::Ge,
                h.values[w].clone(),
            );
        }
        match lp::solve(&LpProblem::feasibility(sys))? {
            LpOutcome::Optimal { point, .. } => weights.push(point),
            LpOutcome::Infeasible { farkas } => return Ok(HullVerdict::Out { block: b, farkas }),
            LpOutcome::Unbounded { .. } => unreachable!("zero objective is bounded"),
        }
    }
    Ok(HullVerdict::In { weights })
}

/// Polar element separating a probe from the bipolar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolarWitness {
    /// `g` in the polar with block pairing `value > P(B)`.
    Point { g: Vec<Rational>, value: Rational },
    /// The pairing is unbounded along `point + s * ray`, `s >= 0`.
    Ray { point: Vec<Rational>, ray: Vec<Rational> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BipolarVerdict {
    /// Largest block pairing `sum_{w in B} P h g` over the polar, per block.
    In { block_max: Vec<Rational> },
    Out { block: usize, witness: PolarWitness },
}

impl BipolarVerdict {
    pub fn is_in(&self) -> bool {
        matches!(self, BipolarVerdict::In { .. })
    }
}

/// Decides membership in the conditional bipolar: for each block `B`,
/// `max { sum_{w in B} P(w) h(w) g(w) : g in polar } <= P(B)`.
pub fn conditional_bipolar_membership(
    h: &RandomVariable,
    c: &RvSet,
) -> Result<BipolarVerdict, RvError> {
    c.check_len(h)?;
    let polar = conditional_polar_constraints(c);
    let mut block_max = Vec::new();
    for (b, block) in c.partition.blocks().iter().enumerate() {
        let mut objective = vec![Rational::zero(); c.len()];
        for &w in block {
            objective[w] = c.space.prob(w) * &h.values[w];
        }
        let mass = c.space.block_prob(block);
        let problem = LpProblem::new(Sense::Maximize, objective, polar.clone());
        match lp::solve(&problem)? {
            LpOutcome::Optimal { value, point, .. } => {
                if value > mass {
                    return Ok(BipolarVerdict::Out {
                        block: b,
                        witness: PolarWitness::Point { g: point, value },
                    });
                }
                block_max.push(value);
            }
            LpOutcome::Unbounded { point, ray } => {
                return Ok(BipolarVerdict::Out {
                    block: b,
                    witness: PolarWitness::Ray { point, ray },
                })
            }
            LpOutcome::Infeasible { .. } => unreachable!("0 is always in the polar"),
        }
    }
    Ok(BipolarVerdict::In { block_max })
}

/// Both oracles on one probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbtComparison {
    pub hull: HullVerdict,
    pub bipolar: BipolarVerdict,
}

impl CbtComparison {
    pub fn agree(&self) -> bool {
        self.hull.is_in() == self.bipolar.is_in()
    }
}

pub fn compare_oracles(h: &RandomVariable, c: &RvSet) -> Result<CbtComparison, RvError> {
    Ok(CbtComparison {
        hull: hull_membership(h, c)?,
        bipolar: conditional_bipolar_membership(h, c)?,
    })
}

/// Result of [`secondpolar_decompose`]: `f l = h k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub h: RandomVariable,
    pub k: RandomVariable,
}

/// Smallest total mass `r` of nonnegative weights `m` with
/// `f <= sum_i m_i f_i` on `block`. `None` if no such weights exist.
pub fn gauge_on_block(
    f: &RandomVariable,
    c: &RvSet,
    block: &[usize],
) -> Result<Option<Rational>, RvError> {
    let k = c.generators.len();
    let mut sys = ConstraintSystem::nonnegative(k);
    for &w in block {
        sys.push(
            c.generators
                .iter()
                .enumerate()
                .map(|(i, g)| (i, g.values[w].clone()))
                .collect(),
            Relation::Ge,
            f.values[w].clone(),
        );
    }
    let problem = LpProblem::new(Sense::Minimize, vec![Rational::one(); k], sys);
    Ok(lp::solve(&problem)?.optimal_value().cloned())
}

/// Splits `f l`, for `f` in the bipolar and `l` in `B_+(G)`, as `h k` with
/// `h` in the hull and `k` in `B_+(G)`.
///
/// On each block `k = l * max(1, r)` where `r` is the gauge of `f` with
/// respect to the generators, and `h = f l / k` with `0/0 = 0`.
pub fn secondpolar_decompose(
    f: &RandomVariable,
    l: &RandomVariable,
    c: &RvSet,
) -> Result<Decomposition, RvError> {
    c.check_len(f)?;
    c.check_len(l)?;
    if !GUnitBall::of(c).contains(l) {
        return Err(RvError::NotInUnitBall);
    }
    if !conditional_bipolar_membership(f, c)?.is_in() {
        return Err(RvError::NotInBipolar);
    }
    let n = c.len();
    let mut h = vec![Rational::zero(); n];
    let mut k = vec![Rational::zero(); n];
    for (b, block) in c.partition.blocks().iter().enumerate() {
        let r = gauge_on_block(f, c, block)?.ok_or(RvError::DecompositionFailure(b))?;
        let factor = if r > Rational::one() { r } else { Rational::one() };
        for &w in block {
            k[w] = &l.values[w] * &factor;
            h[w] = div_zero_convention(&(&f.values[w] * &l.values[w]), &k[w])
                .ok_or(RvError::DecompositionFailure(b))?;
        }
    }
    let out = Decomposition {
        h: RandomVariable { values: h },
        k: RandomVariable { values: k },
    };
    let product_ok = (0..n).all(|w| &f.values[w] * &l.values[w] == &out.h.values[w] * &out.k.values[w]);
    if !product_ok || !GUnitBall::of(c).contains(&out.k) {
        return Err(RvError::DecompositionFailure(0));
    }
    if let HullVerdict::Out { block, .. } = hull_membership(&out.h, c)? {
        return Err(RvError::DecompositionFailure(block));
    }
    Ok(out)
}

/// Checks the `H^f` conditions: `h` in the hull, `{f = 0}` inside `{h = 0}`
/// and `f E[h|G] = h E[f|G]`.
pub fn hf_violation(h: &RandomVariable, f: &RandomVariable, c: &RvSet) -> Result<Option<&'static str>, RvError> {
    c.check_len(h)?;
    c.check_len(f)?;
    if !hull_membership(h, c)?.is_in() {
        return Ok(Some("not in the hull"));
    }
    if (0..c.len()).any(|w| f.values[w].is_zero() && !h.values[w].is_zero()) {
        return Ok(Some("positive where f vanishes"));
    }
    let eh = c.cond_exp(h)?;
    let ef = c.cond_exp(f)?;
    if (0..c.len()).any(|w| &f.values[w] * &eh.values[w] != &h.values[w] * &ef.values[w]) {
        return Ok(Some("f E[h|G] differs from h E[f|G]"));
    }
    Ok(None)
}

/// Pointwise maximum of elements of `H^f`, checked to stay in `H^f`.
pub fn pairwise_max_closure(
    hs: &[RandomVariable],
    f: &RandomVariable,
    c: &RvSet,
) -> Result<RandomVariable, RvError> {
    for (index, h) in hs.iter().enumerate() {
        if let Some(reason) = hf_violation(h, f, c)? {
            return Err(RvError::NotInHf { index, reason });
        }
    }
    let mut acc = RandomVariable::zero(c.len());
    for h in hs {
        acc = acc.pointwise_max(h);
    }
    if let Some(reason) = hf_violation(&acc, f, c)? {
        return Err(RvError::MaxLeftHf(reason));
    }
    Ok(acc)
}

/// The unconditional theory written out directly over slices, as an
/// independent reference for the one-block partition.
pub mod unconditional {
    use super::*;

    /// `E[f g] <= 1` for every generator.
    pub fn polar_membership(g: &[Rational], generators: &[Vec<Rational>], probs: &[Rational]) -> bool {
        g.iter().all(|v| !v.is_negative())
            && generators.iter().all(|f| {
                let pairing: Rational = (0..g.len()).map(|w| &probs[w] * &f[w] * &g[w]).sum();
                pairing <= Rational::one()
            })
    }

    /// `sup { E[h g] : g in polar } <= 1`.
    pub fn bipolar_membership(
        h: &[Rational],
        generators: &[Vec<Rational>],
        probs: &[Rational],
    ) -> Result<bool, LpError> {
        let n = h.len();
        let mut sys = ConstraintSystem::nonnegative(n);
        for f in generators {
            sys.push((0..n).map(|w| (w, &probs[w] * &f[w])).collect(), Relation::Le, Rational::one());
        }
        let objective = (0..n).map(|w| &probs[w] * &h[w]).collect();
        Ok(match lp::solve(&LpProblem::new(Sense::Maximize, objective, sys))? {
            LpOutcome::Optimal { value, .. } => value <= Rational::one(),
            _ => false,
        })
    }

    /// `h` is dominated by a convex combination of the generators.
    pub fn hull_membership(h: &[Rational], generators: &[Vec<Rational>]) -> Result<bool, LpError> {
        let k = generators.len();
        let mut sys = ConstraintSystem::nonnegative(k);
        sys.push((0..k).map(|i| (i, Rational::one())).collect(), Relation::Eq, Rational::one());
        for (w, hw) in h.iter().enumerate() {
            sys.push((0..k).map(|i| (i, generators[i][w].clone())).collect(), Relation::Ge, hw.clone());
        }
        Ok(lp::solve(&LpProblem::feasibility(sys))?.status() == lp::LpStatus::Optimal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz;
    use crate::rational::{int, rat};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rv(v: &[i64]) -> RandomVariable {
        RandomVariable::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    fn halves() -> Partition {
        Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    /// One generator (1, 1, 2, 2), blocks {1,2},{3,4}, uniform.
    fn block_set() -> RvSet {
        RvSet::new(FiniteSpace::uniform(4), halves(), vec![rv(&[1, 1, 2, 2])]).unwrap()
    }

    #[test]
    fn convex_combination_examples() {
        let triv = Partition::trivial(2);
        let f = rv(&[2, 0]);
        let g = rv(&[0, 2]);
        assert_eq!(g_convex_combine(&f, &g, &[int(1), int(1)], &triv).unwrap(), f);
        assert_eq!(
            g_convex_combine(&f, &g, &[rat(1, 2), rat(1, 2)], &triv).unwrap(),
            rv(&[1, 1])
        );
        let h: Vec<_> = [1, 1, 0, 0].iter().map(|&x| int(x)).collect();
        assert_eq!(
            g_convex_combine(&rv(&[4; 4]), &rv(&[0; 4]), &h, &halves()).unwrap(),
            rv(&[4, 4, 0, 0])
        );
    }

    #[test]
    fn convex_combination_rejects_bad_weights() {
        let f = rv(&[1; 4]);
        let bad: Vec<_> = [1, 0, 0, 0].iter().map(|&x| int(x)).collect();
        assert_eq!(
            g_convex_combine(&f, &f, &bad, &halves()),
            Err(RvError::NotBlockConstant(0))
        );
        let big = vec![int(2); 4];
        assert_eq!(
            g_convex_combine(&f, &f, &big, &halves()),
            Err(RvError::WeightOutOfRange(0))
        );
    }

    /// Each row scaled so its right-hand side is 1, as (coefficients, rhs).
    fn normalized_rows(sys: &ConstraintSystem) -> Vec<Vec<Rational>> {
        sys.constraints
            .iter()
            .map(|c| {
                let mut row = vec![Rational::zero(); sys.num_vars];
                for (j, a) in &c.coeffs {
                    row[*j] = a / &c.rhs;
                }
                row
            })
            .collect()
    }

    #[test]
    fn polar_constraints_for_constant_generator() {
        let c = RvSet::new(FiniteSpace::uniform(2), Partition::trivial(2), vec![rv(&[1, 1])]).unwrap();
        let sys = conditional_polar_constraints(&c);
        assert_eq!(normalized_rows(&sys), vec![vec![rat(1, 2), rat(1, 2)]]);
    }

    #[test]
    fn polar_constraints_per_block() {
        // g1 + g2 <= 2 and g3 + g4 <= 1.
        let sys = conditional_polar_constraints(&block_set());
        assert_eq!(
            normalized_rows(&sys),
            vec![
                vec![rat(1, 2), rat(1, 2), int(0), int(0)],
                vec![int(0), int(0), int(1), int(1)],
            ]
        );
        assert!(sys.bounds.iter().all(|b| b.lower == Some(int(0))));
    }

    #[test]
    fn polar_membership_examples() {
        let c = block_set();
        assert!(conditional_polar_membership(&rv(&[0; 4]), &c));
        assert!(conditional_polar_membership(&rv(&[2, 0, 0, 0]), &c));
        assert!(!conditional_polar_membership(&rv(&[0, 0, 2, 0]), &c));
    }

    #[test]
    fn hull_examples() {
        let c = block_set();
        assert!(hull_membership(&rv(&[1, 1, 2, 2]), &c).unwrap().is_in());
        assert!(hull_membership(&rv(&[1, 0, 2, 0]), &c).unwrap().is_in());
        let out = hull_membership(&rv(&[1, 1, 2, 3]), &c).unwrap();
        assert!(matches!(out, HullVerdict::Out { block: 1, .. }));
    }

    #[test]
    fn bipolar_examples() {
        let c = block_set();
        assert!(conditional_bipolar_membership(&rv(&[0; 4]), &c).unwrap().is_in());
        assert!(conditional_bipolar_membership(&rv(&[1, 1, 2, 2]), &c).unwrap().is_in());
        let bump = RandomVariable::new(vec![int(1), int(1), int(2), rat(5, 2)]).unwrap();
        match conditional_bipolar_membership(&bump, &c).unwrap() {
            BipolarVerdict::Out {
                block,
                witness: PolarWitness::Point { g, value },
            } => {
                assert_eq!(block, 1);
                assert!(conditional_polar_membership(&RandomVariable::new(g).unwrap(), &c));
                assert!(value > rat(1, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bipolar_is_unbounded_where_generators_vanish() {
        let c = RvSet::new(FiniteSpace::uniform(2), Partition::trivial(2), vec![rv(&[1, 0])]).unwrap();
        let v = conditional_bipolar_membership(&rv(&[0, 1]), &c).unwrap();
        assert!(matches!(
            v,
            BipolarVerdict::Out {
                witness: PolarWitness::Ray { .. },
                ..
            }
        ));
    }

    #[test]
    fn decomposition_examples() {
        let c = block_set();
        let f = rv(&[1, 1, 2, 2]);
        let one = rv(&[1; 4]);
        let d = secondpolar_decompose(&f, &one, &c).unwrap();
        assert_eq!((d.h, d.k), (f.clone(), one));

        let l = rv(&[2, 2, 0, 0]);
        let d = secondpolar_decompose(&f, &l, &c).unwrap();
        assert_eq!(d.h, rv(&[1, 1, 0, 0]));
        assert_eq!(d.k, l);

        let d = secondpolar_decompose(&rv(&[0; 4]), &l, &c).unwrap();
        assert_eq!((d.h, d.k), (rv(&[0; 4]), l));
    }

    #[test]
    fn decomposition_rejects_bad_inputs() {
        let c = block_set();
        assert_eq!(
            secondpolar_decompose(&rv(&[1, 1, 2, 3]), &rv(&[1; 4]), &c),
            Err(RvError::NotInBipolar)
        );
        assert_eq!(
            secondpolar_decompose(&rv(&[1; 4]), &rv(&[2; 4]), &c),
            Err(RvError::NotInUnitBall)
        );
    }

    #[test]
    fn pairwise_max_examples() {
        let c = RvSet::new(
            FiniteSpace::uniform(2),
            Partition::trivial(2),
            vec![rv(&[2, 0]), rv(&[0, 2])],
        )
        .unwrap();
        let f = rv(&[1, 0]);
        let h1 = rv(&[2, 0]);
        assert_eq!(hf_violation(&h1, &f, &c).unwrap(), None);
        let top = pairwise_max_closure(std::slice::from_ref(&h1), &f, &c).unwrap();
        assert_eq!(top, h1);
        assert!(f.dominated_by(&top));
        let h0 = rv(&[1, 0]);
        assert_eq!(pairwise_max_closure(&[h0, h1.clone()], &f, &c).unwrap(), h1);
        assert!(matches!(
            pairwise_max_closure(&[rv(&[0, 1])], &f, &c),
            Err(RvError::NotInHf { index: 0, .. })
        ));
    }

    fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn polar_is_solid_and_g_convex(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let c = fuzz::random_rv_set(&mut rng);
            let g1 = fuzz::random_polar_element(&mut rng, &c).unwrap();
            let g2 = fuzz::random_polar_element(&mut rng, &c).unwrap();
            prop_assert!(conditional_polar_membership(&g1, &c));
            prop_assert!(conditional_polar_membership(&g2, &c));
            let h = fuzz::random_block_weight(&mut rng, c.partition());
            let mix = g_convex_combine(&g1, &g2, &h, c.partition()).unwrap();
            prop_assert!(conditional_polar_membership(&mix, &c));
            let below = fuzz::random_shrink(&mut rng, &g1);
            prop_assert!(conditional_polar_membership(&below, &c));
        }

        #[test]
        fn hull_and_bipolar_agree(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let c = fuzz::random_rv_set(&mut rng);
            for (_, probe) in fuzz::cbt_probes(&mut rng, &c) {
                let cmp = compare_oracles(&probe, &c).unwrap();
                prop_assert!(cmp.agree(), "probe {:?}: {:?}", probe, cmp);
            }
        }

        #[test]
        fn one_block_matches_unconditional_theory(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let c = fuzz::random_rv_set(&mut rng);
            let c = RvSet::new(c.space().clone(), Partition::trivial(c.len()), c.generators().to_vec()).unwrap();
            let gens: Vec<Vec<Rational>> = c.generators().iter().map(|g| g.values().to_vec()).collect();
            let probs = c.space().probs();
            for (_, probe) in fuzz::cbt_probes(&mut rng, &c) {
                prop_assert_eq!(
                    conditional_polar_membership(&probe, &c),
                    unconditional::polar_membership(probe.values(), &gens, probs)
                );
                prop_assert_eq!(
                    conditional_bipolar_membership(&probe, &c).unwrap().is_in(),
                    unconditional::bipolar_membership(probe.values(), &gens, probs).unwrap()
                );
                prop_assert_eq!(
                    hull_membership(&probe, &c).unwrap().is_in(),
                    unconditional::hull_membership(probe.values(), &gens).unwrap()
                );
            }
        }

        #[test]
        fn decomposition_round_trip(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let c = fuzz::random_rv_set(&mut rng);
            let f = fuzz::random_hull_rv(&mut rng, &c);
            let l = fuzz::random_unit_ball_element(&mut rng, &c);
            let d = secondpolar_decompose(&f, &l, &c).unwrap();
            for w in 0..c.len() {
                prop_assert_eq!(f.get(w) * l.get(w), d.h.get(w) * d.k.get(w));
            }
            prop_assert!(GUnitBall::of(&c).contains(&d.k));
            prop_assert!(hull_membership(&d.h, &c).unwrap().is_in());
        }
    }
}
