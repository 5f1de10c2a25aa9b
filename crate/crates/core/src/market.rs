//! Frictionless markets on event trees: wealth processes, martingale
//! measures, the enlargement `Y` of the density processes, superhedging by
//! backward recursion, and the consumption budget constraint.
//!
//! Prices are discounted by a constant numéraire. A market is accepted only
//! if it admits an equivalent martingale measure.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::lp::{
    self, feasible_interior_point, Bounds, ConstraintSystem, InteriorPoint, LpError, LpOutcome,
    LpProblem, Relation, Sense,
};
use crate::polar::{bipolar_membership_over, LpBipolarVerdict, PolarError};
use crate::process::{is_martingale, is_supermartingale, AdaptedProcess, ProcessError};
use crate::rational::sum;
use crate::tree::{EventTree, NodeId};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarketError {
    #[error("expected {expected} values for {what}, got {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("a market needs at least one asset")]
    NoAssets,
    #[error("no equivalent martingale measure: the market admits arbitrage")]
    NoEquivalentMartingaleMeasure,
    #[error("transition weights are not a martingale measure (node {0})")]
    InfeasibleMeasure(NodeId),
    #[error("consumption must start at 0 and never decrease (node {0})")]
    InvalidConsumption(NodeId),
    #[error("time weights must be nonnegative and sum to 1")]
    InvalidWeights,
    #[error("negative value at node {0}")]
    Negative(NodeId),
    #[error("primal says {primal}, dual says {dual}: the budget oracles disagree")]
    OracleDisagreement { primal: bool, dual: bool },
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Discounted prices of `d` assets on an event tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    tree: EventTree,
    prices: Vec<AdaptedProcess>,
    interior: Vec<Rational>,
}

impl Market {
    pub fn new(tree: EventTree, prices: Vec<AdaptedProcess>) -> Result<Self, MarketError> {
        if prices.is_empty() {
            return Err(MarketError::NoAssets);
        }
        for p in &prices {
            if p.len() != tree.len() {
                return Err(MarketError::LengthMismatch {
                    what: "prices",
                    expected: tree.len(),
                    found: p.len(),
                });
            }
        }
        let mut m = Market {
            tree,
            prices,
            interior: Vec::new(),
        };
        let (_, interior) = emm_polytope(&m)?;
        match interior {
            InteriorPoint::Found { point, .. } => m.interior = point,
            InteriorPoint::NoInterior => return Err(MarketError::NoEquivalentMartingaleMeasure),
        }
        Ok(m)
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn assets(&self) -> usize {
        self.prices.len()
    }

    pub fn prices(&self) -> &[AdaptedProcess] {
        &self.prices
    }

    pub fn price(&self, asset: usize, n: NodeId) -> &Rational {
        self.prices[asset].get(n)
    }

    /// An equivalent martingale measure found at construction, as one-step
    /// weights per node (1 at the root).
    pub fn interior_measure(&self) -> &[Rational] {
        &self.interior
    }

    fn increment(&self, asset: usize, ch: NodeId) -> Rational {
        let n = self.tree.parent(ch).unwrap();
        self.price(asset, ch) - self.price(asset, n)
    }
}

/// Holdings per non-terminal node, `d` entries each (empty at the leaves).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    holdings: Vec<Vec<Rational>>,
}

impl Strategy {
    pub fn new(m: &Market, holdings: Vec<Vec<Rational>>) -> Result<Self, MarketError> {
        if holdings.len() != m.tree.len() {
            return Err(MarketError::LengthMismatch {
                what: "holdings",
                expected: m.tree.len(),
                found: holdings.len(),
            });
        }
        let mut holdings = holdings;
        for n in m.tree.nodes() {
            let h = &mut holdings[n.0];
            if m.tree.is_terminal(n) {
                h.clear();
            } else if h.len() != m.assets() {
                return Err(MarketError::LengthMismatch {
                    what: "holdings per node",
                    expected: m.assets(),
                    found: h.len(),
                });
            }
        }
        Ok(Strategy { holdings })
    }

    pub fn zero(m: &Market) -> Self {
        Strategy {
            holdings: m
                .tree
                .nodes()
                .map(|n| {
                    if m.tree.is_terminal(n) {
                        Vec::new()
                    } else {
                        vec![Rational::zero(); m.assets()]
                    }
                })
                .collect(),
        }
    }

    /// Holdings over the edges leaving `n`.
    pub fn at(&self, n: NodeId) -> &[Rational] {
        &self.holdings[n.0]
    }
}

/// Cumulative consumption: 0 at the root and nondecreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionProcess {
    cumulative: AdaptedProcess,
}

impl ConsumptionProcess {
    pub fn new(tree: &EventTree, cumulative: AdaptedProcess) -> Result<Self, MarketError> {
        if cumulative.len() != tree.len() {
            return Err(MarketError::LengthMismatch {
                what: "consumption",
                expected: tree.len(),
                found: cumulative.len(),
            });
        }
        if !cumulative.root_value(tree).is_zero() {
            return Err(MarketError::InvalidConsumption(tree.root()));
        }
        for n in tree.nodes() {
            if let Some(p) = tree.parent(n) {
                if cumulative.get(n) < cumulative.get(p) {
                    return Err(MarketError::InvalidConsumption(n));
                }
            }
        }
        Ok(ConsumptionProcess { cumulative })
    }

    pub fn none(tree: &EventTree) -> Self {
        ConsumptionProcess {
            cumulative: AdaptedProcess::zero(tree),
        }
    }

    pub fn cumulative(&self) -> &AdaptedProcess {
        &self.cumulative
    }
}

/// Consumption rate `c` per node with time weights `mu`; cumulative
/// consumption is `C_t = sum_{s <= t} c_s mu_s` along the path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionDensity {
    density: AdaptedProcess,
    weights: Vec<Rational>,
}

impl ConsumptionDensity {
    pub fn new(tree: &EventTree, density: AdaptedProcess, weights: Vec<Rational>) -> Result<Self, MarketError> {
        if density.len() != tree.len() {
            return Err(MarketError::LengthMismatch {
                what: "consumption density",
                expected: tree.len(),
                found: density.len(),
            });
        }
        if weights.len() != tree.horizon() + 1 {
            return Err(MarketError::LengthMismatch {
                what: "time weights",
                expected: tree.horizon() + 1,
                found: weights.len(),
            });
        }
        if weights.iter().any(Signed::is_negative) || !sum(&weights).is_one() {
            return Err(MarketError::InvalidWeights);
        }
        Ok(ConsumptionDensity { density, weights })
    }

    /// All weight on the horizon.
    pub fn terminal(tree: &EventTree, density: AdaptedProcess) -> Result<Self, MarketError> {
        let mut weights = vec![Rational::zero(); tree.horizon() + 1];
        weights[tree.horizon()] = Rational::one();
        Self::new(tree, density, weights)
    }

    pub fn density(&self) -> &AdaptedProcess {
        &self.density
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// `C(n) = sum over the path to n of c mu`.
    pub fn cumulative(&self, tree: &EventTree) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); tree.len()];
        for t in 0..=tree.horizon() {
            for &v in tree.nodes_at(t) {
                let n = NodeId(v);
                let before = tree.parent(n).map_or_else(Rational::zero, |p| out[p.0].clone());
                out[v] = before + self.density.get(n) * &self.weights[t];
            }
        }
        out
    }
}

/// `X(root) = x`, `X(ch) = X(n) + h(n).(S(ch) - S(n)) - (C(ch) - C(n))`.
/// The result may be negative; see [`is_admissible`].
pub fn wealth(x: &Rational, h: &Strategy, cons: &ConsumptionProcess, m: &Market) -> Vec<Rational> {
    let tree = &m.tree;
    let c = cons.cumulative();
    let mut out = vec![Rational::zero(); tree.len()];
    out[tree.root().0] = x - c.root_value(tree);
    for t in 1..=tree.horizon() {
        for &v in tree.nodes_at(t) {
            let ch = NodeId(v);
            let n = tree.parent(ch).unwrap();
            let gain: Rational = (0..m.assets()).map(|i| &h.at(n)[i] * m.increment(i, ch)).sum();
            out[v] = &out[n.0] + gain - (c.get(ch) - c.get(n));
        }
    }
    out
}

pub fn is_admissible(x: &Rational, h: &Strategy, cons: &ConsumptionProcess, m: &Market) -> bool {
    wealth(x, h, cons, m).iter().all(|v| !v.is_negative())
}

/// Martingale measures as one-step weights `q(n)` for every node (`q(root)`
/// is pinned to 1): `q >= 0`, children weights sum to 1, and every price is
/// the `q`-average of its children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmmPolytope {
    pub system: ConstraintSystem,
}

impl EmmPolytope {
    pub fn contains(&self, q: &[Rational]) -> bool {
        q.len() == self.system.num_vars && self.system.is_satisfied_by(q)
    }
}

/// The martingale-measure polytope and, if it exists, a point with all
/// weights strictly positive.
pub fn emm_polytope(m: &Market) -> Result<(EmmPolytope, InteriorPoint), MarketError> {
    let tree = &m.tree;
    let mut sys = ConstraintSystem::nonnegative(tree.len());
    sys.push(vec![(tree.root().0, Rational::one())], Relation::Eq, Rational::one());
    for n in tree.non_terminal() {
        let children: Vec<NodeId> = tree.children(n).collect();
        sys.push(
            children.iter().map(|c| (c.0, Rational::one())).collect(),
            Relation::Eq,
            Rational::one(),
        );
        for i in 0..m.assets() {
            sys.push(
                children.iter().map(|&c| (c.0, m.price(i, c).clone())).collect(),
                Relation::Eq,
                m.price(i, n).clone(),
            );
        }
    }
    let strict: Vec<usize> = (0..tree.len()).collect();
    let interior = feasible_interior_point(&sys, &strict)?;
    Ok((EmmPolytope { system: sys }, interior))
}

/// Density process of a martingale measure given by one-step weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityProcess {
    pub process: AdaptedProcess,
    /// Whether every weight is positive, i.e. the measure is equivalent.
    pub equivalent: bool,
}

/// `Y(n) = Q(path to n) / P(path to n)`; a `P`-martingale starting at 1.
pub fn density_process(q: &[Rational], m: &Market) -> Result<DensityProcess, MarketError> {
    let tree = &m.tree;
    if q.len() != tree.len() {
        return Err(MarketError::LengthMismatch {
            what: "measure weights",
            expected: tree.len(),
            found: q.len(),
        });
    }
    let (poly, _) = emm_polytope(m)?;
    if let Some(v) = poly.system.first_violation(q) {
        let node = match v {
            Ok(row) | Err(row) => row,
        };
        return Err(MarketError::InfeasibleMeasure(NodeId(node.min(tree.len() - 1))));
    }
    let mut y = vec![Rational::one(); tree.len()];
    for t in 1..=tree.horizon() {
        for &v in tree.nodes_at(t) {
            let ch = NodeId(v);
            let n = tree.parent(ch).unwrap();
            y[v] = &y[n.0] * &q[v] / tree.one_step_prob(ch);
        }
    }
    let process = AdaptedProcess::new(tree, y)?;
    assert!(is_martingale(&process, tree), "density process is not a martingale");
    Ok(DensityProcess {
        process,
        equivalent: tree.nodes().filter(|&n| n != tree.root()).all(|n| q[n.0].is_positive()),
    })
}

/// Variable layout of a wealth polytope: `X(n)` first, then holdings, then
/// optional consumption and initial-capital variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WealthLayout {
    nodes: usize,
    assets: usize,
    hold_base: Vec<Option<usize>>,
    consumption_base: Option<usize>,
    capital: Option<usize>,
}

impl WealthLayout {
    pub fn x(&self, n: NodeId) -> usize {
        n.0
    }

    pub fn h(&self, n: NodeId, asset: usize) -> usize {
        self.hold_base[n.0].expect("holdings live on non-terminal nodes") + asset
    }

    pub fn c(&self, n: NodeId) -> Option<usize> {
        self.consumption_base.map(|b| b + n.0)
    }

    pub fn capital(&self) -> Option<usize> {
        self.capital
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

/// A wealth polytope and its variable layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WealthPolytope {
    pub layout: WealthLayout,
    pub system: ConstraintSystem,
}

impl WealthPolytope {
    pub fn wealth_of(&self, point: &[Rational]) -> Vec<Rational> {
        point[..self.layout.nodes].to_vec()
    }

    pub fn consumption_of(&self, point: &[Rational]) -> Option<Vec<Rational>> {
        let b = self.layout.consumption_base?;
        Some(point[b..b + self.layout.nodes].to_vec())
    }

    pub fn strategy_of(&self, point: &[Rational], m: &Market) -> Strategy {
        let holdings = m
            .tree
            .nodes()
            .map(|n| match self.layout.hold_base[n.0] {
                Some(b) => point[b..b + self.layout.assets].to_vec(),
                None => Vec::new(),
            })
            .collect();
        Strategy { holdings }
    }
}

enum Capital {
    Fixed(Rational),
    Variable,
}

enum Consumption {
    None,
    Free,
    /// Cumulative consumption per node, 0 at the root.
    Fixed(Vec<Rational>),
}

fn wealth_polytope(m: &Market, capital: Capital, consumption: Consumption) -> WealthPolytope {
    let tree = &m.tree;
    let d = m.assets();
    let mut sys = ConstraintSystem::nonnegative(tree.len());
    let mut hold_base = vec![None; tree.len()];
    for n in tree.non_terminal() {
        let base = sys.num_vars;
        for _ in 0..d {
            sys.add_var(Bounds::free());
        }
        hold_base[n.0] = Some(base);
    }
    let consumption_base = match consumption {
        Consumption::Free => {
            let base = sys.num_vars;
            for _ in 0..tree.len() {
                sys.add_var(Bounds::nonnegative());
            }
            Some(base)
        }
        _ => None,
    };
    let capital_var = match capital {
        Capital::Variable => Some(sys.add_var(Bounds::free())),
        Capital::Fixed(_) => None,
    };
    let layout = WealthLayout {
        nodes: tree.len(),
        assets: d,
        hold_base,
        consumption_base,
        capital: capital_var,
    };
    let root = tree.root();
    match capital {
        Capital::Fixed(x) => sys.push(vec![(root.0, Rational::one())], Relation::Le, x),
        Capital::Variable => sys.push(
            vec![(root.0, Rational::one()), (capital_var.unwrap(), -Rational::one())],
            Relation::Le,
            Rational::zero(),
        ),
    }
    if let Some(c_root) = layout.c(root) {
        sys.push(vec![(c_root, Rational::one())], Relation::Eq, Rational::zero());
    }
    for n in tree.non_terminal() {
        for ch in tree.children(n) {
            // X(ch) - X(n) - h.dS + (C(ch) - C(n)) = 0
            let mut coeffs = vec![(ch.0, Rational::one()), (n.0, -Rational::one())];
            for i in 0..d {
                coeffs.push((layout.h(n, i), -m.increment(i, ch)));
            }
            let mut rhs = Rational::zero();
            match &consumption {
                Consumption::None => {}
                Consumption::Free => {
                    let (cc, cn) = (layout.c(ch).unwrap(), layout.c(n).unwrap());
                    coeffs.push((cc, Rational::one()));
                    coeffs.push((cn, -Rational::one()));
                    sys.push(
                        vec![(cc, Rational::one()), (cn, -Rational::one())],
                        Relation::Ge,
                        Rational::zero(),
                    );
                }
                Consumption::Fixed(c) => rhs = &c[n.0] - &c[ch.0],
            }
            sys.push(coeffs, Relation::Eq, rhs);
        }
    }
    WealthPolytope { layout, system: sys }
}

/// Admissible pure-investment wealth processes with initial value at most `x`.
pub fn pure_investment_polytope(m: &Market, x: &Rational) -> WealthPolytope {
    wealth_polytope(m, Capital::Fixed(x.clone()), Consumption::None)
}

/// Admissible wealth processes with consumption (`C(root) = 0`, `C`
/// nondecreasing) and initial value at most `x`. The `X` variables are the
/// wealth after consumption.
pub fn consumption_polytope(m: &Market, x: &Rational) -> WealthPolytope {
    wealth_polytope(m, Capital::Fixed(x.clone()), Consumption::Free)
}

/// Consumption fixed to `cumulative` (0 at the root); initial capital fixed
/// to `x`, or a free variable when `x` is `None`.
pub fn fixed_consumption_polytope(m: &Market, x: Option<&Rational>, cumulative: Vec<Rational>) -> WealthPolytope {
    let capital = x.map_or(Capital::Variable, |x| Capital::Fixed(x.clone()));
    wealth_polytope(m, capital, Consumption::Fixed(cumulative))
}

/// Largest `sum_ch p y(ch) X(ch) - y(n) X(n)` over `poly`, per non-terminal
/// node, or `None` as soon as one is positive or unbounded.
fn node_pairings_nonpositive(y: &AdaptedProcess, m: &Market, poly: &WealthPolytope) -> Result<bool, MarketError> {
    use rayon::prelude::*;
    let tree = &m.tree;
    let nodes: Vec<NodeId> = tree.non_terminal().collect();
    let results: Vec<Result<bool, LpError>> = nodes
        .par_iter()
        .map(|&n| {
            let mut objective = vec![Rational::zero(); poly.system.num_vars];
            for ch in tree.children(n) {
                objective[ch.0] = tree.one_step_prob(ch) * y.get(ch);
            }
            objective[n.0] = -y.get(n).clone();
            let out = lp::solve(&LpProblem::new(Sense::Maximize, objective, poly.system.clone()))?;
            Ok(matches!(out, LpOutcome::Optimal { ref value, .. } if !value.is_positive()))
        })
        .collect();
    for r in results {
        if !r? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_process_len(y: &AdaptedProcess, m: &Market) -> Result<(), MarketError> {
    if y.len() != m.tree.len() {
        return Err(MarketError::LengthMismatch {
            what: "process",
            expected: m.tree.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Whether `y X` is a supermartingale with `(y X)(root) <= 1` for every
/// admissible pure-investment wealth `X` from capital 1.
pub fn y_enlargement_membership(y: &AdaptedProcess, m: &Market) -> Result<bool, MarketError> {
    check_process_len(y, m)?;
    if y.root_value(&m.tree) > &Rational::one() {
        return Ok(false);
    }
    node_pairings_nonpositive(y, m, &pure_investment_polytope(m, &Rational::one()))
}

/// The same question against wealth processes with consumption.
pub fn xc_polar_membership(y: &AdaptedProcess, m: &Market) -> Result<bool, MarketError> {
    check_process_len(y, m)?;
    if y.root_value(&m.tree) > &Rational::one() {
        return Ok(false);
    }
    node_pairings_nonpositive(y, m, &consumption_polytope(m, &Rational::one()))
}

/// Extended formulation of the enlargement `Y`: variables `y(n)` for every
/// node followed by `nu(ch)` for every non-root node, with `y(root) <= 1`,
/// `nu(ch) >= p(ch) y(ch)`, `sum_ch nu(ch) (S(ch) - S(n)) = 0` and
/// `sum_ch nu(ch) <= y(n)`.
pub fn enlargement_system(m: &Market) -> ConstraintSystem {
    let tree = &m.tree;
    let n_nodes = tree.len();
    let mut sys = ConstraintSystem::nonnegative(2 * n_nodes);
    let nu = |n: NodeId| n_nodes + n.0;
    let root = tree.root();
    sys.push(vec![(root.0, Rational::one())], Relation::Le, Rational::one());
    // The root has no nu; pin it.
    sys.push(vec![(nu(root), Rational::one())], Relation::Eq, Rational::zero());
    for n in tree.non_terminal() {
        let children: Vec<NodeId> = tree.children(n).collect();
        for &ch in &children {
            sys.push(
                vec![(nu(ch), Rational::one()), (ch.0, -tree.one_step_prob(ch).clone())],
                Relation::Ge,
                Rational::zero(),
            );
        }
        for i in 0..m.assets() {
            let coeffs: Vec<_> = children
                .iter()
                .map(|&ch| (nu(ch), m.increment(i, ch)))
                .filter(|(_, a)| !a.is_zero())
                .collect();
            if !coeffs.is_empty() {
                sys.push(coeffs, Relation::Eq, Rational::zero());
            }
        }
        let mut budget: Vec<_> = children.iter().map(|&ch| (nu(ch), Rational::one())).collect();
        budget.push((n.0, -Rational::one()));
        sys.push(budget, Relation::Le, Rational::zero());
    }
    sys
}

/// Membership in `Y` through the extended formulation.
pub fn enlargement_membership_local(y: &AdaptedProcess, m: &Market) -> Result<bool, MarketError> {
    check_process_len(y, m)?;
    let tree = &m.tree;
    let sys = enlargement_system(m);
    let mut fixed = sys.clone();
    for n in tree.nodes() {
        fixed.push(vec![(n.0, Rational::one())], Relation::Eq, y.get(n).clone());
    }
    Ok(lp::solve(&LpProblem::feasibility(fixed))?.status() == lp::LpStatus::Optimal)
}

/// Membership of `z` in the bipolar of the pure-investment wealth processes
/// from capital 1, quantifying over `Y` in its extended formulation.
pub fn x1_bipolar_membership(z: &AdaptedProcess, m: &Market) -> Result<LpBipolarVerdict, MarketError> {
    check_process_len(z, m)?;
    Ok(bipolar_membership_over(z, &m.tree, &enlargement_system(m))?)
}

/// Whether `z` is the wealth after consumption of some admissible strategy
/// from capital at most 1.
pub fn consumption_feasible(z: &AdaptedProcess, m: &Market) -> Result<bool, MarketError> {
    check_process_len(z, m)?;
    let mut poly = consumption_polytope(m, &Rational::one());
    for n in m.tree.nodes() {
        poly.system
            .push(vec![(n.0, Rational::one())], Relation::Eq, z.get(n).clone());
    }
    Ok(lp::solve(&LpProblem::feasibility(poly.system))?.status() == lp::LpStatus::Optimal)
}

/// A sampled element of the consumption polytope: gains `W = x + H.S`,
/// cumulative consumption `C`, and wealth `X = W - C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionPair {
    pub gains: Vec<Rational>,
    pub consumption: Vec<Rational>,
}

impl ConsumptionPair {
    pub fn net(&self) -> Vec<Rational> {
        self.gains.iter().zip(&self.consumption).map(|(w, c)| w - c).collect()
    }
}

/// Vertex (or midpoint of two vertices) of the consumption polytope for a
/// random objective.
pub fn sample_consumption_pair<R: Rng>(rng: &mut R, m: &Market) -> Result<ConsumptionPair, MarketError> {
    let poly = consumption_polytope(m, &Rational::one());
    let vertex = |rng: &mut R| -> Result<Vec<Rational>, MarketError> {
        let mut objective = vec![Rational::zero(); poly.system.num_vars];
        for n in m.tree.nodes() {
            objective[n.0] = crate::fuzz::small_nonneg(rng, 3);
            objective[poly.layout.c(n).unwrap()] = crate::fuzz::small_nonneg(rng, 3);
        }
        let out = lp::solve(&LpProblem::new(Sense::Maximize, objective, poly.system.clone()))?;
        Ok(out.point().expect("0 is feasible").to_vec())
    };
    let mut point = vertex(rng)?;
    if rng.random_bool(0.3) {
        let other = vertex(rng)?;
        point = point.iter().zip(&other).map(|(a, b)| (a + b) / Rational::from_integer(2.into())).collect();
    }
    let x = poly.wealth_of(&point);
    let c = poly.consumption_of(&point).unwrap();
    Ok(ConsumptionPair {
        gains: x.iter().zip(&c).map(|(a, b)| a + b).collect(),
        consumption: c,
    })
}

/// Outcome of [`verify_market_duality`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DualityReport {
    /// `(y probe, pair)` index pairs where `y (W - C)` failed to be a
    /// supermartingale.
    pub product_violations: Vec<(usize, usize)>,
    pub products_checked: usize,
    /// Per `y` probe: (pure-investment polar, consumption polar, extended formulation).
    pub polar_oracles: Vec<(bool, bool, bool)>,
    /// Per `z` probe: (LP bipolar of X(1), consumption feasibility).
    pub bipolar_oracles: Vec<(bool, bool)>,
}

impl DualityReport {
    pub fn polar_oracles_agree(&self) -> bool {
        self.polar_oracles.iter().all(|&(a, b, c)| a == b && b == c)
    }

    pub fn bipolar_oracles_agree(&self) -> bool {
        self.bipolar_oracles.iter().all(|&(a, b)| a == b)
    }

    pub fn all_ok(&self) -> bool {
        self.product_violations.is_empty() && self.polar_oracles_agree() && self.bipolar_oracles_agree()
    }
}

/// Checks, exactly, for the given probes and sampled pairs:
/// (a) `y (W - C)` is a supermartingale for every `y` in `Y` and every pair;
/// (b) the polar of the pure-investment set, the polar of the consumption
/// set and the extended formulation of `Y` agree on every `y`;
/// (c) bipolar membership against `X(1)` agrees with feasibility in the
/// consumption polytope on every `z`.
pub fn verify_market_duality(
    m: &Market,
    y_probes: &[AdaptedProcess],
    pairs: &[ConsumptionPair],
    z_probes: &[AdaptedProcess],
) -> Result<DualityReport, MarketError> {
    let tree = &m.tree;
    let mut report = DualityReport::default();
    for (i, y) in y_probes.iter().enumerate() {
        let pure = y_enlargement_membership(y, m)?;
        let xc = xc_polar_membership(y, m)?;
        let local = enlargement_membership_local(y, m)?;
        report.polar_oracles.push((pure, xc, local));
        if !pure {
            continue;
        }
        for (j, pair) in pairs.iter().enumerate() {
            report.products_checked += 1;
            let net = pair.net();
            let product: Vec<Rational> = net.iter().zip(y.values()).map(|(a, b)| a * b).collect();
            let ok = AdaptedProcess::new(tree, product).is_ok_and(|p| is_supermartingale(&p, tree));
            if !ok {
                report.product_violations.push((i, j));
            }
        }
    }
    for z in z_probes {
        let lp_in = x1_bipolar_membership(z, m)?.is_in();
        report.bipolar_oracles.push((lp_in, consumption_feasible(z, m)?));
    }
    Ok(report)
}

/// A claim paid at the horizon or a consumption stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    /// Payoff per leaf, in the order of [`EventTree::leaves`].
    Terminal(Vec<Rational>),
    Consumption(ConsumptionDensity),
}

impl Claim {
    /// Values of `C_T` per node at the horizon, indexed by node id.
    fn terminal_values(&self, tree: &EventTree) -> Result<Vec<Rational>, MarketError> {
        let mut out = vec![Rational::zero(); tree.len()];
        match self {
            Claim::Terminal(v) => {
                if v.len() != tree.leaves().len() {
                    return Err(MarketError::LengthMismatch {
                        what: "claim",
                        expected: tree.leaves().len(),
                        found: v.len(),
                    });
                }
                for (&l, x) in tree.leaves().iter().zip(v) {
                    if x.is_negative() {
                        return Err(MarketError::Negative(NodeId(l)));
                    }
                    out[l] = x.clone();
                }
            }
            Claim::Consumption(c) => {
                let cum = c.cumulative(tree);
                for &l in tree.leaves() {
                    out[l] = cum[l].clone();
                }
            }
        }
        Ok(out)
    }
}

/// Superhedging price with its optional decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Superhedge {
    /// `F(root)`.
    pub value: Rational,
    /// `F(n) = max over martingale weights of the next-step average of F`.
    pub envelope: Vec<Rational>,
    /// Hedging strategy; its wealth from `value` dominates `F`.
    pub strategy: Strategy,
    pub wealth: Vec<Rational>,
    /// `D = wealth - F`: nondecreasing, 0 at the root.
    pub residual: Vec<Rational>,
    /// Maximizing one-step weights per node (1 at the root); a martingale
    /// measure, possibly on the boundary, with `E_Q[C_T] = value`.
    pub worst_measure: Vec<Rational>,
}

/// Computes the superhedging price by backward recursion with one local LP
/// per node, then hedges each step with an exact LP.
pub fn superhedge_value(claim: &Claim, m: &Market) -> Result<Superhedge, MarketError> {
    let tree = &m.tree;
    let d = m.assets();
    let mut f = claim.terminal_values(tree)?;
    let mut q = vec![Rational::zero(); tree.len()];
    q[tree.root().0] = Rational::one();
    for t in (0..tree.horizon()).rev() {
        for &v in tree.nodes_at(t) {
            let n = NodeId(v);
            let children: Vec<NodeId> = tree.children(n).collect();
            let k = children.len();
            let mut sys = ConstraintSystem::nonnegative(k);
            sys.push((0..k).map(|j| (j, Rational::one())).collect(), Relation::Eq, Rational::one());
            for i in 0..d {
                sys.push(
                    children.iter().enumerate().map(|(j, &c)| (j, m.price(i, c).clone())).collect(),
                    Relation::Eq,
                    m.price(i, n).clone(),
                );
            }
            let objective = children.iter().map(|c| f[c.0].clone()).collect();
            match lp::solve(&LpProblem::new(Sense::Maximize, objective, sys))? {
                LpOutcome::Optimal { value, point, .. } => {
                    f[v] = value;
                    for (j, c) in children.iter().enumerate() {
                        q[c.0] = point[j].clone();
                    }
                }
                _ => unreachable!("martingale weights exist and form a bounded set"),
            }
        }
    }
    // Hedge: at each node find h with F(n) + h.dS(ch) >= F(ch) for all children.
    let mut holdings = vec![Vec::new(); tree.len()];
    for n in tree.non_terminal() {
        let mut sys = ConstraintSystem::new(d);
        for ch in tree.children(n) {
            sys.push(
                (0..d).map(|i| (i, m.increment(i, ch))).collect(),
                Relation::Ge,
                &f[ch.0] - &f[n.0],
            );
        }
        match lp::solve(&LpProblem::feasibility(sys))? {
            LpOutcome::Optimal { point, .. } => holdings[n.0] = point,
            _ => unreachable!("the local superhedging LP is dual to the envelope LP"),
        }
    }
    let strategy = Strategy { holdings };
    let value = f[tree.root().0].clone();
    let wealth = wealth(&value, &strategy, &ConsumptionProcess::none(tree), m);
    let residual: Vec<Rational> = wealth.iter().zip(&f).map(|(x, fv)| x - fv).collect();
    debug_assert!(residual[tree.root().0].is_zero());
    for n in tree.nodes() {
        if let Some(p) = tree.parent(n) {
            assert!(residual[n.0] >= residual[p.0], "residual decreased");
        }
    }
    let terminal = claim.terminal_values(tree)?;
    assert!(tree.leaves().iter().all(|&l| wealth[l] >= terminal[l]));
    Ok(Superhedge {
        value,
        envelope: f,
        strategy,
        wealth,
        residual,
        worst_measure: q,
    })
}

/// Certificate accompanying a budget verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetCertificate {
    /// Admissible strategy financing the stream from `x`, with its wealth.
    Strategy { strategy: Strategy, wealth: Vec<Rational> },
    /// Martingale weights (one per node) under which the expected
    /// cumulative consumption exceeds `x`.
    ViolatingMeasure { weights: Vec<Rational>, expected_cost: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetVerdict {
    pub affordable: bool,
    pub superhedge_value: Rational,
    pub certificate: BudgetCertificate,
}

/// Whether the consumption stream is financeable from `x`, decided by a
/// primal feasibility LP and by the superhedging dual; errors if they differ.
pub fn budget_check(c: &ConsumptionDensity, x: &Rational, m: &Market) -> Result<BudgetVerdict, MarketError> {
    let tree = &m.tree;
    let cum = c.cumulative(tree);
    let c0 = cum[tree.root().0].clone();
    // The time-0 amount is paid out of the initial capital straight away.
    let primal = if x < &c0 {
        None
    } else {
        let shifted: Vec<Rational> = cum.iter().map(|v| v - &c0).collect();
        let poly = fixed_consumption_polytope(m, Some(&(x - &c0)), shifted);
        match lp::solve(&LpProblem::feasibility(poly.system.clone()))? {
            LpOutcome::Optimal { point, .. } => Some((poly.strategy_of(&point, m), poly.wealth_of(&point))),
            _ => None,
        }
    };
    let dual = superhedge_value(&Claim::Consumption(c.clone()), m)?;
    let dual_ok = &dual.value <= x;
    if primal.is_some() != dual_ok {
        return Err(MarketError::OracleDisagreement {
            primal: primal.is_some(),
            dual: dual_ok,
        });
    }
    let certificate = match primal {
        Some((strategy, wealth)) => BudgetCertificate::Strategy { strategy, wealth },
        None => BudgetCertificate::ViolatingMeasure {
            weights: dual.worst_measure.clone(),
            expected_cost: dual.value.clone(),
        },
    };
    Ok(BudgetVerdict {
        affordable: dual_ok,
        superhedge_value: dual.value,
        certificate,
    })
}

/// Smallest initial capital financing the stream, as a primal LP value.
pub fn min_budget(c: &ConsumptionDensity, m: &Market) -> Result<Rational, MarketError> {
    let tree = &m.tree;
    let cum = c.cumulative(tree);
    let c0 = cum[tree.root().0].clone();
    let shifted: Vec<Rational> = cum.iter().map(|v| v - &c0).collect();
    let poly = fixed_consumption_polytope(m, None, shifted);
    let cap = poly.layout.capital().unwrap();
    let mut objective = vec![Rational::zero(); poly.system.num_vars];
    objective[cap] = Rational::one();
    match lp::solve(&LpProblem::new(Sense::Minimize, objective, poly.system))? {
        LpOutcome::Optimal { value, .. } => Ok(value + c0),
        _ => unreachable!("the stream is financeable from a large enough capital"),
    }
}

/// Expected value of node-indexed terminal values under one-step weights.
pub fn expectation_under(weights: &[Rational], values_at_leaves: &[Rational], tree: &EventTree) -> Rational {
    tree.leaves()
        .iter()
        .zip(values_at_leaves)
        .map(|(&l, v)| {
            let mut mass = Rational::one();
            let mut n = NodeId(l);
            while let Some(p) = tree.parent(n) {
                mass *= &weights[n.0];
                n = p;
            }
            mass * v
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m1, m2, t2};
    use crate::process::{solid_multiply, NonIncreasingProcess};
    use crate::rat;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    fn proc(m: &Market, v: &[(i64, i64)]) -> AdaptedProcess {
        AdaptedProcess::new(m.tree(), r(v)).unwrap()
    }

    fn hold(m: &Market, h: Rational) -> Strategy {
        Strategy::new(m, vec![vec![h], vec![], vec![]]).unwrap()
    }

    /// Two-step binomial market with up factor 2 and down factor 1/2.
    fn binomial2() -> Market {
        let tree = t2();
        let s = AdaptedProcess::new(
            &tree,
            r(&[(4, 1), (8, 1), (2, 1), (16, 1), (4, 1), (4, 1), (1, 1)]),
        )
        .unwrap();
        Market::new(tree, vec![s]).unwrap()
    }

    #[test]
    fn wealth_edge_recursion() {
        let m = m1();
        let none = ConsumptionProcess::none(m.tree());
        let x = wealth(&rat(1, 1), &hold(&m, rat(1, 6)), &none, &m);
        assert_eq!(x, r(&[(1, 1), (5, 3), (2, 3)]));
        assert!(is_admissible(&rat(1, 1), &hold(&m, rat(1, 6)), &none, &m));
        let flat = wealth(&rat(3, 2), &Strategy::zero(&m), &none, &m);
        assert!(flat.iter().all(|v| *v == rat(3, 2)));
    }

    #[test]
    fn consumption_is_subtracted() {
        let m = m1();
        let c = ConsumptionProcess::new(m.tree(), proc(&m, &[(0, 1), (1, 2), (1, 4)])).unwrap();
        let h = hold(&m, rat(1, 6));
        let with = wealth(&rat(1, 1), &h, &c, &m);
        let without = wealth(&rat(1, 1), &h, &ConsumptionProcess::none(m.tree()), &m);
        for n in m.tree().nodes() {
            assert_eq!(&with[n.0] + c.cumulative().get(n), without[n.0]);
        }
        assert!(!is_admissible(&rat(0, 1), &Strategy::zero(&m), &c, &m));
    }

    #[test]
    fn consumption_process_validation() {
        let m = m1();
        assert!(ConsumptionProcess::new(m.tree(), proc(&m, &[(1, 1), (1, 1), (1, 1)])).is_err());
        assert!(ConsumptionProcess::new(m.tree(), proc(&m, &[(0, 1), (1, 1), (0, 1)])).is_ok());
        let down = AdaptedProcess::new(&t2(), r(&[(0, 1), (1, 1), (0, 1), (0, 1), (1, 1), (0, 1), (0, 1)]));
        assert_eq!(
            ConsumptionProcess::new(&t2(), down.unwrap()),
            Err(MarketError::InvalidConsumption(NodeId(3)))
        );
    }

    #[test]
    fn m1_unique_measure() {
        let m = m1();
        assert_eq!(m.interior_measure(), &r(&[(1, 1), (1, 3), (2, 3)])[..]);
        let y = density_process(m.interior_measure(), &m).unwrap();
        assert_eq!(y.process.values(), &r(&[(1, 1), (2, 3), (4, 3)])[..]);
        assert!(y.equivalent);
    }

    #[test]
    fn m2_measure_family() {
        let m = m2();
        let (poly, _) = emm_polytope(&m).unwrap();
        let q = m.interior_measure();
        assert!(q[1] > rat(0, 1) && q[1] < rat(1, 3));
        assert_eq!(q[2], rat(1, 1) - rat(3, 1) * &q[1]);
        assert_eq!(q[3], rat(2, 1) * &q[1]);
        assert!(poly.contains(&r(&[(1, 1), (1, 3), (0, 1), (2, 3)])));
        assert!(poly.contains(&r(&[(1, 1), (0, 1), (1, 1), (0, 1)])));
        assert!(!poly.contains(&r(&[(1, 1), (1, 3), (1, 3), (1, 3)])));
    }

    #[test]
    fn arbitrage_is_rejected() {
        let tree = crate::fixtures::t1();
        let s = AdaptedProcess::new(&tree, r(&[(5, 1), (4, 1), (2, 1)])).unwrap();
        assert_eq!(Market::new(tree, vec![s]), Err(MarketError::NoEquivalentMartingaleMeasure));
    }

    #[test]
    fn density_of_reference_measure_is_one() {
        let tree = crate::fixtures::t1();
        let s = AdaptedProcess::new(&tree, r(&[(4, 1), (6, 1), (2, 1)])).unwrap();
        let m = Market::new(tree, vec![s]).unwrap();
        let y = density_process(&r(&[(1, 1), (1, 2), (1, 2)]), &m).unwrap();
        assert!(y.process.values().iter().all(|v| *v == rat(1, 1)));
    }

    #[test]
    fn boundary_density_is_flagged() {
        let m = m2();
        let y = density_process(&r(&[(1, 1), (1, 3), (0, 1), (2, 3)]), &m).unwrap();
        assert!(!y.equivalent);
        assert_eq!(y.process.get(NodeId(2)), &rat(0, 1));
        assert!(density_process(&r(&[(1, 1), (1, 3), (1, 3), (1, 3)]), &m).is_err());
    }

    #[test]
    fn pure_investment_polytope_contents() {
        let m = m1();
        let poly = pure_investment_polytope(&m, &rat(1, 1));
        let mut point = r(&[(1, 1), (5, 3), (2, 3)]);
        point.push(rat(1, 6));
        assert!(poly.system.is_satisfied_by(&point));
        let mut flat = vec![rat(1, 1); 3];
        flat.push(rat(0, 1));
        assert!(poly.system.is_satisfied_by(&flat));
        // E_Q[X_T] <= x for every feasible point.
        let q = m.interior_measure();
        let objective = vec![rat(0, 1), q[1].clone(), q[2].clone(), rat(0, 1)];
        let out = lp::solve(&LpProblem::new(Sense::Maximize, objective, poly.system)).unwrap();
        assert_eq!(out.optimal_value(), Some(&rat(1, 1)));
    }

    #[test]
    fn consumption_polytope_contents() {
        let m = m1();
        let poly = consumption_polytope(&m, &rat(1, 1));
        let c = |n: usize| poly.layout.c(NodeId(n)).unwrap();
        let mut point = vec![rat(0, 1); poly.system.num_vars];
        point[0] = rat(1, 1);
        point[poly.layout.h(NodeId(0), 0)] = rat(1, 6);
        point[c(1)] = rat(5, 3);
        point[c(2)] = rat(2, 3);
        assert!(poly.system.is_satisfied_by(&point));
        point[c(1)] = rat(-1, 1);
        point[1] = rat(8, 3);
        assert!(!poly.system.is_satisfied_by(&point));
    }

    #[test]
    fn enlargement_examples() {
        let m = m1();
        let density = density_process(m.interior_measure(), &m).unwrap().process;
        assert!(y_enlargement_membership(&density, &m).unwrap());
        assert!(!y_enlargement_membership(&AdaptedProcess::constant(m.tree(), rat(1, 1)), &m).unwrap());
        let b = NonIncreasingProcess::new(m.tree(), proc(&m, &[(1, 1), (1, 2), (1, 1)])).unwrap();
        let shrunk = solid_multiply(&density, &b, m.tree());
        assert!(y_enlargement_membership(&shrunk, &m).unwrap());
        assert!(!y_enlargement_membership(&density.scale(&rat(2, 1)), &m).unwrap());
    }

    #[test]
    fn enlargement_oracles_agree_on_fixtures() {
        let m2 = m2();
        let probes = [
            proc(&m2, &[(1, 1), (1, 1), (3, 1), (0, 1)]),
            proc(&m2, &[(1, 1), (0, 1), (3, 1), (0, 1)]),
            proc(&m2, &[(1, 1), (1, 1), (1, 1), (1, 1)]),
            proc(&m2, &[(1, 1), (1, 1), (0, 1), (2, 1)]),
            proc(&m2, &[(1, 2), (1, 1), (0, 1), (1, 1)]),
        ];
        for y in &probes {
            let a = y_enlargement_membership(y, &m2).unwrap();
            assert_eq!(a, xc_polar_membership(y, &m2).unwrap());
            assert_eq!(a, enlargement_membership_local(y, &m2).unwrap());
        }
        assert!(y_enlargement_membership(&probes[3], &m2).unwrap());
        assert!(!y_enlargement_membership(&probes[2], &m2).unwrap());
    }

    #[test]
    fn m1_enlargement_is_solid_hull_of_density() {
        // In a complete market every member is dominated by a shrink of the density.
        let m = m1();
        let cases = [
            ((1, 1), (2, 3), (4, 3), true),
            ((1, 1), (2, 3), (1, 1), true),
            ((1, 2), (1, 3), (2, 3), true),
            ((1, 1), (1, 1), (1, 1), false),
            ((1, 1), (2, 3), (5, 3), false),
        ];
        for (a, b, c, expected) in cases {
            let y = proc(&m, &[a, b, c]);
            assert_eq!(y_enlargement_membership(&y, &m).unwrap(), expected, "{y:?}");
        }
    }

    #[test]
    fn superhedge_examples() {
        let m = m2();
        let zero = superhedge_value(&Claim::Terminal(vec![rat(0, 1); 3]), &m).unwrap();
        assert_eq!(zero.value, rat(0, 1));
        let call = superhedge_value(&Claim::Terminal(r(&[(3, 1), (0, 1), (0, 1)])), &m).unwrap();
        assert_eq!(call.value, rat(1, 1));
        assert_eq!(call.worst_measure, r(&[(1, 1), (1, 3), (0, 1), (2, 3)]));
        assert!(call.residual.iter().all(|d| !d.is_negative()));
        assert!(call.residual.iter().any(|d| d.is_positive()));

        let m = m1();
        let call = superhedge_value(&Claim::Terminal(r(&[(3, 1), (0, 1)])), &m).unwrap();
        assert_eq!(call.value, rat(1, 1));
        assert!(call.residual.iter().all(Zero::is_zero));
        assert_eq!(call.strategy.at(NodeId(0)), &[rat(1, 2)][..]);
    }

    #[test]
    fn superhedge_two_steps_complete() {
        let m = binomial2();
        let claim = r(&[(12, 1), (0, 1), (0, 1), (0, 1)]);
        let sh = superhedge_value(&Claim::Terminal(claim.clone()), &m).unwrap();
        let q = m.interior_measure();
        assert_eq!(sh.value, expectation_under(q, &claim, m.tree()));
        assert_eq!(sh.value, rat(4, 3));
        assert!(sh.residual.iter().all(Zero::is_zero));
    }

    #[test]
    fn budget_examples() {
        let m = m2();
        let zero = ConsumptionDensity::terminal(m.tree(), AdaptedProcess::zero(m.tree())).unwrap();
        assert!(budget_check(&zero, &rat(0, 1), &m).unwrap().affordable);
        let c = ConsumptionDensity::terminal(m.tree(), proc(&m, &[(0, 1), (3, 1), (0, 1), (0, 1)])).unwrap();
        let yes = budget_check(&c, &rat(1, 1), &m).unwrap();
        assert!(yes.affordable);
        match yes.certificate {
            BudgetCertificate::Strategy { wealth, .. } => assert!(wealth.iter().all(|v| !v.is_negative())),
            other => panic!("{other:?}"),
        }
        let no = budget_check(&c, &rat(99, 100), &m).unwrap();
        assert!(!no.affordable);
        match no.certificate {
            BudgetCertificate::ViolatingMeasure { weights, expected_cost } => {
                assert_eq!(weights, r(&[(1, 1), (1, 3), (0, 1), (2, 3)]));
                assert_eq!(expected_cost, rat(1, 1));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(min_budget(&c, &m).unwrap(), rat(1, 1));

        let m = m1();
        let ones = ConsumptionDensity::terminal(m.tree(), AdaptedProcess::constant(m.tree(), rat(1, 1))).unwrap();
        assert!(budget_check(&ones, &rat(1, 1), &m).unwrap().affordable);
        assert!(!budget_check(&ones, &rat(999, 1000), &m).unwrap().affordable);
    }

    #[test]
    fn budget_with_time_zero_weight() {
        let m = m1();
        let ones = AdaptedProcess::constant(m.tree(), rat(1, 1));
        let c = ConsumptionDensity::new(m.tree(), ones, r(&[(1, 2), (1, 2)])).unwrap();
        assert_eq!(c.cumulative(m.tree()), r(&[(1, 2), (1, 1), (1, 1)]));
        assert_eq!(min_budget(&c, &m).unwrap(), rat(1, 1));
        assert!(budget_check(&c, &rat(1, 1), &m).unwrap().affordable);
        assert!(!budget_check(&c, &rat(1, 3), &m).unwrap().affordable);
    }

    #[test]
    fn bad_weights_rejected() {
        let m = m1();
        let ones = AdaptedProcess::constant(m.tree(), rat(1, 1));
        assert_eq!(
            ConsumptionDensity::new(m.tree(), ones.clone(), r(&[(1, 2), (1, 3)])),
            Err(MarketError::InvalidWeights)
        );
        assert!(ConsumptionDensity::new(m.tree(), ones, r(&[(1, 1)])).is_err());
    }

    #[test]
    fn market_duality_on_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [m1(), m2(), binomial2()] {
            let density = density_process(m.interior_measure(), &m).unwrap().process;
            let pairs: Vec<_> = (0..4).map(|_| sample_consumption_pair(&mut rng, &m).unwrap()).collect();
            // A payoff costing 11/10 to superhedge, carried by a process starting at 1.
            let mut payoff = vec![rat(0, 1); m.tree().leaves().len()];
            payoff[0] = rat(1, 1);
            let sh = superhedge_value(&Claim::Terminal(payoff), &m).unwrap();
            let scale = rat(11, 10) / &sh.value;
            let mut over: Vec<Rational> = sh.wealth.iter().map(|v| v * &scale).collect();
            over[m.tree().root().0] = rat(1, 1);
            let y_probes = vec![density.clone(), AdaptedProcess::constant(m.tree(), rat(1, 1)), density.scale(&rat(1, 2))];
            let z_probes = vec![
                AdaptedProcess::new(m.tree(), pairs[0].net()).unwrap(),
                AdaptedProcess::new(m.tree(), over).unwrap(),
            ];
            let report = verify_market_duality(&m, &y_probes, &pairs, &z_probes).unwrap();
            assert!(report.all_ok(), "{report:?}");
            assert!(report.products_checked >= 8);
            assert_eq!(report.bipolar_oracles[0], (true, true));
            assert!(!report.bipolar_oracles[1].0);
        }
    }

    #[test]
    fn duplicate_asset_stays_valid() {
        let m = m1();
        let s = m.prices()[0].clone();
        let m = Market::new(m.tree().clone(), vec![s.clone(), s]).unwrap();
        let sh = superhedge_value(&Claim::Terminal(r(&[(3, 1), (0, 1)])), &m).unwrap();
        assert_eq!(sh.value, rat(1, 1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn duality_and_bayes(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = crate::fuzz::random_market(&mut rng);
            let tree = m.tree();
            let density = density_process(m.interior_measure(), &m).unwrap().process;
            prop_assert!(y_enlargement_membership(&density, &m).unwrap());
            let pair = sample_consumption_pair(&mut rng, &m).unwrap();
            let product: Vec<Rational> = pair.net().iter().zip(density.values()).map(|(a, b)| a * b).collect();
            prop_assert!(is_supermartingale(&AdaptedProcess::new(tree, product).unwrap(), tree));

            let dens = crate::fuzz::random_consumption_density(&mut rng, tree);
            let value = superhedge_value(&Claim::Consumption(dens.clone()), &m).unwrap().value;
            prop_assert_eq!(min_budget(&dens, &m).unwrap(), value.clone());
            prop_assert!(budget_check(&dens, &value, &m).unwrap().affordable);
            let below = &value - rat(1, 1000);
            if !below.is_negative() || value.is_positive() {
                prop_assert!(!budget_check(&dens, &below, &m).unwrap().affordable);
            }
        }

        #[test]
        fn enlargement_sandwich(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = crate::fuzz::random_market(&mut rng);
            let tree = m.tree();
            let y = AdaptedProcess::new(tree, tree.nodes().map(|_| crate::fuzz::small_nonneg(&mut rng, 3)).collect()).unwrap();
            let a = y_enlargement_membership(&y, &m).unwrap();
            prop_assert_eq!(a, xc_polar_membership(&y, &m).unwrap());
            prop_assert_eq!(a, enlargement_membership_local(&y, &m).unwrap());
            if a {
                prop_assert!(y.root_value(tree) <= &rat(1, 1));
                prop_assert!(is_supermartingale(&y, tree));
            }
        }
    }
}
