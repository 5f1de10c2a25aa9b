//! Exact rational linear programming.
//!
//! A dense two-phase simplex over [`Rational`] with Bland's rule. Every
//! outcome carries a certificate (primal point and dual multipliers, an
//! improving ray, or a Farkas combination) and [`solve`] re-checks that
//! certificate by exact substitution before returning.

mod simplex;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::sum;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `sum coeffs[k].1 * x[coeffs[k].0]  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        LinearConstraint {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j])
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        holds(&self.lhs(x), self.relation, &self.rhs)
    }

    /// Merges repeated indices and drops zero coefficients, sorted by index.
    fn canonical(&self) -> LinearConstraint {
        let mut terms = self.coeffs.clone();
        terms.sort_by_key(|(j, _)| *j);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        LinearConstraint::new(merged, self.relation, self.rhs.clone())
    }
}

pub(crate) fn holds(lhs: &Rational, rel: Relation, rhs: &Rational) -> bool {
    match rel {
        Relation::Le => lhs <= rhs,
        Relation::Eq => lhs == rhs,
        Relation::Ge => lhs >= rhs,
    }
}

/// Per-variable bounds; `None` means unbounded in that direction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bounds {
    pub fn free() -> Self {
        Bounds::default()
    }

    pub fn nonnegative() -> Self {
        Bounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| v >= l) && self.upper.as_ref().is_none_or(|u| v <= u)
    }
}

/// A finite list of linear inequalities over an indexed coordinate vector,
/// together with per-coordinate bounds. This is the H-representation used for
/// every polar and polytope in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub num_vars: usize,
    pub constraints: Vec<LinearConstraint>,
    pub bounds: Vec<Bounds>,
}

impl ConstraintSystem {
    pub fn new(num_vars: usize) -> Self {
        ConstraintSystem {
            num_vars,
            constraints: Vec::new(),
            bounds: vec![Bounds::free(); num_vars],
        }
    }

    /// All coordinates constrained to be `>= 0`.
    pub fn nonnegative(num_vars: usize) -> Self {
        ConstraintSystem {
            num_vars,
            constraints: Vec::new(),
            bounds: vec![Bounds::nonnegative(); num_vars],
        }
    }

    pub fn push(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints
            .push(LinearConstraint::new(coeffs, relation, rhs));
    }

    pub fn add_var(&mut self, bounds: Bounds) -> usize {
        self.bounds.push(bounds);
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn check_shape(&self) -> Result<(), LpError> {
        if self.num_vars == 0 {
            return Err(LpError::NoVariables);
        }
        if self.bounds.len() != self.num_vars {
            return Err(LpError::DimensionMismatch {
                what: "bounds",
                expected: self.num_vars,
                found: self.bounds.len(),
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if let Some((j, _)) = c.coeffs.iter().find(|(j, _)| *j >= self.num_vars) {
                return Err(LpError::IndexOutOfRange {
                    row,
                    index: *j,
                    num_vars: self.num_vars,
                });
            }
        }
        Ok(())
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars && self.first_violation(x).is_none()
    }

    /// Index of the first violated constraint (`Err(j)` for a violated bound
    /// on coordinate `j`).
    pub fn first_violation(&self, x: &[Rational]) -> Option<Result<usize, usize>> {
        if let Some(j) = (0..self.num_vars).find(|&j| !self.bounds[j].contains(&x[j])) {
            return Some(Err(j));
        }
        self.constraints
            .iter()
            .position(|c| !c.is_satisfied_by(x))
            .map(Ok)
    }

    /// Drops exact duplicate rows (after merging repeated indices).
    pub fn deduplicated(&self) -> ConstraintSystem {
        let mut seen = std::collections::HashSet::new();
        let constraints = self
            .constraints
            .iter()
            .map(LinearConstraint::canonical)
            .filter(|c| seen.insert(c.clone()))
            .collect();
        ConstraintSystem {
            num_vars: self.num_vars,
            constraints,
            bounds: self.bounds.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub system: ConstraintSystem,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<Rational>, system: ConstraintSystem) -> Self {
        LpProblem {
            sense,
            objective,
            system,
        }
    }

    /// Pure feasibility problem (all-zero objective).
    pub fn feasibility(system: ConstraintSystem) -> Self {
        let n = system.num_vars;
        LpProblem::new(Sense::Maximize, vec![Rational::zero(); n], system)
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    pub fn check_shape(&self) -> Result<(), LpError> {
        self.system.check_shape()?;
        if self.objective.len() != self.system.num_vars {
            return Err(LpError::DimensionMismatch {
                what: "objective",
                expected: self.system.num_vars,
                found: self.objective.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// `duals[i]` multiplies constraint `i` of the problem as given
    /// (duplicates carry zero).
    Optimal {
        value: Rational,
        point: Vec<Rational>,
        duals: Vec<Rational>,
    },
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
    /// `farkas[i]` multiplies constraint `i`; the combined inequality cannot
    /// hold anywhere inside the variable bounds.
    Infeasible { farkas: Vec<Rational> },
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Unbounded { .. } => LpStatus::Unbounded,
            LpOutcome::Infeasible { .. } => LpStatus::Infeasible,
        }
    }

    pub fn optimal_value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { point, .. } | LpOutcome::Unbounded { point, .. } => Some(point),
            LpOutcome::Infeasible { .. } => None,
        }
    }

    /// Re-checks the certificate against `problem` by exact substitution.
    pub fn verify(&self, problem: &LpProblem) -> Result<(), CertificateError> {
        let sys = &problem.system;
        match self {
            LpOutcome::Optimal {
                value,
                point,
                duals,
            } => {
                check_point(sys, point)?;
                if &problem.objective_at(point) != value {
                    return Err(CertificateError::ObjectiveMismatch);
                }
                let bound = dual_bound(problem, duals)?;
                if &bound != value {
                    return Err(CertificateError::DualGap);
                }
                Ok(())
            }
            LpOutcome::Unbounded { point, ray } => {
                check_point(sys, point)?;
                if ray.len() != sys.num_vars {
                    return Err(CertificateError::WrongLength);
                }
                for c in &sys.constraints {
                    if !holds(&c.lhs(ray), c.relation, &Rational::zero()) {
                        return Err(CertificateError::RayLeavesRegion);
                    }
                }
                for (b, d) in sys.bounds.iter().zip(ray) {
                    if (b.lower.is_some() && d.is_negative()) || (b.upper.is_some() && d.is_positive())
                    {
                        return Err(CertificateError::RayLeavesRegion);
                    }
                }
                let slope = problem.objective_at(ray);
                let improving = match problem.sense {
                    Sense::Maximize => slope.is_positive(),
                    Sense::Minimize => slope.is_negative(),
                };
                if improving {
                    Ok(())
                } else {
                    Err(CertificateError::RayNotImproving)
                }
            }
            LpOutcome::Infeasible { farkas } => verify_farkas(sys, farkas),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("problem has no variables")]
    NoVariables,
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("constraint {row} references variable {index} but there are {num_vars}")]
    IndexOutOfRange {
        row: usize,
        index: usize,
        num_vars: usize,
    },
    #[error("solver produced an unsound certificate: {0}")]
    Certificate(#[from] CertificateError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("certificate vector has the wrong length")]
    WrongLength,
    #[error("point violates constraint {0}")]
    PointInfeasible(usize),
    #[error("point violates the bounds of variable {0}")]
    PointOutOfBounds(usize),
    #[error("objective at the point differs from the reported value")]
    ObjectiveMismatch,
    #[error("dual multiplier has the wrong sign for constraint {0}")]
    DualSign(usize),
    #[error("dual bound is unbounded")]
    DualUnbounded,
    #[error("dual bound differs from the primal value")]
    DualGap,
    #[error("ray leaves the feasible region")]
    RayLeavesRegion,
    #[error("ray does not improve the objective")]
    RayNotImproving,
    #[error("Farkas combination is not contradictory")]
    FarkasNotContradictory,
}

fn check_point(sys: &ConstraintSystem, x: &[Rational]) -> Result<(), CertificateError> {
    if x.len() != sys.num_vars {
        return Err(CertificateError::WrongLength);
    }
    match sys.first_violation(x) {
        None => Ok(()),
        Some(Ok(i)) => Err(CertificateError::PointInfeasible(i)),
        Some(Err(j)) => Err(CertificateError::PointOutOfBounds(j)),
    }
}

/// Multipliers must turn every row into a valid `<=` inequality
/// (for maximization) or `>=` inequality (for minimization).
fn check_multiplier_signs(
    sys: &ConstraintSystem,
    y: &[Rational],
    as_upper: bool,
) -> Result<(), CertificateError> {
    if y.len() != sys.constraints.len() {
        return Err(CertificateError::WrongLength);
    }
    for (i, (c, yi)) in sys.constraints.iter().zip(y).enumerate() {
        let bad = match (c.relation, as_upper) {
            (Relation::Le, true) | (Relation::Ge, false) => yi.is_negative(),
            (Relation::Ge, true) | (Relation::Le, false) => yi.is_positive(),
            (Relation::Eq, _) => false,
        };
        if bad {
            return Err(CertificateError::DualSign(i));
        }
    }
    Ok(())
}

/// `sum_i y_i a_i` as a dense vector.
fn combine_rows(sys: &ConstraintSystem, y: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); sys.num_vars];
    for (c, yi) in sys.constraints.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (j, a) in &c.coeffs {
            out[*j] += yi * a;
        }
    }
    out
}

/// Supremum (or infimum when `upper` is false) of `r . x` over the bound box.
fn box_extremum(bounds: &[Bounds], r: &[Rational], upper: bool) -> Option<Rational> {
    let mut acc = Rational::zero();
    for (b, rj) in bounds.iter().zip(r) {
        if rj.is_zero() {
            continue;
        }
        let want_upper = rj.is_positive() == upper;
        let end = if want_upper { &b.upper } else { &b.lower };
        acc += rj * end.as_ref()?;
    }
    Some(acc)
}

/// Lagrangian bound `y.b + sup_box (c - A^T y).x` (inf for minimization).
fn dual_bound(problem: &LpProblem, y: &[Rational]) -> Result<Rational, CertificateError> {
    let sys = &problem.system;
    let maximize = problem.sense == Sense::Maximize;
    check_multiplier_signs(sys, y, maximize)?;
    let aty = combine_rows(sys, y);
    let reduced: Vec<Rational> = problem
        .objective
        .iter()
        .zip(&aty)
        .map(|(c, a)| c - a)
        .collect();
    let yb = sum(
        &sys.constraints
            .iter()
            .zip(y)
            .map(|(c, yi)| yi * &c.rhs)
            .collect::<Vec<_>>(),
    );
    let ext = box_extremum(&sys.bounds, &reduced, maximize).ok_or(CertificateError::DualUnbounded)?;
    Ok(yb + ext)
}

fn verify_farkas(sys: &ConstraintSystem, y: &[Rational]) -> Result<(), CertificateError> {
    check_multiplier_signs(sys, y, true)?;
    let combined = combine_rows(sys, y);
    let rhs = sys
        .constraints
        .iter()
        .zip(y)
        .fold(Rational::zero(), |acc, (c, yi)| acc + yi * &c.rhs);
    // The combination reads `combined . x <= rhs`; it is contradictory when
    // even the smallest value over the bound box exceeds `rhs`.
    match box_extremum(&sys.bounds, &combined, false) {
        Some(min) if min > rhs => Ok(()),
        _ => Err(CertificateError::FarkasNotContradictory),
    }
}

/// Solves `problem` exactly. The returned certificate has already been
/// verified; an unsound certificate is reported as [`LpError::Certificate`].
pub fn solve(problem: &LpProblem) -> Result<LpOutcome, LpError> {
    problem.check_shape()?;
    let outcome = simplex::solve(problem);
    outcome.verify(problem)?;
    VERIFIED.fetch_add(1, Ordering::Relaxed);
    Ok(outcome)
}

static VERIFIED: AtomicU64 = AtomicU64::new(0);

/// Number of certificates [`solve`] has verified in this process so far.
pub fn certificates_verified() -> u64 {
    VERIFIED.load(Ordering::Relaxed)
}

/// Result of [`feasible_interior_point`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InteriorPoint {
    /// A feasible point whose strict coordinates are all `>= margin > 0`.
    Found {
        point: Vec<Rational>,
        margin: Rational,
    },
    NoInterior,
}

/// Looks for a feasible point that is strictly positive on `strict_vars`, by
/// maximizing a common margin `eps <= 1` with `x_j >= eps` on those coordinates.
pub fn feasible_interior_point(
    system: &ConstraintSystem,
    strict_vars: &[usize],
) -> Result<InteriorPoint, LpError> {
    system.check_shape()?;
    let mut sys = system.clone();
    let eps = sys.add_var(Bounds {
        lower: None,
        upper: Some(Rational::from_integer(1.into())),
    });
    for &j in strict_vars {
        if j >= system.num_vars {
            return Err(LpError::IndexOutOfRange {
                row: sys.constraints.len(),
                index: j,
                num_vars: system.num_vars,
            });
        }
        sys.push(
            vec![(j, Rational::from_integer(1.into())), (eps, Rational::from_integer((-1).into()))],
            Relation::Ge,
            Rational::zero(),
        );
    }
    let mut objective = vec![Rational::zero(); sys.num_vars];
    objective[eps] = Rational::from_integer(1.into());
    let problem = LpProblem::new(Sense::Maximize, objective, sys);
    match solve(&problem)? {
        LpOutcome::Optimal { value, mut point, .. } if value.is_positive() => {
            point.truncate(system.num_vars);
            Ok(InteriorPoint::Found {
                point,
                margin: value,
            })
        }
        _ => Ok(InteriorPoint::NoInterior),
    }
}
