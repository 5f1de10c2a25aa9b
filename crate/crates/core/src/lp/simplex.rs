//! Dense two-phase tableau simplex with Bland's rule.
//!
//! The problem is rewritten in standard form `max c.x, A x = b, x >= 0, b >= 0`
//! by shifting / reflecting / splitting variables, adding one slack, surplus or
//! artificial column per row, and flipping rows with negative right-hand side.
//! Certificates are mapped back to the caller's variables and rows.

use num_traits::{One, Signed, Zero};

use super::{LinearConstraint, LpOutcome, LpProblem, Relation, Sense};
use crate::Rational;

/// `x_j = offset + sum sign * x_col` over standard-form columns.
struct VarMap {
    offset: Rational,
    cols: Vec<(usize, bool)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

enum RowOrigin {
    /// Index into the caller's constraint list; `negated` records a flip.
    Constraint { index: usize, negated: bool },
    /// Upper bound row of a doubly bounded variable.
    Bound,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Column that held the identity entry for each row initially.
    unit_col: Vec<usize>,
    origins: Vec<RowOrigin>,
}

enum RunEnd {
    Optimal(Vec<Rational>),
    Unbounded(usize),
}

impl Tableau {
    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, j: usize, d: Option<&mut Vec<Rational>>) {
        let inv = Rational::one() / &self.rows[r][j];
        for a in self.rows[r].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        let support: Vec<usize> = (0..pivot_row.len())
            .filter(|&k| !pivot_row[k].is_zero())
            .collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let factor = self.rows[i][j].clone();
            for &k in &support {
                let delta = &factor * &pivot_row[k];
                self.rows[i][k] -= delta;
            }
            let delta = &factor * &pivot_rhs;
            self.rhs[i] -= delta;
        }
        if let Some(d) = d {
            if !d[j].is_zero() {
                let factor = d[j].clone();
                for &k in &support {
                    let delta = &factor * &pivot_row[k];
                    d[k] -= delta;
                }
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
    }

    /// Primal simplex on `cost` (maximization) over the allowed columns.
    fn run(&mut self, cost: &[Rational], allowed: &[bool]) -> RunEnd {
        let mut d = self.reduced_costs(cost);
        loop {
            // Bland: lowest-index improving column.
            let entering = (0..self.ncols()).find(|&j| allowed[j] && d[j].is_positive());
            let Some(j) = entering else {
                return RunEnd::Optimal(d);
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return RunEnd::Unbounded(j);
            };
            self.pivot(r, j, Some(&mut d));
        }
    }

    fn std_point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.ncols()];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[i].clone();
        }
        x
    }

    /// Row multipliers `pi_i = c_unit - d_unit`, mapped onto the caller's rows.
    fn row_multipliers(&self, cost: &[Rational], d: &[Rational], ncons: usize) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); ncons];
        for (i, origin) in self.origins.iter().enumerate() {
            if let RowOrigin::Constraint { index, negated } = origin {
                let u = self.unit_col[i];
                let pi = &cost[u] - &d[u];
                y[*index] = if *negated { -pi } else { pi };
            }
        }
        y
    }
}

fn to_original(maps: &[VarMap], std: &[Rational], with_offset: bool) -> Vec<Rational> {
    maps.iter()
        .map(|m| {
            let mut v = if with_offset {
                m.offset.clone()
            } else {
                Rational::zero()
            };
            for &(c, pos) in &m.cols {
                if pos {
                    v += &std[c];
                } else {
                    v -= &std[c];
                }
            }
            v
        })
        .collect()
}

pub(super) fn solve(problem: &LpProblem) -> LpOutcome {
    let sys = &problem.system;
    let ncons = sys.constraints.len();

    // Variable substitution.
    let mut maps = Vec::with_capacity(sys.num_vars);
    let mut nstruct = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &sys.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), upper) => {
                let col = nstruct;
                nstruct += 1;
                if let Some(u) = upper {
                    bound_rows.push((col, u - l));
                }
                VarMap {
                    offset: l.clone(),
                    cols: vec![(col, true)],
                }
            }
            (None, Some(u)) => {
                let col = nstruct;
                nstruct += 1;
                VarMap {
                    offset: u.clone(),
                    cols: vec![(col, false)],
                }
            }
            (None, None) => {
                let col = nstruct;
                nstruct += 2;
                VarMap {
                    offset: Rational::zero(),
                    cols: vec![(col, true), (col + 1, false)],
                }
            }
        };
        maps.push(map);
    }

    // Unique rows, remembering the first caller index of each.
    let mut seen = std::collections::HashMap::<LinearConstraint, usize>::new();
    let mut raw_rows: Vec<(Vec<Rational>, Relation, Rational, RowOrigin)> = Vec::new();
    for (index, c) in sys.constraints.iter().enumerate() {
        let canon = c.canonical();
        if seen.contains_key(&canon) {
            continue;
        }
        let mut coeffs = vec![Rational::zero(); nstruct];
        let mut rhs = canon.rhs.clone();
        for (j, a) in &canon.coeffs {
            let m = &maps[*j];
            rhs -= a * &m.offset;
            for &(col, pos) in &m.cols {
                if pos {
                    coeffs[col] += a;
                } else {
                    coeffs[col] -= a;
                }
            }
        }
        seen.insert(canon.clone(), index);
        raw_rows.push((
            coeffs,
            canon.relation,
            rhs,
            RowOrigin::Constraint {
                index,
                negated: false,
            },
        ));
    }
    for (col, width) in bound_rows {
        let mut coeffs = vec![Rational::zero(); nstruct];
        coeffs[col] = Rational::one();
        raw_rows.push((coeffs, Relation::Le, width, RowOrigin::Bound));
    }

    // Normalize to b >= 0 and lay out auxiliary columns.
    for (coeffs, rel, rhs, origin) in raw_rows.iter_mut() {
        if rhs.is_negative() {
            for a in coeffs.iter_mut() {
                *a = -a.clone();
            }
            *rhs = -rhs.clone();
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            if let RowOrigin::Constraint { negated, .. } = origin {
                *negated = true;
            }
        }
    }
    let m = raw_rows.len();
    let nslack = raw_rows
        .iter()
        .filter(|r| r.1 != Relation::Eq)
        .count();
    let nart = raw_rows
        .iter()
        .filter(|r| r.1 != Relation::Le)
        .count();
    let ncols = nstruct + nslack + nart;
    let mut kinds = vec![ColKind::Structural; nstruct];
    kinds.extend(std::iter::repeat_n(ColKind::Slack, nslack));
    kinds.extend(std::iter::repeat_n(ColKind::Artificial, nart));

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut unit_col = Vec::with_capacity(m);
    let mut origins = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (nstruct, nstruct + nslack);
    for (coeffs, rel, b, origin) in raw_rows {
        let mut row = coeffs;
        row.resize(ncols, Rational::zero());
        let unit = match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                next_slack += 1;
                next_slack - 1
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                next_art += 1;
                next_art - 1
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                next_art += 1;
                next_art - 1
            }
        };
        rows.push(row);
        rhs.push(b);
        basis.push(unit);
        unit_col.push(unit);
        origins.push(origin);
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        kinds,
        unit_col,
        origins,
    };

    // Phase 1.
    if nart > 0 {
        let cost1: Vec<Rational> = tab
            .kinds
            .iter()
            .map(|k| {
                if *k == ColKind::Artificial {
                    -Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let all = vec![true; ncols];
        let RunEnd::Optimal(d) = tab.run(&cost1, &all) else {
            unreachable!("phase 1 objective is bounded above by zero");
        };
        let w = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .fold(Rational::zero(), |acc, (&b, v)| acc + &cost1[b] * v);
        if w.is_negative() {
            let farkas = tab.row_multipliers(&cost1, &d, ncons);
            return LpOutcome::Infeasible { farkas };
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tab.kinds[tab.basis[r]] != ColKind::Artificial {
                continue;
            }
            if let Some(k) =
                (0..ncols).find(|&k| tab.kinds[k] != ColKind::Artificial && !tab.rows[r][k].is_zero())
            {
                tab.pivot(r, k, None);
            }
        }
    }

    // Phase 2.
    let flip = problem.sense == Sense::Minimize;
    let mut cost2 = vec![Rational::zero(); ncols];
    let mut constant = Rational::zero();
    for (j, mp) in maps.iter().enumerate() {
        let c = if flip {
            -problem.objective[j].clone()
        } else {
            problem.objective[j].clone()
        };
        if c.is_zero() {
            continue;
        }
        constant += &c * &mp.offset;
        for &(col, pos) in &mp.cols {
            cost2[col] = if pos { c.clone() } else { -c.clone() };
        }
    }
    let allowed: Vec<bool> = tab
        .kinds
        .iter()
        .map(|k| *k != ColKind::Artificial)
        .collect();
    match tab.run(&cost2, &allowed) {
        RunEnd::Optimal(d) => {
            let std = tab.std_point();
            let point = to_original(&maps, &std, true);
            let internal = tab
                .basis
                .iter()
                .zip(&tab.rhs)
                .fold(constant, |acc, (&b, v)| acc + &cost2[b] * v);
            let mut duals = tab.row_multipliers(&cost2, &d, ncons);
            let value = if flip {
                for y in duals.iter_mut() {
                    *y = -y.clone();
                }
                -internal
            } else {
                internal
            };
            LpOutcome::Optimal {
                value,
                point,
                duals,
            }
        }
        RunEnd::Unbounded(j) => {
            let std = tab.std_point();
            let point = to_original(&maps, &std, true);
            let mut dir = vec![Rational::zero(); ncols];
            dir[j] = Rational::one();
            for (i, &b) in tab.basis.iter().enumerate() {
                dir[b] = -tab.rows[i][j].clone();
            }
            let ray = to_original(&maps, &dir, false);
            LpOutcome::Unbounded { point, ray }
        }
    }
}
